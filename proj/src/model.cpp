#include "matt/model.hpp"

#include <cmath>
#include <string>

#include "matt/error.hpp"

namespace matt {
namespace {

std::string layer_name(std::size_t layer, const char* kind) {
    return "encoder." + std::to_string(layer) + "." + kind;
}

std::size_t index_of(const ParamStore& params, std::string_view name) {
    const auto& items = params.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].name == name) return i;
    }
    throw Error(ErrorCode::ShapeError, "model parameter missing: " + std::string(name));
}

}  // namespace

Aggregator parse_aggregator(std::string_view name) {
    if (name == "matt") return Aggregator::Matt;
    if (name == "mean") return Aggregator::Mean;
    throw Error(ErrorCode::InvalidConfig, "unknown aggregator '" + std::string(name) + "' (expected matt|mean)");
}

std::string_view to_string(Aggregator aggregator) {
    return aggregator == Aggregator::Matt ? "matt" : "mean";
}

MattModel::MattModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
    const auto& enc = config_.encoder;
    if (enc.input_dim == 0 || enc.output_dim == 0 || config_.n_genres == 0) {
        throw Error(ErrorCode::InvalidConfig, "model dimensions must be positive");
    }
    std::uint64_t stream = 0;
    std::size_t fan_in = enc.input_dim;
    for (std::size_t l = 0; l < n_layers(); ++l) {
        const std::size_t fan_out = l < enc.hidden_dims.size() ? enc.hidden_dims[l] : enc.output_dim;
        if (fan_out == 0) throw Error(ErrorCode::InvalidConfig, "hidden layer width must be positive");
        params_.add(layer_name(l, "weight"), xavier_uniform(fan_out, fan_in, derive_seed(seed, stream++)));
        params_.add(layer_name(l, "bias"), Matrix(fan_out, 1));
        fan_in = fan_out;
    }
    const std::size_t d = enc.output_dim;
    params_.add("attention.query", xavier_uniform(d, 1, derive_seed(seed, stream++)));
    params_.add("attention.weight", xavier_uniform(1, 2 * d, derive_seed(seed, stream++)));
    params_.add("attention.bias", Matrix(1, 1));
    params_.add("classifier.weight", xavier_uniform(config_.n_genres, d, derive_seed(seed, stream++)));
    resolve_params();
}

MattModel::MattModel(ModelConfig config, ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
    resolve_params();
}

MattModel MattModel::from_params(ParamStore params, Aggregator aggregator) {
    ModelConfig config;
    config.aggregator = aggregator;
    std::size_t layers = 0;
    while (params.contains(layer_name(layers, "weight"))) ++layers;
    if (layers == 0) {
        throw Error(ErrorCode::ShapeError, "checkpoint has no encoder layers");
    }
    config.encoder.input_dim = params.at(layer_name(0, "weight")).value.cols();
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        config.encoder.hidden_dims.push_back(params.at(layer_name(l, "weight")).value.rows());
    }
    config.encoder.output_dim = params.at(layer_name(layers - 1, "weight")).value.rows();
    config.n_genres = params.at("classifier.weight").value.rows();
    return MattModel(std::move(config), std::move(params));
}

void MattModel::resolve_params() {
    const auto& items = params_.items();
    weight_idx_.clear();
    bias_idx_.clear();
    std::size_t fan_in = config_.encoder.input_dim;
    for (std::size_t l = 0; l < n_layers(); ++l) {
        const std::size_t fan_out =
            l < config_.encoder.hidden_dims.size() ? config_.encoder.hidden_dims[l] : config_.encoder.output_dim;
        const auto wi = index_of(params_, layer_name(l, "weight"));
        const auto bi = index_of(params_, layer_name(l, "bias"));
        if (items[wi].value.rows() != fan_out || items[wi].value.cols() != fan_in ||
            items[bi].value.rows() != fan_out || items[bi].value.cols() != 1) {
            throw Error(ErrorCode::ShapeError, "encoder layer " + std::to_string(l) + " has inconsistent shape");
        }
        weight_idx_.push_back(wi);
        bias_idx_.push_back(bi);
        fan_in = fan_out;
    }
    const std::size_t d = config_.encoder.output_dim;
    query_idx_ = index_of(params_, "attention.query");
    att_weight_idx_ = index_of(params_, "attention.weight");
    att_bias_idx_ = index_of(params_, "attention.bias");
    classifier_idx_ = index_of(params_, "classifier.weight");
    const auto shape_is = [&](std::size_t idx, std::size_t r, std::size_t c) {
        return items[idx].value.rows() == r && items[idx].value.cols() == c;
    };
    if (!shape_is(query_idx_, d, 1) || !shape_is(att_weight_idx_, 1, 2 * d) || !shape_is(att_bias_idx_, 1, 1) ||
        !shape_is(classifier_idx_, config_.n_genres, d)) {
        throw Error(ErrorCode::ShapeError, "attention or classifier parameters have inconsistent shape");
    }
}

Vector MattModel::encode_segment(std::span<const double> features) const {
    if (features.size() != config_.encoder.input_dim) {
        throw Error(ErrorCode::ShapeError, "feature length " + std::to_string(features.size()) +
                                               " != encoder input_dim " + std::to_string(config_.encoder.input_dim));
    }
    const auto& items = params_.items();
    Vector h(features.begin(), features.end());
    for (std::size_t l = 0; l < n_layers(); ++l) {
        h = affine(items[weight_idx_[l]].value, h, items[bias_idx_[l]].value.data());
        if (l + 1 < n_layers()) h = tanh_forward(h);
    }
    return h;
}

Vector MattModel::attention_weights(const std::vector<Vector>& embeddings) const {
    if (embeddings.empty()) throw Error(ErrorCode::EmptyBag, "bag has no members");
    const std::size_t m = embeddings.size();
    if (config_.aggregator == Aggregator::Mean) {
        return Vector(m, 1.0 / static_cast<double>(m));
    }
    const auto& items = params_.items();
    const auto w = items[att_weight_idx_].value.row(0);
    const auto q = items[query_idx_].value.data();
    Vector tanh_part(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (embeddings[k].size() != embedding_dim()) {
            throw Error(ErrorCode::ShapeError, "embedding length mismatch");
        }
        tanh_part[k] = std::tanh(dot(w, vconcat(embeddings[k], q)));
    }
    // b_s shifts every logit equally, so it drops out of the softmax
    return softmax(tanh_part);
}

Vector MattModel::bag_representation(std::span<const double> weights, const std::vector<Vector>& embeddings) {
    return weighted_sum(weights, embeddings);
}

std::pair<Vector, Vector> MattModel::genre_scores(std::span<const double> bag_repr) const {
    const auto& m = params_.items()[classifier_idx_].value;
    const Vector zero_bias(m.rows(), 0.0);
    Vector scores = affine(m, bag_repr, zero_bias);
    Vector probs = softmax(scores);
    return {std::move(scores), std::move(probs)};
}

BagPrediction MattModel::forward_bag(const BagFeatures& bag) const { return trace(bag).prediction; }

BagPrediction MattModel::predict_segment(std::span<const double> features) const {
    return forward_bag(BagFeatures{Vector(features.begin(), features.end())});
}

ForwardTrace MattModel::trace(const BagFeatures& bag) const {
    if (bag.empty()) throw Error(ErrorCode::EmptyBag, "bag has no members");
    const auto& items = params_.items();
    const std::size_t m = bag.size();
    ForwardTrace t;
    t.activations.resize(m);
    std::vector<Vector> embeddings(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (bag[k].size() != config_.encoder.input_dim) {
            throw Error(ErrorCode::ShapeError, "bag member feature length mismatch");
        }
        auto& acts = t.activations[k];
        acts.push_back(bag[k]);
        for (std::size_t l = 0; l < n_layers(); ++l) {
            Vector h = affine(items[weight_idx_[l]].value, acts.back(), items[bias_idx_[l]].value.data());
            if (l + 1 < n_layers()) h = tanh_forward(h);
            acts.push_back(std::move(h));
        }
        embeddings[k] = acts.back();
    }

    auto& pred = t.prediction;
    if (config_.aggregator == Aggregator::Matt) {
        const auto w = items[att_weight_idx_].value.row(0);
        const auto q = items[query_idx_].value.data();
        const double b = items[att_bias_idx_].value[0];
        t.attention_pre.resize(m);
        t.attention_tanh.resize(m);
        t.attention_logits.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            t.attention_pre[k] = dot(w, vconcat(embeddings[k], q));
            t.attention_tanh[k] = std::tanh(t.attention_pre[k]);
            t.attention_logits[k] = t.attention_tanh[k] + b;
        }
        // same weights as softmax(attention_logits), without rounding from the shared shift
        pred.attention_weights = softmax(t.attention_tanh);
    } else {
        pred.attention_weights.assign(m, 1.0 / static_cast<double>(m));
    }
    pred.bag_representation = weighted_sum(pred.attention_weights, embeddings);
    auto [scores, probs] = genre_scores(pred.bag_representation);
    pred.scores = std::move(scores);
    pred.probabilities = std::move(probs);
    return t;
}

void MattModel::backward(const ForwardTrace& t, std::span<const double> dscores) {
    auto& items = params_.items();
    const std::size_t m = t.activations.size();
    const std::size_t d = embedding_dim();
    const auto& pred = t.prediction;
    if (dscores.size() != n_genres()) throw Error(ErrorCode::ShapeError, "score gradient length mismatch");

    // o = M g
    Vector dg(d, 0.0);
    {
        auto& cls = items[classifier_idx_];
        Vector unused_bias(n_genres(), 0.0);
        affine_backward(cls.value, pred.bag_representation, dscores, cls.grad, unused_bias, dg);
    }

    std::vector<Vector> embeddings(m);
    for (std::size_t k = 0; k < m; ++k) embeddings[k] = t.activations[k].back();
    std::vector<Vector> dembed(m, Vector(d, 0.0));
    Vector dweights(m, 0.0);
    weighted_sum_backward(pred.attention_weights, embeddings, dg, dweights, dembed);

    if (config_.aggregator == Aggregator::Matt) {
        Vector dlogits(m, 0.0);
        softmax_backward(pred.attention_weights, dweights, dlogits);
        auto& att_w = items[att_weight_idx_];
        auto& att_b = items[att_bias_idx_];
        auto& query = items[query_idx_];
        const auto q = query.value.data();
        for (std::size_t k = 0; k < m; ++k) {
            att_b.grad[0] += dlogits[k];
            const double tk = t.attention_tanh[k];
            const double dpre = dlogits[k] * (1.0 - tk * tk);
            const Vector joined = vconcat(embeddings[k], q);
            auto gw = att_w.grad.row(0);
            const auto w = att_w.value.row(0);
            Vector djoined(2 * d);
            for (std::size_t i = 0; i < 2 * d; ++i) {
                gw[i] += dpre * joined[i];
                djoined[i] = dpre * w[i];
            }
            vconcat_backward(djoined, dembed[k], query.grad.data());
        }
    }

    for (std::size_t k = 0; k < m; ++k) {
        Vector dh = std::move(dembed[k]);
        const auto& acts = t.activations[k];
        for (std::size_t l = n_layers(); l-- > 0;) {
            if (l + 1 < n_layers()) {
                Vector dz(dh.size(), 0.0);
                tanh_backward(acts[l + 1], dh, dz);
                dh = std::move(dz);
            }
            auto& weight = items[weight_idx_[l]];
            auto& bias = items[bias_idx_[l]];
            Vector dx(l > 0 ? acts[l].size() : 0, 0.0);
            affine_backward(weight.value, acts[l], dh, weight.grad, bias.grad.data(), dx);
            dh = std::move(dx);
        }
    }
}

}  // namespace matt
