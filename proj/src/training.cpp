#include "matt/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "matt/error.hpp"

namespace matt {
namespace {

struct PreparedBags {
    std::vector<BagFeatures> features;
    std::vector<std::size_t> golds;
};

PreparedBags prepare(const BagSet& bags, const FeatureTable& features, std::size_t input_dim) {
    PreparedBags out;
    for (const auto& bag : bags.bags) {
        auto f = gather_features(bag, features);
        for (const auto& x : f) {
            if (x.size() != input_dim) {
                throw Error(ErrorCode::ShapeError, "cached feature length " + std::to_string(x.size()) +
                                                       " != encoder input_dim " + std::to_string(input_dim));
            }
        }
        out.features.push_back(std::move(f));
        out.golds.push_back(bag.genre_id);
    }
    return out;
}

std::size_t argmax(std::span<const double> p) {
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double bag_accuracy(const MattModel& model, const PreparedBags& bags) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < bags.features.size(); ++i) {
        if (argmax(model.forward_bag(bags.features[i]).probabilities) == bags.golds[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(bags.features.size());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.9g}", v);
}

}  // namespace

std::string TrainLog::to_csv() const {
    std::string out = "epoch,loss,val_accuracy,seconds\n";
    for (const auto& e : epochs) {
        out += fmt::format("{},{},{},{}\n", e.epoch, format_number(e.loss), format_number(e.val_accuracy),
                           format_number(e.seconds));
    }
    return out;
}

LossResult nll_loss(const BagPrediction& prediction, std::size_t gold) {
    const auto& p = prediction.probabilities;
    if (gold >= p.size()) throw Error(ErrorCode::ShapeError, "gold genre out of range");
    LossResult r;
    r.loss = -std::log(std::max(p[gold], 1e-300));
    r.dscores = p;
    r.dscores[gold] -= 1.0;
    return r;
}

double accumulate_batch(MattModel& model, const std::vector<BagFeatures>& bags, const std::vector<std::size_t>& golds,
                        const std::vector<double>& weights) {
    if (bags.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(bags.size());
    double total = 0.0;
    for (std::size_t i = 0; i < bags.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        const auto trace = model.trace(bags[i]);
        auto loss = nll_loss(trace.prediction, golds[i]);
        if (!std::isfinite(loss.loss)) throw Error(ErrorCode::DivergedError, "non-finite training loss");
        for (auto& g : loss.dscores) g *= w * scale;
        model.backward(trace, loss.dscores);
        total += w * loss.loss;
    }
    return total * scale;
}

double batch_loss(const MattModel& model, const std::vector<BagFeatures>& bags, const std::vector<std::size_t>& golds,
                  const std::vector<double>& weights) {
    if (bags.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < bags.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        total += w * nll_loss(model.forward_bag(bags[i]), golds[i]).loss;
    }
    return total / static_cast<double>(bags.size());
}

TrainResult train(const BagSet& bags, const FeatureTable& features, const ModelConfig& model_config,
                  const TrainConfig& config) {
    if (config.bags_per_batch == 0) throw Error(ErrorCode::InvalidConfig, "bags_per_batch must be positive");
    if (model_config.n_genres != bags.vocabulary.size()) {
        throw Error(ErrorCode::InvalidConfig, "model genre count != vocabulary size");
    }
    MattModel model(model_config, derive_seed(config.seed, 1));
    const auto train_set = prepare(bags.with_split(Split::Train), features, model_config.encoder.input_dim);
    const auto val_set = prepare(bags.with_split(Split::Validation), features, model_config.encoder.input_dim);

    std::vector<double> class_weight;
    if (config.class_weighting) {
        std::vector<std::size_t> counts(model_config.n_genres, 0);
        for (auto g : train_set.golds) ++counts[g];
        const double n = static_cast<double>(train_set.golds.size());
        for (auto c : counts) {
            class_weight.push_back(c == 0 ? 0.0 : n / (static_cast<double>(model_config.n_genres) * c));
        }
    }

    TrainResult result{model, {}};
    Optimizer optimizer(config.optimizer);
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, 2));
    std::vector<std::size_t> order(train_set.features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double best_val = -1.0;
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs && !order.empty(); ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.bags_per_batch) {
            const std::size_t end = std::min(order.size(), begin + config.bags_per_batch);
            std::vector<BagFeatures> batch;
            std::vector<std::size_t> golds;
            std::vector<double> weights;
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(train_set.features[order[i]]);
                golds.push_back(train_set.golds[order[i]]);
                if (!class_weight.empty()) weights.push_back(class_weight[golds.back()]);
            }
            const double loss = accumulate_batch(model, batch, golds, weights);
            loss_sum += loss * static_cast<double>(end - begin);
            optimizer.step(model.params());
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.loss = loss_sum / static_cast<double>(order.size());
        entry.val_accuracy = val_set.features.empty() ? NAN : bag_accuracy(model, val_set);
        if (config.record_wall_time) {
            entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        result.log.epochs.push_back(entry);
        spdlog::debug("epoch {} loss {:.6f} val_acc {:.4f}", epoch, entry.loss, entry.val_accuracy);

        if (val_set.features.empty()) {
            result.model = model;
            result.log.best_epoch = epoch;
            continue;
        }
        if (entry.val_accuracy > best_val) {
            best_val = entry.val_accuracy;
            since_best = 0;
            result.model = model;
            result.log.best_epoch = epoch;
        } else if (config.early_stop_patience > 0 && ++since_best >= config.early_stop_patience) {
            spdlog::info("early stop after epoch {} (best epoch {})", epoch, result.log.best_epoch);
            break;
        }
    }
    result.model.params().zero_grad();
    return result;
}

TrainResult train_segment_baseline(const SegmentTable& table, const GenreVocabulary& vocabulary,
                                   const FeatureTable& features, const ModelConfig& model_config,
                                   const TrainConfig& config) {
    return train(singleton_bags(table, vocabulary), features, model_config, config);
}

}  // namespace matt
