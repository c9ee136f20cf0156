#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "matt/numeric.hpp"

namespace matt {

/// How bag members are pooled into one bag representation.
enum class Aggregator {
    Matt,  ///< learned query attention
    Mean,  ///< uniform weights 1/m (plain multi-instance pooling)
};

Aggregator parse_aggregator(std::string_view name);
std::string_view to_string(Aggregator aggregator);

struct EncoderConfig {
    std::size_t input_dim = 0;
    /// Empty means a single affine layer (logistic-regression equivalent head).
    std::vector<std::size_t> hidden_dims;
    std::size_t output_dim = 32;
};

struct ModelConfig {
    EncoderConfig encoder;
    std::size_t n_genres = 0;
    Aggregator aggregator = Aggregator::Matt;
};

/// One bag's member feature vectors, in canonical (sorted track id) order.
using BagFeatures = std::vector<Vector>;

struct BagPrediction {
    Vector probabilities;
    Vector attention_weights;
    Vector bag_representation;
    Vector scores;
};

/// Intermediate values of one forward pass, kept for the backward pass.
struct ForwardTrace {
    /// activations[k][l] is the input of encoder layer l for member k; the
    /// last entry is the embedding s_k.
    std::vector<std::vector<Vector>> activations;
    Vector attention_pre;  ///< W_s [s_k; q_g] before tanh
    Vector attention_tanh;
    Vector attention_logits;  ///< e_k
    BagPrediction prediction;
};

/// Segment encoder plus attention pooling and the genre scoring matrix.
///
/// Parameters, in store order:
///   encoder.<l>.weight / encoder.<l>.bias for each affine layer,
///   attention.query (d x 1), attention.weight (1 x 2d), attention.bias (1 x 1),
///   classifier.weight (G x d).
class MattModel {
public:
    /// Xavier-uniform weights and zero biases, deterministic per seed.
    MattModel(ModelConfig config, std::uint64_t seed);

    /// Rebuilds a model from stored parameters; architecture is read off the
    /// parameter shapes.
    static MattModel from_params(ParamStore params, Aggregator aggregator);

    const ModelConfig& config() const noexcept { return config_; }
    ParamStore& params() noexcept { return params_; }
    const ParamStore& params() const noexcept { return params_; }

    std::size_t embedding_dim() const noexcept { return config_.encoder.output_dim; }
    std::size_t n_genres() const noexcept { return config_.n_genres; }

    Vector encode_segment(std::span<const double> features) const;
    Vector attention_weights(const std::vector<Vector>& embeddings) const;
    static Vector bag_representation(std::span<const double> weights, const std::vector<Vector>& embeddings);
    /// Returns (scores o = M g, softmax(o)).
    std::pair<Vector, Vector> genre_scores(std::span<const double> bag_repr) const;

    BagPrediction forward_bag(const BagFeatures& bag) const;
    /// Segment-level inference: the single segment forms its own bag.
    BagPrediction predict_segment(std::span<const double> features) const;

    ForwardTrace trace(const BagFeatures& bag) const;
    /// Accumulates parameter gradients for d(loss)/d(scores) = dscores.
    void backward(const ForwardTrace& trace, std::span<const double> dscores);

private:
    MattModel(ModelConfig config, ParamStore params);

    std::size_t n_layers() const noexcept { return config_.encoder.hidden_dims.size() + 1; }
    void resolve_params();

    ModelConfig config_;
    ParamStore params_;
    // Indices into params_.items(), resolved once.
    std::vector<std::size_t> weight_idx_;
    std::vector<std::size_t> bias_idx_;
    std::size_t query_idx_ = 0;
    std::size_t att_weight_idx_ = 0;
    std::size_t att_bias_idx_ = 0;
    std::size_t classifier_idx_ = 0;
};

}  // namespace matt
