#pragma once

#include <cstdint>
#include <string>

#include "matt/dataset.hpp"
#include "matt/feature_table.hpp"
#include "matt/numeric.hpp"

namespace matt {

/// Seeded long-tail bag generator.
///
/// Genre g (rank 1 = head) receives round(head_count * g^-zipf_exponent / mean
/// bag size) training bags, so head_count is the head genre's expected number
/// of training segments. Validation and test splits get
/// max(eval_min_bags, round(eval_fraction * train bags)) bags per genre.
/// Centroids are orthogonal with pairwise distance exactly
/// centroid_separation; a segment is its genre centroid plus N(0, I) noise,
/// or with probability noise_rate a pure N(0, I) background sample.
struct SynthConfig {
    std::size_t n_genres = 16;
    double zipf_exponent = 1.2;
    std::size_t head_count = 400;
    std::size_t bag_size_min = 3;
    std::size_t bag_size_max = 10;
    std::size_t feature_dim = 32;
    double centroid_separation = 6.0;
    double noise_rate = 0.4;
    double eval_fraction = 0.2;
    std::size_t eval_min_bags = 30;
    std::uint64_t seed = 0;
};

/// Exact genre posterior under the generative model, with the training bag
/// distribution as prior.
class BayesOracle {
public:
    BayesOracle() = default;
    BayesOracle(Matrix centroids, Vector log_prior, double noise_rate);

    Vector posterior(const BagFeatures& bag) const;

    const Matrix& centroids() const noexcept { return centroids_; }
    const Vector& log_prior() const noexcept { return log_prior_; }
    double noise_rate() const noexcept { return noise_rate_; }

    /// `noise_rate,<v>` line, `log_prior,<G values>` line, then one
    /// `centroid_<g>,<d values>` line per genre.
    std::string to_text() const;
    static BayesOracle parse(const std::string& text);

private:
    double member_log_likelihood(std::span<const double> x, std::size_t genre) const;

    Matrix centroids_;
    Vector log_prior_;
    double noise_rate_ = 0.0;
};

struct SyntheticCorpus {
    Metadata metadata;
    BagSet bags;
    FeatureTable features;
    BayesOracle oracle;
    /// Expected training segments per genre before sampling (for reporting).
    std::vector<std::size_t> train_bags_per_genre;
};

SyntheticCorpus generate_synthetic(const SynthConfig& config);

void validate(const SynthConfig& config);

}  // namespace matt
