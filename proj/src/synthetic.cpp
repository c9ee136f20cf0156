#include "matt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "matt/error.hpp"
#include "text_util.hpp"

namespace matt {
namespace {

Matrix orthonormal_rows(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix basis(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = basis.row(i);
        // Redraw in the (measure-zero) event of a degenerate direction.
        while (true) {
            for (auto& v : row) v = normal(rng);
            for (std::size_t j = 0; j < i; ++j) {
                const double proj = dot(row, basis.row(j));
                const auto prev = basis.row(j);
                for (std::size_t c = 0; c < dim; ++c) row[c] -= proj * prev[c];
            }
            const double norm = std::sqrt(dot(row, row));
            if (norm > 1e-6) {
                for (auto& v : row) v /= norm;
                break;
            }
        }
    }
    return basis;
}

double log_add(double a, double b) {
    const double hi = std::max(a, b);
    if (hi == -INFINITY) return hi;
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

}  // namespace

void validate(const SynthConfig& c) {
    if (c.n_genres == 0 || c.head_count == 0 || c.feature_dim == 0 || c.bag_size_min == 0) {
        throw Error(ErrorCode::InvalidConfig, "synthetic counts must be positive");
    }
    if (c.bag_size_min > c.bag_size_max) {
        throw Error(ErrorCode::InvalidConfig, "bag_size_min exceeds bag_size_max");
    }
    if (!(c.noise_rate >= 0.0 && c.noise_rate < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "noise_rate must lie in [0, 1)");
    }
    if (!(c.zipf_exponent >= 0.0) || !(c.eval_fraction >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "zipf_exponent and eval_fraction must be non-negative");
    }
    if (!(c.centroid_separation > 0.0) || !std::isfinite(c.centroid_separation)) {
        throw Error(ErrorCode::InvalidConfig, "centroid_separation must be positive");
    }
    if (c.n_genres > c.feature_dim) {
        throw Error(ErrorCode::InfeasibleConfig,
                    fmt::format("{} mutually orthogonal centroids do not fit in {} dimensions", c.n_genres,
                                c.feature_dim));
    }
}

BayesOracle::BayesOracle(Matrix centroids, Vector log_prior, double noise_rate)
    : centroids_(std::move(centroids)), log_prior_(std::move(log_prior)), noise_rate_(noise_rate) {
    if (centroids_.rows() != log_prior_.size()) {
        throw Error(ErrorCode::ShapeError, "oracle prior length != number of centroids");
    }
}

double BayesOracle::member_log_likelihood(std::span<const double> x, std::size_t genre) const {
    const auto mu = centroids_.row(genre);
    double dist2 = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - mu[i];
        dist2 += diff * diff;
        norm2 += x[i] * x[i];
    }
    const double signal = std::log1p(-noise_rate_) - 0.5 * dist2;
    if (noise_rate_ == 0.0) return signal;
    return log_add(signal, std::log(noise_rate_) - 0.5 * norm2);
}

Vector BayesOracle::posterior(const BagFeatures& bag) const {
    if (bag.empty()) throw Error(ErrorCode::EmptyBag, "oracle posterior of an empty bag");
    Vector logp(log_prior_);
    for (const auto& x : bag) {
        if (x.size() != centroids_.cols()) throw Error(ErrorCode::ShapeError, "oracle feature length mismatch");
        for (std::size_t g = 0; g < logp.size(); ++g) logp[g] += member_log_likelihood(x, g);
    }
    return softmax(logp);
}

std::string BayesOracle::to_text() const {
    std::string out = fmt::format("noise_rate,{:.17g}\nlog_prior", noise_rate_);
    for (double v : log_prior_) out += fmt::format(",{:.17g}", v);
    out += '\n';
    for (std::size_t g = 0; g < centroids_.rows(); ++g) {
        out += fmt::format("centroid_{}", g);
        for (double v : centroids_.row(g)) out += fmt::format(",{:.17g}", v);
        out += '\n';
    }
    return out;
}

BayesOracle BayesOracle::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    double noise = 0.0;
    Vector prior;
    std::vector<double> flat;
    std::size_t rows = 0;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        std::vector<double> values;
        for (std::size_t i = 1; i < f.size(); ++i) values.push_back(std::stod(f[i]));
        if (f[0] == "noise_rate" && values.size() == 1) {
            noise = values[0];
        } else if (f[0] == "log_prior") {
            prior = values;
        } else if (f[0].rfind("centroid_", 0) == 0) {
            if (rows == 0) cols = values.size();
            if (values.size() != cols) throw Error(ErrorCode::FormatError, "ragged oracle centroids");
            flat.insert(flat.end(), values.begin(), values.end());
            ++rows;
        } else {
            throw Error(ErrorCode::FormatError, "unrecognised oracle line '" + f[0] + "'");
        }
    }
    return BayesOracle(Matrix(rows, cols, std::move(flat)), std::move(prior), noise);
}

SyntheticCorpus generate_synthetic(const SynthConfig& config) {
    validate(config);
    std::mt19937_64 rng(config.seed);
    const std::size_t G = config.n_genres;
    const std::size_t dim = config.feature_dim;

    Matrix centroids = orthonormal_rows(G, dim, rng);
    const double radius = config.centroid_separation / std::sqrt(2.0);
    for (auto& v : centroids.data()) v *= radius;

    SyntheticCorpus corpus;
    const double mean_size = 0.5 * static_cast<double>(config.bag_size_min + config.bag_size_max);
    for (std::size_t g = 0; g < G; ++g) {
        const double expected_segments =
            static_cast<double>(config.head_count) * std::pow(static_cast<double>(g + 1), -config.zipf_exponent);
        corpus.train_bags_per_genre.push_back(
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(expected_segments / mean_size))));
    }

    double prior_total = 0.0;
    for (auto n : corpus.train_bags_per_genre) prior_total += static_cast<double>(n);
    Vector log_prior(G);
    for (std::size_t g = 0; g < G; ++g) {
        log_prior[g] = std::log(static_cast<double>(corpus.train_bags_per_genre[g]) / prior_total);
    }

    std::vector<std::string> columns;
    for (std::size_t i = 0; i < dim; ++i) columns.push_back(fmt::format("synth_raw_{}", i));
    corpus.features = FeatureTable(std::move(columns));

    auto& meta = corpus.metadata;
    for (std::size_t g = 0; g < G; ++g) meta.vocabulary.names.push_back(fmt::format("genre_{:02d}", g + 1));

    std::uniform_int_distribution<std::size_t> bag_size(config.bag_size_min, config.bag_size_max);
    std::bernoulli_distribution is_background(config.noise_rate);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t bag_counter = 0;
    std::size_t track_counter = 0;

    for (std::size_t g = 0; g < G; ++g) {
        const std::size_t train_bags = corpus.train_bags_per_genre[g];
        const auto eval_bags = std::max<std::size_t>(
            config.eval_min_bags,
            static_cast<std::size_t>(std::llround(config.eval_fraction * static_cast<double>(train_bags))));
        for (const auto& [split, count] : {std::pair{Split::Train, train_bags}, std::pair{Split::Validation, eval_bags},
                                          std::pair{Split::Test, eval_bags}}) {
            for (std::size_t b = 0; b < count; ++b) {
                const std::string artist = fmt::format("art{:05d}", bag_counter);
                const std::string album = fmt::format("alb{:05d}", bag_counter);
                ++bag_counter;
                const std::size_t size = bag_size(rng);
                for (std::size_t s = 0; s < size; ++s) {
                    const std::string track = fmt::format("trk{:06d}", track_counter++);
                    const bool background = is_background(rng);
                    std::vector<float> x(dim);
                    for (std::size_t i = 0; i < dim; ++i) {
                        const double mean = background ? 0.0 : centroids(g, i);
                        x[i] = static_cast<float>(mean + normal(rng));
                    }
                    corpus.features.insert(track, std::move(x));
                    meta.table.add(SegmentRecord{track, album, artist, g, split});
                }
            }
        }
    }
    recount_train(meta.vocabulary, meta.table);
    corpus.bags = build_bags(meta.table, meta.vocabulary, LabelPolicy::Strict);
    corpus.bags.provenance = fmt::format("synthetic long-tail corpus (seed {})", config.seed);
    corpus.oracle = BayesOracle(std::move(centroids), std::move(log_prior), config.noise_rate);
    return corpus;
}

}  // namespace matt
