#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matt/evaluation.hpp"
#include "matt/synthetic.hpp"
#include "matt/training.hpp"

namespace matt {

/// One seeded run of the synthetic long-tail comparison: a bag-trained model,
/// a segment-trained baseline and the Bayes oracle on the same corpus.
struct BenchmarkSettings {
    SynthConfig synth;
    std::vector<std::size_t> hidden_dims{64};
    std::size_t output_dim = 32;
    Aggregator aggregator = Aggregator::Matt;
    TrainConfig matt_train;
    TrainConfig baseline_train;
    std::vector<std::size_t> baseline_hidden_dims{64};
    std::size_t tail_threshold = 100;
    std::size_t k = 2;
};

BenchmarkSettings default_benchmark_settings();

struct BenchmarkRun {
    std::uint64_t seed = 0;
    double matt_tail_topk = 0.0;      ///< bag-level evaluation
    double baseline_tail_topk = 0.0;  ///< segment-level evaluation
    double oracle_tail_topk = 0.0;    ///< bag-level evaluation
    double matt_bag_accuracy = 0.0;
    double matt_segment_accuracy = 0.0;
    double baseline_segment_accuracy = 0.0;
    std::size_t tail_bags = 0;
    std::size_t tail_segments = 0;
    std::string matt_checkpoint;
    std::string baseline_checkpoint;
    std::string matt_report;
    std::string matt_segment_report;
    std::string baseline_report;
    std::string matt_log;
    std::string baseline_log;
};

/// Every random stream is derived from `seed`.
BenchmarkRun run_benchmark(const BenchmarkSettings& settings, std::uint64_t seed);

/// Table of per-seed results plus the mean row.
std::string format_benchmark(const std::vector<BenchmarkRun>& runs, const BenchmarkSettings& settings);

}  // namespace matt
