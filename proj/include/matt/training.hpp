#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matt/dataset.hpp"
#include "matt/feature_table.hpp"
#include "matt/model.hpp"
#include "matt/numeric.hpp"

namespace matt {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t bags_per_batch = 32;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    /// Epochs without validation improvement before stopping; 0 disables.
    std::size_t early_stop_patience = 10;
    LabelPolicy label_policy = LabelPolicy::Majority;
    std::string feature_set = "1to9";
    /// Inverse-frequency bag weights. Off by default.
    bool class_weighting = false;
    /// Write measured seconds into the log; off keeps logs byte-reproducible.
    bool record_wall_time = false;
};

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;
    double val_accuracy = 0.0;  ///< NaN when there is no validation split
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    std::size_t best_epoch = 0;  ///< 0 = initial parameters retained

    /// `epoch,loss,val_accuracy,seconds`
    std::string to_csv() const;
};

struct LossResult {
    double loss = 0.0;
    Vector dscores;  ///< d loss / d scores = p - onehot(gold)
};

/// Negative log-likelihood of the gold genre; p_gold is floored at 1e-300.
LossResult nll_loss(const BagPrediction& prediction, std::size_t gold);

struct TrainResult {
    MattModel model;
    TrainLog log;
};

/// Trains on the train-split bags; validation-split bags drive best-checkpoint
/// selection and early stopping.
TrainResult train(const BagSet& bags, const FeatureTable& features, const ModelConfig& model_config,
                  const TrainConfig& config);

/// Every segment becomes a singleton bag; otherwise identical to train().
TrainResult train_segment_baseline(const SegmentTable& table, const GenreVocabulary& vocabulary,
                                   const FeatureTable& features, const ModelConfig& model_config,
                                   const TrainConfig& config);

/// Mean loss over bags, with gradients accumulated into the model (scaled by
/// 1/|bags|). Used by training and by gradient checking.
double accumulate_batch(MattModel& model, const std::vector<BagFeatures>& bags, const std::vector<std::size_t>& golds,
                        const std::vector<double>& weights = {});

/// Forward-only mean loss matching accumulate_batch.
double batch_loss(const MattModel& model, const std::vector<BagFeatures>& bags, const std::vector<std::size_t>& golds,
                  const std::vector<double>& weights = {});

}  // namespace matt
