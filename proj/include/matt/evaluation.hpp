#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matt/dataset.hpp"
#include "matt/feature_table.hpp"
#include "matt/model.hpp"

namespace matt {

enum class EvalMode { Bag, Segment };

EvalMode parse_eval_mode(std::string_view name);
std::string_view to_string(EvalMode mode);

/// Highest probability, lowest genre id on ties.
std::size_t predicted_genre(std::span<const double> probabilities);

/// Zero-based rank of `genre` under (probability desc, genre id asc).
std::size_t genre_rank(std::span<const double> probabilities, std::size_t genre);

/// Genre ids ordered by (probability desc, genre id asc), first k of them.
std::vector<std::size_t> top_genres(std::span<const double> probabilities, std::size_t k);

/// Throws EmptyEval on empty input.
double accuracy(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds);

/// Fraction of units whose gold genre is among the k best. Micro average:
/// every unit counts once. Throws InvalidK unless 1 <= k <= G.
double top_k_accuracy(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds, std::size_t k);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct PrCurve {
    /// Ordered by descending threshold (ascending recall).
    std::vector<PrPoint> points;
    double average_precision = 0.0;
};

/// Micro-averaged one-vs-rest curve over all (unit, genre) pairs.
PrCurve pr_curve(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds);

struct TopKEntry {
    std::size_t max_train_count = 0;
    std::size_t k = 0;
    double accuracy = 0.0;
    std::size_t units = 0;
};

struct EvalReport {
    EvalMode mode = EvalMode::Bag;
    std::size_t units = 0;
    double overall_accuracy = 0.0;
    std::vector<TopKEntry> top_k;
    PrCurve pr;

    const TopKEntry* find(std::size_t max_train_count, std::size_t k) const;
};

struct EvalOptions {
    EvalMode mode = EvalMode::Bag;
    std::vector<std::size_t> subsets{100, 200};
    std::vector<std::size_t> ks{2, 3, 5};
};

/// Evaluation units with their predicted distributions.
struct ScoredUnits {
    std::vector<std::string> ids;
    std::vector<Vector> probabilities;
    std::vector<std::size_t> golds;
    std::vector<Vector> attention;
};

/// Scores test-split units. Bag mode: one prediction per test bag. Segment
/// mode: one per test segment via segment-level inference, gold from the
/// segment's own record.
ScoredUnits score_units(const MattModel& model, const BagSet& bags, const SegmentTable& table,
                        const FeatureTable& features, EvalMode mode);

using BagScorer = std::function<BagPrediction(const BagFeatures&)>;

/// As above with an arbitrary bag scorer (e.g. a Bayes oracle).
ScoredUnits score_units(const BagScorer& scorer, const BagSet& bags, const SegmentTable& table,
                        const FeatureTable& features, EvalMode mode);

EvalReport build_report(const ScoredUnits& units, const GenreVocabulary& vocabulary, const EvalOptions& options);

EvalReport evaluate(const MattModel& model, const BagSet& bags, const SegmentTable& table,
                    const FeatureTable& features, const EvalOptions& options);

std::string format_report_text(const EvalReport& report);
/// `subset,K,accuracy`
std::string format_topk_csv(const EvalReport& report);
/// `threshold,precision,recall`
std::string format_pr_csv(const EvalReport& report);

}  // namespace matt
