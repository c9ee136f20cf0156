#include "matt/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "matt/error.hpp"

namespace matt {
namespace {

void check_inputs(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds) {
    if (predictions.empty()) throw Error(ErrorCode::EmptyEval, "no evaluation units");
    if (predictions.size() != golds.size()) {
        throw Error(ErrorCode::ShapeError, "prediction and gold counts differ");
    }
}

}  // namespace

EvalMode parse_eval_mode(std::string_view name) {
    if (name == "bag") return EvalMode::Bag;
    if (name == "segment") return EvalMode::Segment;
    throw Error(ErrorCode::InvalidConfig, "unknown evaluation mode '" + std::string(name) + "' (expected bag|segment)");
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::Bag ? "bag" : "segment"; }

std::size_t predicted_genre(std::span<const double> probabilities) {
    return static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) -
                                    probabilities.begin());
}

std::size_t genre_rank(std::span<const double> probabilities, std::size_t genre) {
    const double p = probabilities[genre];
    std::size_t rank = 0;
    for (std::size_t g = 0; g < probabilities.size(); ++g) {
        if (probabilities[g] > p || (probabilities[g] == p && g < genre)) ++rank;
    }
    return rank;
}

std::vector<std::size_t> top_genres(std::span<const double> probabilities, std::size_t k) {
    std::vector<std::size_t> ids(probabilities.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });
    ids.resize(std::min(k, ids.size()));
    return ids;
}

double accuracy(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds) {
    check_inputs(predictions, golds);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predicted_genre(predictions[i]) == golds[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double top_k_accuracy(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds, std::size_t k) {
    check_inputs(predictions, golds);
    const std::size_t G = predictions.front().size();
    if (k < 1 || k > G) {
        throw Error(ErrorCode::InvalidK, fmt::format("K = {} outside [1, {}]", k, G));
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (genre_rank(predictions[i], golds[i]) < k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

PrCurve pr_curve(const std::vector<Vector>& predictions, const std::vector<std::size_t>& golds) {
    check_inputs(predictions, golds);
    struct Pair {
        double score;
        bool positive;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (std::size_t g = 0; g < predictions[i].size(); ++g) {
            pairs.push_back({predictions[i][g], g == golds[i]});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.score > b.score; });
    const auto total_positive = static_cast<double>(predictions.size());

    PrCurve curve;
    std::size_t tp = 0;
    std::size_t seen = 0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pairs.size();) {
        const double threshold = pairs[i].score;
        while (i < pairs.size() && pairs[i].score == threshold) {
            tp += pairs[i].positive ? 1 : 0;
            ++seen;
            ++i;
        }
        PrPoint pt;
        pt.threshold = threshold;
        pt.precision = static_cast<double>(tp) / static_cast<double>(seen);
        pt.recall = static_cast<double>(tp) / total_positive;
        curve.average_precision += (pt.recall - prev_recall) * pt.precision;
        prev_recall = pt.recall;
        curve.points.push_back(pt);
    }
    return curve;
}

const TopKEntry* EvalReport::find(std::size_t max_train_count, std::size_t k) const {
    for (const auto& e : top_k) {
        if (e.max_train_count == max_train_count && e.k == k) return &e;
    }
    return nullptr;
}

ScoredUnits score_units(const BagScorer& scorer, const BagSet& bags, const SegmentTable& table,
                        const FeatureTable& features, EvalMode mode) {
    ScoredUnits out;
    const auto add = [&](std::string id, const BagFeatures& members, std::size_t gold) {
        auto pred = scorer(members);
        out.ids.push_back(std::move(id));
        out.probabilities.push_back(std::move(pred.probabilities));
        out.attention.push_back(std::move(pred.attention_weights));
        out.golds.push_back(gold);
    };
    for (const auto& bag : bags.bags) {
        if (bag.key.split != Split::Test) continue;
        if (mode == EvalMode::Bag) {
            std::string id;
            for (const auto& s : bag.segment_ids) id += (id.empty() ? "" : ";") + s;
            add(std::move(id), gather_features(bag, features), bag.genre_id);
        } else {
            for (const auto& s : bag.segment_ids) {
                add(s, BagFeatures{features.vector_at(s)}, table.at(s).genre_id);
            }
        }
    }
    return out;
}

ScoredUnits score_units(const MattModel& model, const BagSet& bags, const SegmentTable& table,
                        const FeatureTable& features, EvalMode mode) {
    return score_units([&](const BagFeatures& members) { return model.forward_bag(members); }, bags, table,
                       features, mode);
}

EvalReport build_report(const ScoredUnits& units, const GenreVocabulary& vocabulary, const EvalOptions& options) {
    EvalReport report;
    report.mode = options.mode;
    report.units = units.probabilities.size();
    report.overall_accuracy = accuracy(units.probabilities, units.golds);
    report.pr = pr_curve(units.probabilities, units.golds);
    for (const auto threshold : options.subsets) {
        std::vector<Vector> preds;
        std::vector<std::size_t> golds;
        for (std::size_t i = 0; i < units.golds.size(); ++i) {
            if (vocabulary.train_counts.at(units.golds[i]) < threshold) {
                preds.push_back(units.probabilities[i]);
                golds.push_back(units.golds[i]);
            }
        }
        for (const auto k : options.ks) {
            TopKEntry entry{threshold, k, 0.0, preds.size()};
            if (k < 1 || k > vocabulary.size()) {
                throw Error(ErrorCode::InvalidK, fmt::format("K = {} outside [1, {}]", k, vocabulary.size()));
            }
            if (!preds.empty()) entry.accuracy = top_k_accuracy(preds, golds, k);
            report.top_k.push_back(entry);
        }
    }
    return report;
}

EvalReport evaluate(const MattModel& model, const BagSet& bags, const SegmentTable& table,
                    const FeatureTable& features, const EvalOptions& options) {
    return build_report(score_units(model, bags, table, features, options.mode), bags.vocabulary, options);
}

std::string format_report_text(const EvalReport& report) {
    std::string out = fmt::format("mode: {}\nunits: {}\naccuracy: {:.6f}\naverage_precision: {:.6f}\n",
                                  to_string(report.mode), report.units, report.overall_accuracy,
                                  report.pr.average_precision);
    out += "top@k on long-tail subsets (genres with fewer than N training segments):\n";
    for (const auto& e : report.top_k) {
        out += fmt::format("  <{:<5} K={}  {:.6f}  (n={})\n", e.max_train_count, e.k, e.accuracy, e.units);
    }
    return out;
}

std::string format_topk_csv(const EvalReport& report) {
    std::string out = "subset,K,accuracy\n";
    for (const auto& e : report.top_k) {
        out += fmt::format("<{},{},{:.9g}\n", e.max_train_count, e.k, e.accuracy);
    }
    return out;
}

std::string format_pr_csv(const EvalReport& report) {
    std::string out = "threshold,precision,recall\n";
    for (const auto& p : report.pr.points) {
        out += fmt::format("{:.17g},{:.17g},{:.17g}\n", p.threshold, p.precision, p.recall);
    }
    return out;
}

}  // namespace matt
