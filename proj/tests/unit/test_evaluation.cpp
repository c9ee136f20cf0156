#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "matt/dataset.hpp"
#include "matt/evaluation.hpp"
#include "matt/feature_table.hpp"
#include "matt/model.hpp"

using namespace matt;

namespace {

std::vector<Vector> random_predictions(std::mt19937_64& rng, std::size_t n, std::size_t g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vector> out(n, Vector(g));
    for (auto& p : out) {
        double s = 0;
        for (auto& v : p) s += (v = u(rng));
        for (auto& v : p) v /= s;
    }
    return out;
}

// Brute-force AP: threshold at every distinct score, counting pairs >= t.
double brute_force_ap(const std::vector<Vector>& preds, const std::vector<std::size_t>& golds) {
    std::vector<double> scores;
    for (const auto& p : preds) scores.insert(scores.end(), p.begin(), p.end());
    std::sort(scores.begin(), scores.end(), std::greater<>());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
    double ap = 0;
    double prev_r = 0;
    for (double t : scores) {
        double tp = 0;
        double all = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            for (std::size_t g = 0; g < preds[i].size(); ++g) {
                if (preds[i][g] >= t) {
                    all += 1;
                    tp += g == golds[i] ? 1 : 0;
                }
            }
        }
        const double r = tp / static_cast<double>(preds.size());
        ap += (r - prev_r) * (tp / all);
        prev_r = r;
    }
    return ap;
}

}  // namespace

TEST_CASE("argmax and rank tie-breaks favour the lowest genre id") {
    const Vector p{0.3, 0.3, 0.4, 0.0};
    CHECK(predicted_genre(p) == 2);
    CHECK(predicted_genre(Vector{0.5, 0.5}) == 0);
    CHECK(genre_rank(p, 0) == 1);
    CHECK(genre_rank(p, 1) == 2);
    CHECK(top_genres(p, 3) == std::vector<std::size_t>{2, 0, 1});
}

TEST_CASE("accuracy") {
    CHECK(accuracy({{0.9, 0.1}, {0.2, 0.8}}, {0, 1}) == 1.0);
    CHECK(accuracy({{0.9, 0.1}, {0.2, 0.8}}, {1, 1}) == 0.5);
    CHECK_MATT_ERROR(accuracy({}, {}), ErrorCode::EmptyEval);
    CHECK_MATT_ERROR(accuracy({{1.0}}, {0, 0}), ErrorCode::ShapeError);
    std::mt19937_64 rng(1);
    const auto preds = random_predictions(rng, 20000, 2);
    std::vector<std::size_t> golds(20000);
    for (std::size_t i = 0; i < golds.size(); ++i) golds[i] = i % 2;
    CHECK(std::abs(accuracy(preds, golds) - 0.5) < 0.02);
}

TEST_CASE("top-k accuracy") {
    std::mt19937_64 rng(2);
    const auto preds = random_predictions(rng, 500, 6);
    std::vector<std::size_t> golds(500);
    for (std::size_t i = 0; i < golds.size(); ++i) golds[i] = (i * 7) % 6;
    CHECK(top_k_accuracy(preds, golds, 6) == 1.0);
    CHECK(top_k_accuracy(preds, golds, 1) == accuracy(preds, golds));
    double prev = 0;
    for (std::size_t k = 1; k <= 6; ++k) {
        const double a = top_k_accuracy(preds, golds, k);
        CHECK(a >= prev);
        // Random scores put the gold in the top k with probability k / G.
        CHECK(std::abs(a - static_cast<double>(k) / 6.0) < 0.08);
        prev = a;
    }
    CHECK_MATT_ERROR(top_k_accuracy(preds, golds, 0), ErrorCode::InvalidK);
    CHECK_MATT_ERROR(top_k_accuracy(preds, golds, 7), ErrorCode::InvalidK);
}

TEST_CASE("pr curve of a perfect classifier") {
    const std::vector<Vector> preds{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const auto curve = pr_curve(preds, {0, 1, 2});
    CHECK(curve.average_precision == doctest::Approx(1.0));
    CHECK(curve.points.front().precision == 1.0);
    CHECK(curve.points.front().recall == 1.0);
}

TEST_CASE("pr curve sweep properties and brute-force AP") {
    std::mt19937_64 rng(3);
    const auto preds = random_predictions(rng, 60, 4);
    std::vector<std::size_t> golds(60);
    for (std::size_t i = 0; i < golds.size(); ++i) golds[i] = i % 4;
    const auto curve = pr_curve(preds, golds);
    CHECK(curve.average_precision == doctest::Approx(brute_force_ap(preds, golds)).epsilon(1e-12));
    // First point: the single top-scored pair.
    std::size_t bi = 0;
    std::size_t bg = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t g = 0; g < 4; ++g) {
            if (preds[i][g] > preds[bi][bg]) {
                bi = i;
                bg = g;
            }
        }
    }
    CHECK(curve.points.front().precision == (bg == golds[bi] ? 1.0 : 0.0));
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].threshold < curve.points[i - 1].threshold);
        CHECK(curve.points[i].recall >= curve.points[i - 1].recall);
    }
    for (const auto& p : curve.points) {
        CHECK(p.precision >= 0.0);
        CHECK(p.precision <= 1.0);
    }
    CHECK(curve.points.back().recall == 1.0);
    CHECK(curve.points.back().precision == doctest::Approx(0.25));
}

TEST_CASE("uniform random scores give AP near 1/G") {
    std::mt19937_64 rng(4);
    const std::size_t G = 8;
    const auto preds = random_predictions(rng, 4000, G);
    std::vector<std::size_t> golds(4000);
    for (std::size_t i = 0; i < golds.size(); ++i) golds[i] = i % G;
    CHECK(std::abs(pr_curve(preds, golds).average_precision - 1.0 / G) < 0.01);
}

namespace {

struct EvalToy {
    Metadata meta;
    BagSet bags;
    FeatureTable features;
};

EvalToy eval_toy() {
    EvalToy t;
    std::istringstream in(
        "track_id,album_id,artist_id,genre,split\n"
        "a1,al1,ar1,Big,train\na2,al1,ar1,Big,train\na3,al1,ar1,Big,train\n"
        "b1,al2,ar2,Small,train\n"
        "c1,al3,ar3,Big,test\nc2,al3,ar3,Big,test\nc3,al3,ar3,Small,test\n"
        "d1,al4,ar4,Small,test\nd2,al4,ar4,Small,test\n"
        "e1,al5,ar5,C,train\ne2,al6,ar6,D,train\ne3,al7,ar7,E,train\n");
    t.meta = parse_metadata(in);
    t.bags = build_bags(t.meta.table, t.meta.vocabulary);
    t.features = FeatureTable({"x", "y"});
    std::mt19937_64 rng(5);
    std::normal_distribution<float> n;
    for (const auto& r : t.meta.table.records()) t.features.insert(r.track_id, {n(rng), n(rng)});
    return t;
}

}  // namespace

TEST_CASE("evaluate: units, golds and subset grid") {
    const auto t = eval_toy();
    const MattModel model({{2, {3}, 3}, 5, Aggregator::Matt}, 1);
    EvalOptions opts;
    const auto units = score_units(model, t.bags, t.meta.table, t.features, EvalMode::Bag);
    CHECK(units.ids == std::vector<std::string>{"c1;c2;c3", "d1;d2"});
    CHECK(units.golds == std::vector<std::size_t>{0, 1});
    const auto seg = score_units(model, t.bags, t.meta.table, t.features, EvalMode::Segment);
    CHECK(seg.ids.size() == 5);
    CHECK(seg.golds == std::vector<std::size_t>{0, 0, 1, 1, 1});  // c3 keeps its own label
    const auto report = evaluate(model, t.bags, t.meta.table, t.features, opts);
    CHECK(report.top_k.size() == 6);
    CHECK(report.find(100, 2) != nullptr);
    CHECK(report.find(100, 2)->units == 2);
    CHECK(report.find(200, 5) != nullptr);
    CHECK(report.find(300, 2) == nullptr);
}

TEST_CASE("evaluate: empty tail subset reports zero with n = 0") {
    const auto t = eval_toy();
    const MattModel model({{2, {}, 3}, 5, Aggregator::Matt}, 1);
    EvalOptions opts;
    opts.subsets = {1};
    opts.ks = {1};
    const auto report = evaluate(model, t.bags, t.meta.table, t.features, opts);
    // Every genre has >= 1 training segment.
    CHECK(report.top_k[0].units == 0);
    CHECK(report.top_k[0].accuracy == 0.0);
    opts.ks = {6};
    CHECK_MATT_ERROR(evaluate(model, t.bags, t.meta.table, t.features, opts), ErrorCode::InvalidK);
}

TEST_CASE("bag mode on singletons equals segment mode exactly") {
    const auto t = eval_toy();
    const MattModel model({{2, {4}, 3}, 5, Aggregator::Matt}, 2);
    const auto singles = singleton_bags(t.meta.table, t.meta.vocabulary);
    EvalOptions bag;
    bag.mode = EvalMode::Bag;
    EvalOptions seg;
    seg.mode = EvalMode::Segment;
    const auto a = evaluate(model, singles, t.meta.table, t.features, bag);
    const auto b = evaluate(model, t.bags, t.meta.table, t.features, seg);
    CHECK(format_topk_csv(a) == format_topk_csv(b));
    CHECK(format_pr_csv(a) == format_pr_csv(b));
    CHECK(a.overall_accuracy == b.overall_accuracy);
}

TEST_CASE("report formats are deterministic") {
    const auto t = eval_toy();
    const MattModel model({{2, {4}, 3}, 5, Aggregator::Matt}, 3);
    const auto a = evaluate(model, t.bags, t.meta.table, t.features, {});
    const auto b = evaluate(model, t.bags, t.meta.table, t.features, {});
    CHECK(format_report_text(a) == format_report_text(b));
    const auto csv = format_topk_csv(a);
    CHECK(csv.rfind("subset,K,accuracy\n<100,2,", 0) == 0);
    CHECK(format_pr_csv(a).rfind("threshold,precision,recall\n", 0) == 0);
    CHECK(parse_eval_mode("segment") == EvalMode::Segment);
    CHECK_MATT_ERROR(parse_eval_mode("album"), ErrorCode::InvalidConfig);
}
