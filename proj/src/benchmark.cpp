#include "matt/benchmark.hpp"

#include <fmt/format.h>

namespace matt {
namespace {

double tail_topk(const EvalReport& report, const BenchmarkSettings& settings) {
    const auto* entry = report.find(settings.tail_threshold, settings.k);
    return entry != nullptr ? entry->accuracy : 0.0;
}

std::size_t tail_units(const EvalReport& report, const BenchmarkSettings& settings) {
    const auto* entry = report.find(settings.tail_threshold, settings.k);
    return entry != nullptr ? entry->units : 0;
}

}  // namespace

BenchmarkSettings default_benchmark_settings() {
    BenchmarkSettings s;
    s.matt_train.epochs = 150;
    s.matt_train.bags_per_batch = 16;
    s.matt_train.optimizer.learning_rate = 3e-3;
    s.matt_train.early_stop_patience = 30;
    s.baseline_train = s.matt_train;
    s.baseline_train.bags_per_batch = 32;
    return s;
}

BenchmarkRun run_benchmark(const BenchmarkSettings& settings, std::uint64_t seed) {
    BenchmarkRun run;
    run.seed = seed;

    SynthConfig synth = settings.synth;
    synth.seed = derive_seed(seed, 0);
    const auto corpus = generate_synthetic(synth);
    const auto& vocab = corpus.bags.vocabulary;
    const auto& table = corpus.metadata.table;

    ModelConfig matt_config{{synth.feature_dim, settings.hidden_dims, settings.output_dim}, vocab.size(),
                            settings.aggregator};
    TrainConfig matt_train = settings.matt_train;
    matt_train.seed = derive_seed(seed, 1);
    auto matt = train(corpus.bags, corpus.features, matt_config, matt_train);

    ModelConfig base_config{{synth.feature_dim, settings.baseline_hidden_dims, settings.output_dim}, vocab.size(),
                            Aggregator::Matt};
    TrainConfig base_train = settings.baseline_train;
    base_train.seed = derive_seed(seed, 2);
    auto baseline = train_segment_baseline(table, vocab, corpus.features, base_config, base_train);

    EvalOptions bag_options;
    bag_options.mode = EvalMode::Bag;
    bag_options.subsets = {settings.tail_threshold};
    bag_options.ks = {settings.k};
    EvalOptions seg_options = bag_options;
    seg_options.mode = EvalMode::Segment;

    const auto matt_bag = evaluate(matt.model, corpus.bags, table, corpus.features, bag_options);
    const auto matt_seg = evaluate(matt.model, corpus.bags, table, corpus.features, seg_options);
    const auto base_seg = evaluate(baseline.model, corpus.bags, table, corpus.features, seg_options);
    const BagScorer oracle = [&](const BagFeatures& members) {
        BagPrediction p;
        p.probabilities = corpus.oracle.posterior(members);
        return p;
    };
    const auto oracle_bag =
        build_report(score_units(oracle, corpus.bags, table, corpus.features, EvalMode::Bag), vocab, bag_options);

    run.matt_tail_topk = tail_topk(matt_bag, settings);
    run.baseline_tail_topk = tail_topk(base_seg, settings);
    run.oracle_tail_topk = tail_topk(oracle_bag, settings);
    run.matt_bag_accuracy = matt_bag.overall_accuracy;
    run.matt_segment_accuracy = matt_seg.overall_accuracy;
    run.baseline_segment_accuracy = base_seg.overall_accuracy;
    run.tail_bags = tail_units(matt_bag, settings);
    run.tail_segments = tail_units(base_seg, settings);
    run.matt_checkpoint = encode_checkpoint(matt.model.params());
    run.baseline_checkpoint = encode_checkpoint(baseline.model.params());
    run.matt_report = format_report_text(matt_bag) + format_pr_csv(matt_bag);
    run.matt_segment_report = format_report_text(matt_seg) + format_pr_csv(matt_seg);
    run.baseline_report = format_report_text(base_seg) + format_pr_csv(base_seg);
    run.matt_log = matt.log.to_csv();
    run.baseline_log = baseline.log.to_csv();
    return run;
}

std::string format_benchmark(const std::vector<BenchmarkRun>& runs, const BenchmarkSettings& settings) {
    std::string out = fmt::format("{:>6}  {:>9}  {:>9}  {:>9}  {:>8}  {:>8}  {:>8}\n", "seed",
                                  fmt::format("matt@{}", settings.k), fmt::format("base@{}", settings.k),
                                  fmt::format("oracle@{}", settings.k), "matt_bag", "matt_seg", "base_seg");
    BenchmarkRun mean;
    for (const auto& r : runs) {
        out += fmt::format("{:>6}  {:>9.4f}  {:>9.4f}  {:>9.4f}  {:>8.4f}  {:>8.4f}  {:>8.4f}\n", r.seed,
                           r.matt_tail_topk, r.baseline_tail_topk, r.oracle_tail_topk, r.matt_bag_accuracy,
                           r.matt_segment_accuracy, r.baseline_segment_accuracy);
        mean.matt_tail_topk += r.matt_tail_topk;
        mean.baseline_tail_topk += r.baseline_tail_topk;
        mean.oracle_tail_topk += r.oracle_tail_topk;
        mean.matt_bag_accuracy += r.matt_bag_accuracy;
        mean.matt_segment_accuracy += r.matt_segment_accuracy;
        mean.baseline_segment_accuracy += r.baseline_segment_accuracy;
    }
    if (!runs.empty()) {
        const auto n = static_cast<double>(runs.size());
        out += fmt::format("{:>6}  {:>9.4f}  {:>9.4f}  {:>9.4f}  {:>8.4f}  {:>8.4f}  {:>8.4f}\n", "mean",
                           mean.matt_tail_topk / n, mean.baseline_tail_topk / n, mean.oracle_tail_topk / n,
                           mean.matt_bag_accuracy / n, mean.matt_segment_accuracy / n,
                           mean.baseline_segment_accuracy / n);
    }
    return out;
}

}  // namespace matt
