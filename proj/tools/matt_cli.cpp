// matt: command-line front end for feature extraction, bagging, training and
// evaluation of the multi-instance attention genre classifier.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "io_util.hpp"
#include "matt/audio.hpp"
#include "matt/benchmark.hpp"
#include "matt/config.hpp"
#include "matt/dataset.hpp"
#include "matt/dsp.hpp"
#include "matt/error.hpp"
#include "matt/evaluation.hpp"
#include "matt/feature_table.hpp"
#include "matt/log.hpp"
#include "matt/model.hpp"
#include "matt/numeric.hpp"
#include "matt/synthetic.hpp"
#include "matt/training.hpp"

namespace fs = std::filesystem;
using namespace matt;

namespace {

struct Overrides {
    std::vector<std::pair<std::string, std::string>> items;
};

// Adds a flag that overrides a config key; applied after the config file and
// any --set assignments.
CLI::Option* key_flag(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                      const std::string& help) {
    return app->add_option_function<std::string>(
        flag, [&ov, key](const std::string& v) { ov.items.emplace_back(key, v); },
        fmt::format("{} (config key {})", help, key));
}

std::string feature_file(const RunConfig& c) {
    return (fs::path(c.paths.feature_dir) / ("features_" + c.feature_set + ".csv")).string();
}

void require_file(const std::string& path, std::string_view what) {
    if (!fs::is_regular_file(path)) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{} '{}' does not exist", what, path));
    }
}

void require_dir(const std::string& path, std::string_view what) {
    if (!fs::is_directory(path)) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{} '{}' is not a directory", what, path));
    }
}

ModelConfig model_config(const RunConfig& c, std::size_t input_dim, std::size_t n_genres) {
    return {{input_dim, c.hidden_dims, c.output_dim}, n_genres, c.aggregator};
}

// Column offsets of each family inside the full "1to9" vector.
std::map<FeatureFamily, std::pair<std::size_t, std::size_t>> family_offsets() {
    std::map<FeatureFamily, std::pair<std::size_t, std::size_t>> out;
    std::size_t at = 0;
    for (const auto f : feature_set_families("1to9")) {
        const std::size_t n = kStatisticNames.size() * base_dim(f);
        out[f] = {at, n};
        at += n;
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_extract(const RunConfig& c) {
    require_file(c.paths.metadata, "metadata");
    require_dir(c.paths.audio_dir, "audio directory");
    const auto meta = load_metadata(c.paths.metadata);
    const FeatureExtractor extractor(c.extraction);
    const fs::path root(c.paths.feature_dir);
    fs::create_directories(root / "tracks");
    if (c.write_mel) fs::create_directories(root / "mel");

    const auto& records = meta.table.records();
    const auto track_file = [&](const std::string& id) { return (root / "tracks" / (id + ".csv")).string(); };
    const auto mel_file = [&](const std::string& id) { return (root / "mel" / (id + ".melf")).string(); };
    const auto full_columns = feature_set_columns("1to9");

    std::vector<std::string> failures(records.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<std::size_t> skipped{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            const auto& id = records[i].track_id;
            if (fs::exists(track_file(id)) && (!c.write_mel || fs::exists(mel_file(id)))) {
                ++skipped;
                continue;
            }
            try {
                const auto signal = read_wav((fs::path(c.paths.audio_dir) / (id + ".wav")).string());
                const auto features = extractor.extract(signal);
                if (c.write_mel) detail::write_file_atomic(mel_file(id), encode_mel_cache(features.mel));
                FeatureTable row(full_columns);
                row.insert(id, features.feature_set("1to9"));
                row.write(track_file(id));
                const auto n = ++done;
                if (n % 100 == 0) spdlog::info("extracted {} tracks", n);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    std::size_t workers = c.workers != 0 ? c.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(records.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t failed = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!failures[i].empty()) {
            spdlog::error("{}: {}", records[i].track_id, failures[i]);
            ++failed;
        }
    }

    // Assemble one cache file per published feature set from the per-track rows.
    const auto offsets = family_offsets();
    std::map<std::string, FeatureTable> tables;
    for (const auto& name : published_feature_sets()) tables.emplace(name, FeatureTable(feature_set_columns(name)));
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!failures[i].empty()) continue;
        const auto& id = records[i].track_id;
        const auto full = FeatureTable::read(track_file(id)).at(id);
        for (auto& [name, table] : tables) {
            std::vector<float> values;
            for (const auto f : feature_set_families(name)) {
                const auto [at, n] = offsets.at(f);
                values.insert(values.end(), full.begin() + static_cast<std::ptrdiff_t>(at),
                              full.begin() + static_cast<std::ptrdiff_t>(at + n));
            }
            table.insert(id, std::move(values));
        }
    }
    for (const auto& [name, table] : tables) {
        table.write((root / ("features_" + name + ".csv")).string());
    }
    fmt::print("tracks: {}  extracted: {}  reused: {}  failed: {}\n", records.size(), done.load(), skipped.load(),
               failed);
    return failed == 0 ? 0 : 2;
}

int cmd_build_bags(const RunConfig& c, const std::string& out) {
    require_file(c.paths.metadata, "metadata");
    const auto meta = load_metadata(c.paths.metadata);
    const auto bags = build_bags(meta.table, meta.vocabulary, c.train.label_policy);
    const std::string path = out.empty() ? (fs::path(c.paths.report_dir) / "bags.csv").string() : out;
    detail::write_file_atomic(path, format_bags(bags));
    for (const auto split : {Split::Train, Split::Validation, Split::Test}) {
        const auto part = bags.with_split(split);
        fmt::print("{:<10} bags: {:>6}  segments: {:>7}\n", to_string(split), part.bags.size(), part.segment_count());
    }
    fmt::print("genres: {}\nwritten: {}\n", meta.vocabulary.size(), path);
    return 0;
}

int cmd_gen_synth(const RunConfig& c, const std::string& out) {
    SynthConfig sc = c.synth;
    sc.seed = derive_seed(c.seed, 0);
    const auto corpus = generate_synthetic(sc);
    const fs::path dir(out.empty() ? c.paths.feature_dir : out);
    fs::create_directories(dir);
    detail::write_file_atomic((dir / "metadata.csv").string(), format_metadata(corpus.metadata));
    corpus.features.write((dir / "features_synth.csv").string());
    detail::write_file_atomic((dir / "oracle.txt").string(), corpus.oracle.to_text());
    detail::write_file_atomic((dir / "bags.csv").string(), format_bags(corpus.bags));
    std::size_t tail = 0;
    for (auto n : corpus.bags.vocabulary.train_counts) tail += n < 100 ? 1 : 0;
    fmt::print("genres: {}  bags: {}  segments: {}  genres under 100 training segments: {}\nwritten: {}\n",
               corpus.bags.vocabulary.size(), corpus.bags.bags.size(), corpus.bags.segment_count(), tail,
               dir.string());
    return 0;
}

std::string default_checkpoint(const RunConfig& c, const std::string& given) {
    return given.empty() ? (fs::path(c.paths.checkpoint_dir) / "model.ckpt").string() : given;
}

int cmd_train(const RunConfig& c, const std::string& checkpoint_arg, bool segment_baseline) {
    require_file(c.paths.metadata, "metadata");
    require_file(feature_file(c), "feature cache");
    const auto meta = load_metadata(c.paths.metadata);
    const auto features = FeatureTable::read(feature_file(c));
    const auto mc = model_config(c, features.dim(), meta.vocabulary.size());
    TrainConfig tc = c.train;
    tc.seed = derive_seed(c.seed, 1);
    const auto result =
        segment_baseline ? train_segment_baseline(meta.table, meta.vocabulary, features, mc, tc)
                         : train(build_bags(meta.table, meta.vocabulary, tc.label_policy), features, mc, tc);
    const auto checkpoint = default_checkpoint(c, checkpoint_arg);
    save_checkpoint(checkpoint, result.model.params());
    detail::write_file_atomic(checkpoint + ".log.csv", result.log.to_csv());
    const auto& last = result.log.epochs;
    fmt::print("epochs run: {}  best epoch: {}  final loss: {:.6f}\ncheckpoint: {}\n", last.size(),
               result.log.best_epoch, last.empty() ? 0.0 : last.back().loss, checkpoint);
    return 0;
}

MattModel load_model(const RunConfig& c, const std::string& checkpoint) {
    require_file(checkpoint, "checkpoint");
    return MattModel::from_params(load_checkpoint(checkpoint), c.aggregator);
}

void check_model_fits(const MattModel& model, const FeatureTable& features, const GenreVocabulary& vocab) {
    if (model.config().encoder.input_dim != features.dim() || model.n_genres() != vocab.size()) {
        throw Error(ErrorCode::ShapeError,
                    fmt::format("checkpoint expects {} features and {} genres; data has {} and {}",
                                model.config().encoder.input_dim, model.n_genres(), features.dim(), vocab.size()));
    }
}

int cmd_evaluate(const RunConfig& c, const std::string& checkpoint_arg) {
    require_file(c.paths.metadata, "metadata");
    require_file(feature_file(c), "feature cache");
    const auto meta = load_metadata(c.paths.metadata);
    const auto features = FeatureTable::read(feature_file(c));
    const auto model = load_model(c, default_checkpoint(c, checkpoint_arg));
    check_model_fits(model, features, meta.vocabulary);
    const auto bags = build_bags(meta.table, meta.vocabulary, c.train.label_policy);
    const auto report = evaluate(model, bags, meta.table, features, c.eval);
    const fs::path dir(c.paths.report_dir);
    const auto text = format_report_text(report);
    detail::write_file_atomic((dir / "report.txt").string(), text);
    detail::write_file_atomic((dir / "topk.csv").string(), format_topk_csv(report));
    detail::write_file_atomic((dir / "pr.csv").string(), format_pr_csv(report));
    fmt::print("{}", text);
    return 0;
}

int cmd_predict(const RunConfig& c, const std::string& checkpoint_arg, const std::string& split_name,
                const std::vector<std::string>& only, const std::string& out) {
    require_file(c.paths.metadata, "metadata");
    require_file(feature_file(c), "feature cache");
    const auto meta = load_metadata(c.paths.metadata);
    const auto features = FeatureTable::read(feature_file(c));
    const auto model = load_model(c, default_checkpoint(c, checkpoint_arg));
    check_model_fits(model, features, meta.vocabulary);
    const auto split = parse_split(split_name);
    const auto& names = meta.vocabulary.names;
    const std::size_t top = std::min<std::size_t>(5, names.size());

    std::set<std::string, std::less<>> wanted(only.begin(), only.end());
    for (const auto& id : wanted) meta.table.at(id);

    const auto bags = c.eval.mode == EvalMode::Bag ? build_bags(meta.table, meta.vocabulary, c.train.label_policy)
                                                   : singleton_bags(meta.table, meta.vocabulary);
    std::string text = "track_id,predicted_genre,p_max,top5,attention\n";
    for (const auto& bag : bags.bags) {
        // explicit track ids are predicted in whatever split they belong to
        if (wanted.empty() && bag.key.split != split) continue;
        const bool any = wanted.empty() || std::any_of(bag.segment_ids.begin(), bag.segment_ids.end(),
                                                       [&](const auto& s) { return wanted.count(s) != 0; });
        if (!any) continue;
        const auto pred = model.forward_bag(gather_features(bag, features));
        const auto best = top_genres(pred.probabilities, top);
        std::string top_text;
        for (const auto g : best) {
            top_text += fmt::format("{}{}:{:.6f}", top_text.empty() ? "" : ";", names[g], pred.probabilities[g]);
        }
        for (std::size_t i = 0; i < bag.segment_ids.size(); ++i) {
            const auto& id = bag.segment_ids[i];
            if (!wanted.empty() && wanted.count(id) == 0) continue;
            text += fmt::format("{},{},{:.6f},{},{:.6f}\n", id, names[best.front()],
                                pred.probabilities[best.front()], top_text, pred.attention_weights[i]);
        }
    }
    if (out.empty()) {
        fmt::print("{}", text);
    } else {
        detail::write_file_atomic(out, text);
    }
    return 0;
}

int cmd_grad_check(const RunConfig& c, std::size_t input_dim, std::size_t genres, std::size_t bag_size,
                   std::size_t n_bags) {
    if (input_dim == 0 || genres < 2 || bag_size == 0 || n_bags == 0) {
        throw Error(ErrorCode::InvalidConfig, "grad-check needs input-dim >= 1, genres >= 2, bag-size >= 1, bags >= 1");
    }
    MattModel model(model_config(c, input_dim, genres), derive_seed(c.seed, 1));
    std::mt19937_64 rng(derive_seed(c.seed, 3));
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<std::size_t> pick(0, genres - 1);
    std::vector<BagFeatures> bags(n_bags);
    std::vector<std::size_t> golds(n_bags);
    for (std::size_t b = 0; b < n_bags; ++b) {
        for (std::size_t k = 0; k < bag_size; ++k) {
            Vector x(input_dim);
            for (auto& v : x) v = normal(rng);
            bags[b].push_back(std::move(x));
        }
        golds[b] = pick(rng);
    }
    model.params().zero_grad();
    accumulate_batch(model, bags, golds);
    GradCheckOptions options;
    options.seed = derive_seed(c.seed, 4);
    const auto report =
        finite_difference_check([&] { return batch_loss(model, bags, golds); }, model.params(), options);
    for (const auto& p : report.params) {
        fmt::print("{:<20} checked {:>4}  max rel error {:.3e}  {}\n", p.name, p.checked, p.max_rel_error,
                   p.passed ? "ok" : "FAIL");
    }
    fmt::print("max relative error: {:.3e} (tolerance {:.0e})  {}\n", report.max_rel_error, options.tolerance,
               report.passed ? "PASS" : "FAIL");
    return report.passed ? 0 : 2;
}

int cmd_benchmark(const RunConfig& c, std::size_t seeds, const std::string& out) {
    auto settings = default_benchmark_settings();
    settings.synth = c.synth;
    std::vector<BenchmarkRun> runs;
    for (std::size_t i = 0; i < seeds; ++i) {
        const std::uint64_t seed = c.seed + i;
        runs.push_back(run_benchmark(settings, seed));
        if (!out.empty()) {
            const auto dir = fs::path(out) / fmt::format("seed_{}", seed);
            const auto& r = runs.back();
            detail::write_file_atomic((dir / "matt.ckpt").string(), r.matt_checkpoint);
            detail::write_file_atomic((dir / "baseline.ckpt").string(), r.baseline_checkpoint);
            detail::write_file_atomic((dir / "matt_bag_report.txt").string(), r.matt_report);
            detail::write_file_atomic((dir / "matt_segment_report.txt").string(), r.matt_segment_report);
            detail::write_file_atomic((dir / "baseline_segment_report.txt").string(), r.baseline_report);
            detail::write_file_atomic((dir / "matt_log.csv").string(), r.matt_log);
            detail::write_file_atomic((dir / "baseline_log.csv").string(), r.baseline_log);
        }
    }
    fmt::print("{}", format_benchmark(runs, settings));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    init_logging();
    CLI::App app{"Multi-instance attention genre classifier: features, bags, training, evaluation."};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "0.1.0");

    std::string config_path;
    std::vector<std::string> assignments;
    std::optional<std::uint64_t> seed;
    Overrides ov;
    app.add_option("--config", config_path, "INI config file (flags override its keys)");
    app.add_option("--set", assignments, "Override any config key, section.key=value (repeatable)");
    app.add_option("--seed", seed, "Master seed; every random stream derives from it (config key seed)");

    auto* extract = app.add_subcommand("extract-features", "Extract summary features and mel caches from WAV audio");
    key_flag(extract, ov, "--audio-dir", "paths.audio_dir", "Directory of <track_id>.wav files");
    key_flag(extract, ov, "--metadata", "paths.metadata", "Metadata CSV listing the tracks");
    key_flag(extract, ov, "--feature-dir", "paths.feature_dir", "Output directory for feature caches");
    key_flag(extract, ov, "--workers", "features.workers", "Parallel extraction tasks, 0 = logical cores");
    key_flag(extract, ov, "--sample-rate", "features.sample_rate", "Expected sample rate in Hz (no resampling)");
    key_flag(extract, ov, "--write-mel", "features.write_mel", "Write per-track mel caches, true|false");

    std::string bags_out;
    auto* bags = app.add_subcommand("build-bags", "Group metadata into album-artist bags and write bags.csv");
    key_flag(bags, ov, "--metadata", "paths.metadata", "Metadata CSV");
    key_flag(bags, ov, "--label-policy", "train.label_policy", "Disagreeing labels in a bag: majority|strict");
    bags->add_option("--out", bags_out, "Output path (default <report_dir>/bags.csv)");

    std::string synth_out;
    auto* synth = app.add_subcommand("gen-synth", "Generate a seeded synthetic long-tail corpus");
    synth->add_option("--out", synth_out, "Output directory (default <feature_dir>)");
    key_flag(synth, ov, "--genres", "synth.n_genres", "Number of genres");
    key_flag(synth, ov, "--zipf", "synth.zipf_exponent", "Power-law exponent of bags per genre");
    key_flag(synth, ov, "--head-count", "synth.head_count", "Expected training segments of the head genre");
    key_flag(synth, ov, "--bag-min", "synth.bag_size_min", "Smallest bag size");
    key_flag(synth, ov, "--bag-max", "synth.bag_size_max", "Largest bag size");
    key_flag(synth, ov, "--feature-dim", "synth.feature_dim", "Feature dimension");
    key_flag(synth, ov, "--separation", "synth.centroid_separation", "Pairwise distance between genre centroids");
    key_flag(synth, ov, "--noise-rate", "synth.noise_rate", "Probability a segment is background noise");

    std::string train_ckpt;
    bool segment_baseline = false;
    auto* train_cmd = app.add_subcommand("train", "Train on album-artist bags (or singletons for the baseline)");
    key_flag(train_cmd, ov, "--metadata", "paths.metadata", "Metadata CSV");
    key_flag(train_cmd, ov, "--feature-dir", "paths.feature_dir", "Directory holding features_<set>.csv");
    key_flag(train_cmd, ov, "--feature-set", "features.set", "Feature set name, e.g. 1to9, 3+6, synth");
    key_flag(train_cmd, ov, "--aggregator", "model.aggregator", "Bag pooling: matt|mean");
    key_flag(train_cmd, ov, "--hidden", "model.hidden", "Hidden layer widths, comma list or none");
    key_flag(train_cmd, ov, "--output-dim", "model.output_dim", "Segment embedding size");
    key_flag(train_cmd, ov, "--epochs", "train.epochs", "Maximum epochs");
    key_flag(train_cmd, ov, "--batch", "train.bags_per_batch", "Bags per optimizer step");
    key_flag(train_cmd, ov, "--optimizer", "train.optimizer", "adam|sgd");
    key_flag(train_cmd, ov, "--lr", "train.learning_rate", "Learning rate");
    key_flag(train_cmd, ov, "--patience", "train.patience", "Early-stopping patience in epochs, 0 = off");
    key_flag(train_cmd, ov, "--label-policy", "train.label_policy", "majority|strict");
    key_flag(train_cmd, ov, "--class-weighting", "train.class_weighting", "Inverse-frequency bag weights, true|false");
    key_flag(train_cmd, ov, "--checkpoint-dir", "paths.checkpoint_dir", "Directory for the default checkpoint");
    train_cmd->add_option("--checkpoint", train_ckpt, "Checkpoint path (default <checkpoint_dir>/model.ckpt)");
    train_cmd->add_flag("--segment-baseline", segment_baseline, "Train on singleton bags instead of album-artist bags");

    std::string eval_ckpt;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score the test split; write report.txt, topk.csv, pr.csv");
    key_flag(eval_cmd, ov, "--metadata", "paths.metadata", "Metadata CSV");
    key_flag(eval_cmd, ov, "--feature-dir", "paths.feature_dir", "Directory holding features_<set>.csv");
    key_flag(eval_cmd, ov, "--feature-set", "features.set", "Feature set name");
    key_flag(eval_cmd, ov, "--aggregator", "model.aggregator", "Bag pooling the checkpoint was trained with");
    key_flag(eval_cmd, ov, "--mode", "eval.mode", "Evaluation unit: bag|segment");
    key_flag(eval_cmd, ov, "--subsets", "eval.subsets", "Long-tail thresholds, comma list");
    key_flag(eval_cmd, ov, "--ks", "eval.ks", "Top@K values, comma list");
    key_flag(eval_cmd, ov, "--report-dir", "paths.report_dir", "Output directory");
    key_flag(eval_cmd, ov, "--checkpoint-dir", "paths.checkpoint_dir", "Directory of the default checkpoint");
    eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint path (default <checkpoint_dir>/model.ckpt)");

    std::string pred_ckpt;
    std::string pred_split = "test";
    std::vector<std::string> pred_tracks;
    std::string pred_out;
    auto* predict = app.add_subcommand("predict", "Print per-track predictions with attention weights");
    key_flag(predict, ov, "--metadata", "paths.metadata", "Metadata CSV");
    key_flag(predict, ov, "--feature-dir", "paths.feature_dir", "Directory holding features_<set>.csv");
    key_flag(predict, ov, "--feature-set", "features.set", "Feature set name");
    key_flag(predict, ov, "--aggregator", "model.aggregator", "Bag pooling the checkpoint was trained with");
    key_flag(predict, ov, "--mode", "eval.mode", "bag: score album-artist bags, segment: each track alone");
    key_flag(predict, ov, "--checkpoint-dir", "paths.checkpoint_dir", "Directory of the default checkpoint");
    predict->add_option("--checkpoint", pred_ckpt, "Checkpoint path (default <checkpoint_dir>/model.ckpt)");
    predict->add_option("--split", pred_split, "Split to predict when --tracks is not given: train|validation|test");
    predict->add_option("--tracks", pred_tracks, "Only these track ids")->delimiter(',');
    predict->add_option("--out", pred_out, "Write to this file instead of stdout");

    std::size_t gc_input = 8;
    std::size_t gc_genres = 4;
    std::size_t gc_bag = 3;
    std::size_t gc_bags = 2;
    auto* grad = app.add_subcommand("grad-check", "Finite-difference check of the model gradients");
    grad->add_option("--input-dim", gc_input, "Feature dimension of the random bags");
    grad->add_option("--genres", gc_genres, "Number of genres");
    grad->add_option("--bag-size", gc_bag, "Segments per bag");
    grad->add_option("--bags", gc_bags, "Bags in the loss");
    key_flag(grad, ov, "--hidden", "model.hidden", "Hidden layer widths, comma list or none");
    key_flag(grad, ov, "--output-dim", "model.output_dim", "Segment embedding size");
    key_flag(grad, ov, "--aggregator", "model.aggregator", "matt|mean");

    std::size_t bench_seeds = 5;
    std::string bench_out;
    auto* bench = app.add_subcommand("benchmark", "Synthetic long-tail comparison of bag training and the baseline");
    bench->add_option("--seeds", bench_seeds, "Number of consecutive seeds starting at --seed");
    bench->add_option("--out", bench_out, "Write per-seed checkpoints, logs and reports here");
    key_flag(bench, ov, "--separation", "synth.centroid_separation", "Pairwise distance between genre centroids");
    key_flag(bench, ov, "--noise-rate", "synth.noise_rate", "Probability a segment is background noise");

    auto* show = app.add_subcommand("show-config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig config;
        if (!config_path.empty()) {
            require_file(config_path, "config file");
            config = load_config(config_path);
        }
        for (const auto& a : assignments) apply_override(config, a);
        for (const auto& [key, value] : ov.items) apply_override(config, key + "=" + value);
        if (seed) config.seed = *seed;

        if (*extract) return cmd_extract(config);
        if (*bags) return cmd_build_bags(config, bags_out);
        if (*synth) return cmd_gen_synth(config, synth_out);
        if (*train_cmd) return cmd_train(config, train_ckpt, segment_baseline);
        if (*eval_cmd) return cmd_evaluate(config, eval_ckpt);
        if (*predict) return cmd_predict(config, pred_ckpt, pred_split, pred_tracks, pred_out);
        if (*grad) return cmd_grad_check(config, gc_input, gc_genres, gc_bag, gc_bags);
        if (*bench) return cmd_benchmark(config, bench_seeds, bench_out);
        if (*show) {
            fmt::print("{}", format_config(config));
            return 0;
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return is_validation_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 1;
}
