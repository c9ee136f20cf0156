#include <algorithm>

#include <doctest.h>

#include "helpers.hpp"
#include "matt/config.hpp"

using namespace matt;

TEST_CASE("defaults") {
    const RunConfig c;
    CHECK(c.extraction.sample_rate_hz == 44100);
    CHECK(c.extraction.stft.n_fft == 2048);
    CHECK(c.extraction.stft.hop == 1024);
    CHECK(c.extraction.mel.n_mels == 96);
    CHECK(c.extraction.mel.n_frames == 1360);
    CHECK(c.feature_set == "1to9");
    CHECK(c.aggregator == Aggregator::Matt);
}

TEST_CASE("ini parsing with top-level keys and sections") {
    const auto c = parse_config(
        "seed = 17\n"
        "; comment\n"
        "[paths]\n"
        "metadata = data/meta.csv\n"
        "[features]\n"
        "set = 3+6\n"
        "n_mels = 64\n"
        "write_mel = false\n"
        "[model]\n"
        "hidden = 128,32\n"
        "aggregator = mean\n"
        "[train]\n"
        "epochs = 7\n"
        "learning_rate = 0.01\n"
        "optimizer = sgd\n"
        "label_policy = strict\n"
        "[eval]\n"
        "mode = segment\n"
        "ks = 1,4\n"
        "subsets = none\n"
        "[synth]\n"
        "n_genres = 5\n");
    CHECK(c.seed == 17);
    CHECK(c.paths.metadata == "data/meta.csv");
    CHECK(c.paths.report_dir == "reports");
    CHECK(c.feature_set == "3+6");
    CHECK(c.train.feature_set == "3+6");
    CHECK(c.extraction.mel.n_mels == 64);
    CHECK_FALSE(c.write_mel);
    CHECK(c.hidden_dims == std::vector<std::size_t>{128, 32});
    CHECK(c.aggregator == Aggregator::Mean);
    CHECK(c.train.epochs == 7);
    CHECK(c.train.optimizer.learning_rate == doctest::Approx(0.01));
    CHECK(c.train.optimizer.kind == OptimizerKind::Sgd);
    CHECK(c.train.label_policy == LabelPolicy::Strict);
    CHECK(c.eval.mode == EvalMode::Segment);
    CHECK(c.eval.ks == std::vector<std::size_t>{1, 4});
    CHECK(c.eval.subsets.empty());
    CHECK(c.synth.n_genres == 5);
}

TEST_CASE("an empty section is accepted") {
    CHECK(parse_config("[train]\n[eval]\nmode = bag\n").eval.mode == EvalMode::Bag);
}

TEST_CASE("overrides") {
    RunConfig c;
    apply_override(c, "train.epochs=3");
    apply_override(c, "seed = 9");
    apply_override(c, "model.hidden=none");
    CHECK(c.train.epochs == 3);
    CHECK(c.seed == 9);
    CHECK(c.hidden_dims.empty());
    CHECK_MATT_ERROR(apply_override(c, "train.epochs"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(apply_override(c, "train.epoch=3"), ErrorCode::InvalidConfig);
}

TEST_CASE("bad keys and values") {
    CHECK_MATT_ERROR(parse_config("[train]\nepochz = 3\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("colour = red\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[train]\nepochs = -1\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[train]\nepochs = 3x\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[train]\nlearning_rate = fast\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[features]\nwrite_mel = maybe\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[features]\nset = 10\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[model]\naggregator = max\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(parse_config("[train\nepochs = 3\n"), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(load_config("/nonexistent/matt.ini"), ErrorCode::IoError);
}

TEST_CASE("format_config round trips every key") {
    RunConfig c;
    c.seed = 123;
    c.feature_set = "3+6+4";
    c.train.feature_set = "3+6+4";
    c.train.optimizer.learning_rate = 0.000123;
    c.hidden_dims = {};
    c.eval.ks = {2, 7};
    c.synth.zipf_exponent = 1.35;
    const auto text = format_config(c);
    const auto back = parse_config(text);
    CHECK(format_config(back) == text);
    CHECK(back.train.optimizer.learning_rate == c.train.optimizer.learning_rate);
    CHECK(back.hidden_dims.empty());

    for (const auto& key : config_keys()) {
        const auto leaf = key.substr(key.find('.') + 1);
        CHECK_MESSAGE(text.find(leaf + " = ") != std::string::npos, key);
    }
}

TEST_CASE("known feature sets") {
    for (const auto& name : published_feature_sets()) CHECK(is_known_feature_set(name));
    for (const char* alias : {"1", "5", "9", "synth"}) CHECK(is_known_feature_set(alias));
    CHECK_FALSE(is_known_feature_set("0"));
    CHECK_FALSE(is_known_feature_set("mel"));
}
