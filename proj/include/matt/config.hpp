#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "matt/dsp.hpp"
#include "matt/evaluation.hpp"
#include "matt/model.hpp"
#include "matt/synthetic.hpp"
#include "matt/training.hpp"

namespace matt {

struct PathsConfig {
    std::string audio_dir = "audio";
    std::string metadata = "metadata.csv";
    std::string feature_dir = "features";
    std::string checkpoint_dir = "checkpoints";
    std::string report_dir = "reports";
};

struct RunConfig {
    std::uint64_t seed = 0;
    PathsConfig paths;
    std::string feature_set = "1to9";
    ExtractionConfig extraction;
    std::size_t workers = 0;  ///< 0 = logical cores
    bool write_mel = true;
    std::vector<std::size_t> hidden_dims{64};
    std::size_t output_dim = 32;
    Aggregator aggregator = Aggregator::Matt;
    TrainConfig train;
    EvalOptions eval;
    SynthConfig synth;
};

/// Sets `section.key` (or a top-level key such as `seed`) from text.
/// Unknown keys and unparsable values raise InvalidConfig.
void set_config_value(RunConfig& config, std::string_view section, std::string_view key, std::string_view value);

/// `section.key=value`
void apply_override(RunConfig& config, std::string_view assignment);

/// INI text: top-level keys, then `[section]` headers with `key = value`.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Canonical text of every key, loadable by parse_config.
std::string format_config(const RunConfig& config);

/// All `section.key` names accepted by set_config_value.
std::vector<std::string> config_keys();

/// Names accepted for feature_set: the published sets, their numeric
/// aliases, and "synth" for generated stores.
bool is_known_feature_set(std::string_view name);

}  // namespace matt
