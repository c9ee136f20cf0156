#include "matt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "io_util.hpp"
#include "matt/error.hpp"
#include "text_util.hpp"

namespace matt {
namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{} = '{}': expected {}", key, value, expected));
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view text) {
    const auto v = detail::trim(text);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, text, "a non-negative integer");
    return out;
}

double parse_double(std::string_view key, std::string_view text) {
    const std::string v(detail::trim(text));
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(out)) bad_value(key, text, "a finite number");
        return out;
    } catch (const std::logic_error&) {
        bad_value(key, text, "a finite number");
    }
}

bool parse_bool(std::string_view key, std::string_view text) {
    const auto v = detail::trim(text);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, text, "true|false");
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view text) {
    std::vector<std::size_t> out;
    const auto v = detail::trim(text);
    if (v.empty() || v == "none") return out;
    for (const auto& item : detail::split(v, ',')) out.push_back(parse_unsigned<std::size_t>(key, item));
    return out;
}

std::string join_list(const std::vector<std::size_t>& values) {
    if (values.empty()) return "none";
    std::string out;
    for (auto v : values) out += (out.empty() ? "" : ",") + std::to_string(v);
    return out;
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
    Setter set;
    Getter get;
};

std::string fmt_double(double v) { return fmt::format("{}", v); }

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> t;
        const auto path = [&](const char* name, std::string PathsConfig::*m) {
            t[name] = {[m](RunConfig& c, std::string_view, std::string_view v) {
                           c.paths.*m = std::string(detail::trim(v));
                       },
                       [m](const RunConfig& c) { return c.paths.*m; }};
        };
        path("paths.audio_dir", &PathsConfig::audio_dir);
        path("paths.metadata", &PathsConfig::metadata);
        path("paths.feature_dir", &PathsConfig::feature_dir);
        path("paths.checkpoint_dir", &PathsConfig::checkpoint_dir);
        path("paths.report_dir", &PathsConfig::report_dir);

        t["seed"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                         c.seed = parse_unsigned<std::uint64_t>(k, v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};

        t["features.set"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                 const std::string name(detail::trim(v));
                                 if (!is_known_feature_set(name)) bad_value(k, v, "a published feature set");
                                 c.feature_set = name;
                                 c.train.feature_set = name;
                             },
                             [](const RunConfig& c) { return c.feature_set; }};
        t["features.sample_rate"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                         c.extraction.sample_rate_hz = parse_unsigned<std::uint32_t>(k, v);
                                     },
                                     [](const RunConfig& c) { return std::to_string(c.extraction.sample_rate_hz); }};
        t["features.n_fft"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                   c.extraction.stft.n_fft = parse_unsigned<std::size_t>(k, v);
                               },
                               [](const RunConfig& c) { return std::to_string(c.extraction.stft.n_fft); }};
        t["features.hop"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.extraction.stft.hop = parse_unsigned<std::size_t>(k, v);
                             },
                             [](const RunConfig& c) { return std::to_string(c.extraction.stft.hop); }};
        t["features.n_mels"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                    c.extraction.mel.n_mels = parse_unsigned<std::size_t>(k, v);
                                },
                                [](const RunConfig& c) { return std::to_string(c.extraction.mel.n_mels); }};
        t["features.n_frames"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                      c.extraction.mel.n_frames = parse_unsigned<std::size_t>(k, v);
                                  },
                                  [](const RunConfig& c) { return std::to_string(c.extraction.mel.n_frames); }};
        t["features.n_mfcc"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                    c.extraction.n_mfcc = parse_unsigned<std::size_t>(k, v);
                                },
                                [](const RunConfig& c) { return std::to_string(c.extraction.n_mfcc); }};
        t["features.workers"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                     c.workers = parse_unsigned<std::size_t>(k, v);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.workers); }};
        t["features.write_mel"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                       c.write_mel = parse_bool(k, v);
                                   },
                                   [](const RunConfig& c) { return std::string(c.write_mel ? "true" : "false"); }};

        t["model.hidden"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.hidden_dims = parse_list(k, v);
                             },
                             [](const RunConfig& c) { return join_list(c.hidden_dims); }};
        t["model.output_dim"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                     c.output_dim = parse_unsigned<std::size_t>(k, v);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.output_dim); }};
        t["model.aggregator"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                                     c.aggregator = parse_aggregator(detail::trim(v));
                                 },
                                 [](const RunConfig& c) { return std::string(to_string(c.aggregator)); }};

        t["train.epochs"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.train.epochs = parse_unsigned<std::size_t>(k, v);
                             },
                             [](const RunConfig& c) { return std::to_string(c.train.epochs); }};
        t["train.bags_per_batch"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                         c.train.bags_per_batch = parse_unsigned<std::size_t>(k, v);
                                     },
                                     [](const RunConfig& c) { return std::to_string(c.train.bags_per_batch); }};
        t["train.optimizer"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                                    c.train.optimizer.kind = parse_optimizer_kind(detail::trim(v));
                                },
                                [](const RunConfig& c) {
                                    return std::string(c.train.optimizer.kind == OptimizerKind::Adam ? "adam" : "sgd");
                                }};
        t["train.learning_rate"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                        c.train.optimizer.learning_rate = parse_double(k, v);
                                    },
                                    [](const RunConfig& c) { return fmt_double(c.train.optimizer.learning_rate); }};
        t["train.beta1"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                c.train.optimizer.beta1 = parse_double(k, v);
                            },
                            [](const RunConfig& c) { return fmt_double(c.train.optimizer.beta1); }};
        t["train.beta2"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                c.train.optimizer.beta2 = parse_double(k, v);
                            },
                            [](const RunConfig& c) { return fmt_double(c.train.optimizer.beta2); }};
        t["train.epsilon"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                  c.train.optimizer.epsilon = parse_double(k, v);
                              },
                              [](const RunConfig& c) { return fmt_double(c.train.optimizer.epsilon); }};
        t["train.patience"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                   c.train.early_stop_patience = parse_unsigned<std::size_t>(k, v);
                               },
                               [](const RunConfig& c) { return std::to_string(c.train.early_stop_patience); }};
        t["train.label_policy"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                                       c.train.label_policy = parse_label_policy(detail::trim(v));
                                   },
                                   [](const RunConfig& c) {
                                       return std::string(c.train.label_policy == LabelPolicy::Strict ? "strict"
                                                                                                      : "majority");
                                   }};
        t["train.class_weighting"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                          c.train.class_weighting = parse_bool(k, v);
                                      },
                                      [](const RunConfig& c) {
                                          return std::string(c.train.class_weighting ? "true" : "false");
                                      }};
        t["train.record_wall_time"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                           c.train.record_wall_time = parse_bool(k, v);
                                       },
                                       [](const RunConfig& c) {
                                           return std::string(c.train.record_wall_time ? "true" : "false");
                                       }};

        t["eval.mode"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                              c.eval.mode = parse_eval_mode(detail::trim(v));
                          },
                          [](const RunConfig& c) { return std::string(to_string(c.eval.mode)); }};
        t["eval.subsets"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.eval.subsets = parse_list(k, v);
                             },
                             [](const RunConfig& c) { return join_list(c.eval.subsets); }};
        t["eval.ks"] = {[](RunConfig& c, std::string_view k, std::string_view v) { c.eval.ks = parse_list(k, v); },
                        [](const RunConfig& c) { return join_list(c.eval.ks); }};

        const auto synth_size = [&](const char* name, std::size_t SynthConfig::*m) {
            t[name] = {[m](RunConfig& c, std::string_view k, std::string_view v) {
                           c.synth.*m = parse_unsigned<std::size_t>(k, v);
                       },
                       [m](const RunConfig& c) { return std::to_string(c.synth.*m); }};
        };
        const auto synth_real = [&](const char* name, double SynthConfig::*m) {
            t[name] = {[m](RunConfig& c, std::string_view k, std::string_view v) {
                           c.synth.*m = parse_double(k, v);
                       },
                       [m](const RunConfig& c) { return fmt_double(c.synth.*m); }};
        };
        synth_size("synth.n_genres", &SynthConfig::n_genres);
        synth_real("synth.zipf_exponent", &SynthConfig::zipf_exponent);
        synth_size("synth.head_count", &SynthConfig::head_count);
        synth_size("synth.bag_size_min", &SynthConfig::bag_size_min);
        synth_size("synth.bag_size_max", &SynthConfig::bag_size_max);
        synth_size("synth.feature_dim", &SynthConfig::feature_dim);
        synth_real("synth.centroid_separation", &SynthConfig::centroid_separation);
        synth_real("synth.noise_rate", &SynthConfig::noise_rate);
        synth_real("synth.eval_fraction", &SynthConfig::eval_fraction);
        synth_size("synth.eval_min_bags", &SynthConfig::eval_min_bags);
        return t;
    }();
    return table;
}

}  // namespace

bool is_known_feature_set(std::string_view name) {
    if (name == "synth") return true;
    try {
        feature_set_families(name);
        return true;
    } catch (const Error&) {
        return false;
    }
}

void set_config_value(RunConfig& config, std::string_view section, std::string_view key, std::string_view value) {
    const std::string full = section.empty() ? std::string(key) : fmt::format("{}.{}", section, key);
    const auto it = fields().find(full);
    if (it == fields().end()) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + full + "'");
    it->second.set(config, full, value);
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw Error(ErrorCode::InvalidConfig, "override '" + std::string(assignment) + "' is not key=value");
    }
    const auto name = detail::trim(assignment.substr(0, eq));
    const auto dot = name.find('.');
    if (dot == std::string_view::npos) {
        set_config_value(config, "", name, assignment.substr(eq + 1));
    } else {
        set_config_value(config, name.substr(0, dot), name.substr(dot + 1), assignment.substr(eq + 1));
    }
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("config line {}: {}", e.line(), e.message()));
    }
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            // an empty [section] parses as a childless node too
            const auto prefix = name + ".";
            const bool is_section = std::any_of(fields().begin(), fields().end(),
                                                [&](const auto& f) { return f.first.starts_with(prefix); });
            if (is_section && node.data().empty()) continue;
            set_config_value(base, "", name, node.data());
        } else {
            for (const auto& [key, leaf] : node) set_config_value(base, name, key, leaf.data());
        }
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    return parse_config(detail::read_file(path), std::move(base));
}

std::string format_config(const RunConfig& config) {
    std::string out = fmt::format("seed = {}\n", config.seed);
    std::string section;
    for (const auto& [name, field] : fields()) {
        const auto dot = name.find('.');
        if (dot == std::string::npos) continue;
        const auto s = name.substr(0, dot);
        if (s != section) {
            section = s;
            out += fmt::format("\n[{}]\n", section);
        }
        out += fmt::format("{} = {}\n", name.substr(dot + 1), field.get(config));
    }
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [name, field] : fields()) keys.push_back(name);
    return keys;
}

}  // namespace matt
