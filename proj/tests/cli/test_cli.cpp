#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include <doctest.h>

#include "matt/audio.hpp"
#include "matt/dsp.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = MATT_CLI_PATH;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("matt_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(const std::string& args, const fs::path& dir) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && MATT_LOG=warn '" + kCli + "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::set<std::string> flags_in(const std::string& help) {
    // option lines only: "  -h,--help  ..." or "  --seed UINT  ..."
    std::set<std::string> out;
    const std::regex flag("^\\s+(-[a-zA-Z],)?(--[a-z][a-z0-9-]*)");
    std::istringstream lines(help);
    std::string line;
    std::smatch m;
    while (std::getline(lines, line)) {
        if (std::regex_search(line, m, flag)) out.insert(m[2]);
    }
    return out;
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("--help enumerates every flag of every command") {
    const auto dir = scratch("help");
    const std::set<std::string> global = {"--help", "--version", "--config", "--set", "--seed"};
    const std::map<std::string, std::set<std::string>> expected = {
        {"extract-features",
         {"--audio-dir", "--metadata", "--feature-dir", "--workers", "--sample-rate", "--write-mel"}},
        {"build-bags", {"--metadata", "--label-policy", "--out"}},
        {"gen-synth",
         {"--out", "--genres", "--zipf", "--head-count", "--bag-min", "--bag-max", "--feature-dim", "--separation",
          "--noise-rate"}},
        {"train",
         {"--metadata", "--feature-dir", "--feature-set", "--aggregator", "--hidden", "--output-dim", "--epochs",
          "--batch", "--optimizer", "--lr", "--patience", "--label-policy", "--class-weighting", "--checkpoint-dir",
          "--checkpoint", "--segment-baseline"}},
        {"evaluate",
         {"--metadata", "--feature-dir", "--feature-set", "--aggregator", "--mode", "--subsets", "--ks",
          "--report-dir", "--checkpoint-dir", "--checkpoint"}},
        {"predict",
         {"--metadata", "--feature-dir", "--feature-set", "--aggregator", "--mode", "--checkpoint-dir",
          "--checkpoint", "--split", "--tracks", "--out"}},
        {"grad-check", {"--input-dim", "--genres", "--bag-size", "--bags", "--hidden", "--output-dim", "--aggregator"}},
        {"benchmark", {"--seeds", "--out", "--separation", "--noise-rate"}},
        {"show-config", {}},
    };

    const auto top = run("--help", dir);
    CHECK(top.code == 0);
    CHECK(flags_in(top.out) == global);
    for (const auto& [cmd, flags] : expected) {
        CAPTURE(cmd);
        CHECK(top.out.find(cmd) != std::string::npos);
        const auto help = run(cmd + " --help", dir);
        CHECK(help.code == 0);
        auto got = flags_in(help.out);
        CHECK(got.erase("--help") == 1);
        CHECK(got == flags);
        // every option line carries a description
        std::istringstream lines(help.out);
        std::string line;
        while (std::getline(lines, line)) {
            const auto pos = line.find("--");
            if (pos == std::string::npos || line.find_first_not_of(' ') != pos) continue;
            const auto desc = std::regex_replace(line, std::regex("^\\s*--[a-z0-9-]+( [A-Z:<>._ ]+)?\\s*"), "");
            CHECK_MESSAGE(desc.size() > 3, line);
        }
    }
}

TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    CHECK(run("", dir).code == 1);
    CHECK(run("frobnicate", dir).code == 1);
    const auto bad_flag = run("train --no-such-flag 3", dir);
    CHECK(bad_flag.code == 1);
    CHECK_FALSE(bad_flag.err.empty());
    CHECK(run("build-bags --metadata missing.csv", dir).code == 1);
    CHECK(run("show-config --set train.epochz=3", dir).code == 1);
    CHECK(run("--config missing.ini show-config", dir).code == 1);
    CHECK(run("show-config --set train.epochs=4", dir).code == 0);

    std::ofstream(dir / "metadata.csv") << "track_id,album_id,artist_id,genre,split\nt1,a,b,Rock,train\n";
    // features are missing: a runtime I/O failure
    fs::create_directories(dir / "feat");
    const auto r = run("train --metadata metadata.csv --feature-dir feat --feature-set 3+6", dir);
    CHECK(r.code != 0);
}

TEST_CASE("show-config reflects flags, --set and the config file in precedence order") {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.ini") << "seed = 3\n[train]\nepochs = 11\nlearning_rate = 0.5\n";
    const auto r = run("--config run.ini --set train.epochs=12 --seed 4 show-config", dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed = 4\n") != std::string::npos);
    CHECK(r.out.find("epochs = 12\n") != std::string::npos);
    CHECK(r.out.find("learning_rate = 0.5\n") != std::string::npos);
}

TEST_CASE("gen-synth is byte-reproducible") {
    const auto dir = scratch("synth");
    REQUIRE(run("gen-synth --seed 7 --out a", dir).code == 0);
    REQUIRE(run("gen-synth --seed 7 --out b", dir).code == 0);
    REQUIRE(run("gen-synth --seed 8 --out c", dir).code == 0);
    for (const char* file : {"metadata.csv", "features_synth.csv", "bags.csv", "oracle.txt"}) {
        CAPTURE(file);
        const auto a = slurp(dir / "a" / file);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir / "b" / file));
    }
    CHECK(slurp(dir / "a" / "features_synth.csv") != slurp(dir / "c" / "features_synth.csv"));
}

TEST_CASE("extract-features on a two-track corpus") {
    const auto dir = scratch("extract");
    fs::create_directories(dir / "audio");
    std::ofstream(dir / "metadata.csv") << "track_id,album_id,artist_id,genre,split\n"
                                           "t1,al1,ar1,Rock,train\n"
                                           "t2,al2,ar2,Jazz,test\n";
    for (auto [id, hz] : {std::pair{"t1", 220.0}, std::pair{"t2", 660.0}}) {
        matt::AudioSignal s;
        s.sample_rate_hz = 44100;
        for (int i = 0; i < 2 * 44100; ++i) s.samples.push_back(static_cast<float>(0.4 * std::sin(2 * M_PI * hz * i / 44100.0)));
        matt::write_wav((dir / "audio" / (std::string(id) + ".wav")).string(), s);
    }
    const std::string args = "extract-features --audio-dir audio --metadata metadata.csv --feature-dir feat --workers 2";
    const auto r = run(args, dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);

    const std::map<std::string, std::size_t> dims = {{"3+6", 189}, {"3+6+4", 196}, {"1to9", 518}, {"mfcc", 140}};
    std::size_t files = 0;
    for (const auto& name : matt::published_feature_sets()) {
        const auto path = dir / "feat" / ("features_" + name + ".csv");
        REQUIRE(fs::exists(path));
        const auto text = slurp(path);
        CHECK(line_count(text) == 3);  // header + 2 rows
        if (dims.count(name)) {
            const auto header = text.substr(0, text.find('\n'));
            CHECK(split(header, ',').size() == dims.at(name) + 1);
        }
        ++files;
    }
    CHECK(files == 14);
    CHECK(fs::file_size(dir / "feat" / "mel" / "t1.melf") == 16 + 96 * 1360 * 4);

    // rerun resumes from the per-track caches and reproduces the same bytes
    const auto before = slurp(dir / "feat" / "features_1to9.csv");
    REQUIRE(run(args, dir).code == 0);
    CHECK(slurp(dir / "feat" / "features_1to9.csv") == before);

    // a missing audio file is a runtime failure
    std::ofstream(dir / "metadata.csv", std::ios::app) << "t3,al3,ar3,Pop,test\n";
    CHECK(run(args, dir).code == 2);
}

TEST_CASE("train bag-level, evaluate segment-level, predict") {
    const auto dir = scratch("workflow");
    REQUIRE(run("gen-synth --seed 5 --out data", dir).code == 0);
    const std::string common = "--metadata data/metadata.csv --feature-dir data --feature-set synth";
    const auto t = run("--seed 5 train --aggregator matt --epochs 4 --checkpoint ck/m.ckpt " + common, dir);
    REQUIRE_MESSAGE(t.code == 0, t.err);
    CHECK(fs::exists(dir / "ck" / "m.ckpt"));
    CHECK(line_count(slurp(dir / "ck" / "m.ckpt.log.csv")) >= 2);

    // same seed, same checkpoint bytes
    REQUIRE(run("--seed 5 train --aggregator matt --epochs 4 --checkpoint ck/m2.ckpt " + common, dir).code == 0);
    CHECK(slurp(dir / "ck" / "m.ckpt") == slurp(dir / "ck" / "m2.ckpt"));

    const auto e = run("evaluate --mode segment --checkpoint ck/m.ckpt --report-dir rep " + common, dir);
    REQUIRE_MESSAGE(e.code == 0, e.err);
    CHECK(slurp(dir / "rep" / "topk.csv").rfind("subset,K,accuracy\n", 0) == 0);
    CHECK(slurp(dir / "rep" / "pr.csv").rfind("threshold,precision,recall\n", 0) == 0);
    CHECK_FALSE(slurp(dir / "rep" / "report.txt").empty());

    const auto p = run("predict --checkpoint ck/m.ckpt " + common, dir);
    REQUIRE_MESSAGE(p.code == 0, p.err);
    std::istringstream lines(p.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "track_id,predicted_genre,p_max,top5,attention");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        const auto f = split(line, ',');
        REQUIRE(f.size() == 5);
        const double p_max = std::stod(f[2]);
        CHECK(p_max > 0.0);
        CHECK(p_max <= 1.0);
        const auto top = split(f[3], ';');
        CHECK(top.size() == 5);
        CHECK(top.front() == f[1] + ":" + f[2]);
        const double a = std::stod(f[4]);
        CHECK(a > 0.0);
        CHECK(a <= 1.0);
        ++rows;
    }
    CHECK(rows > 0);

    const auto subset = run("predict --checkpoint ck/m.ckpt --split train --tracks trk000000,trk000001 " + common, dir);
    REQUIRE(subset.code == 0);
    CHECK(line_count(subset.out) == 3);
    // track ids outside the default split are still predicted
    CHECK(line_count(run("predict --checkpoint ck/m.ckpt --tracks trk000000 " + common, dir).out) == 2);
    CHECK(run("predict --checkpoint ck/m.ckpt --tracks nope " + common, dir).code == 1);
}

TEST_CASE("grad-check passes through the CLI") {
    const auto dir = scratch("grad");
    const auto r = run("--seed 3 grad-check --hidden 5 --output-dim 4", dir);
    CHECK_MESSAGE(r.code == 0, std::string(r.out + r.err));
}
