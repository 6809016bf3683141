#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "plugrisk/cli.hpp"
#include "plugrisk/serialize.hpp"

namespace fs = std::filesystem;
using plugrisk::io::json;

namespace {

const fs::path kSource = PLUGRISK_SOURCE_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = plugrisk::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("plugrisk-cli-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("verify-theorem1 default run") {
    const auto dir = scratch("t1");
    const auto r = cli({"verify-theorem1", "--out-dir", dir.string()});
    CHECK(r.code == 0);
    CHECK(lines(slurp(dir / "report.csv")) == 10001);
    const auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["violations"] == 0);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    for (const char* key : {"tool", "version", "subcommand", "seed", "config", "csv_schema_version", "csv_columns",
                            "started_at", "finished_at", "outputs"})
        CHECK(manifest.contains(key));
    CHECK(manifest["seed"] == 42);
    CHECK(manifest["subcommand"] == "verify-theorem1");
}

TEST_CASE("usage errors exit 2") {
    CHECK(cli({"verify-theorem1", "--trials", "0"}).code == 2);
    CHECK(cli({"verify-theorem2", "--trials", "0"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"no-such-command"}).code == 2);
    CHECK(cli({"pipeline"}).code == 2);
    CHECK(cli({"pipeline", "--config", (kSource / "configs" / "missing.json").string()}).code == 2);
    CHECK(cli({"lower-bounds", "--eps-prime", "0.45", "--gamma", "0.1", "--out-dir", scratch("lb-bad").string()}).code ==
          2);
    CHECK(cli({"lower-bounds", "--gamma", "0", "--out-dir", scratch("lb-bad2").string()}).code == 2);
    CHECK(cli({"smooth", "--ld", "3", "--out-dir", scratch("sm-bad").string()}).code == 2);
    CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("golden reports") {
    struct Case {
        std::vector<std::string> args;
        std::string file;
        std::string golden;
    };
    const std::vector<Case> cases{
        {{"verify-theorem1", "--trials", "20", "--seed", "7"}, "report.csv", "verify_theorem1_seed7_trials20.csv"},
        {{"verify-theorem2", "--trials", "20", "--seed", "7"}, "report.csv", "verify_theorem2_seed7_trials20.csv"},
        {{"lower-bounds", "--gamma", "0.1", "--grid", "6"}, "report.csv", "lower_bounds_grid6.csv"},
        {{"pipeline", "--config", (kSource / "configs" / "consistency_m16_k3.json").string()}, "summary.json",
         "pipeline_consistency_seed42_summary.json"},
    };
    int i = 0;
    for (auto c : cases) {
        CAPTURE(c.golden);
        const auto dir = scratch("golden" + std::to_string(i++));
        c.args.insert(c.args.end(), {"--out-dir", dir.string()});
        CHECK(cli(c.args).code == 0);
        CHECK(slurp(dir / c.file) == slurp(kSource / "tests" / "golden" / c.golden));
    }
}

TEST_CASE("replaying an instance file") {
    const auto dir = scratch("replay");
    const auto inst = plugrisk::example1_construction(0.1, 0.01);
    fs::create_directories(dir);
    plugrisk::io::write_text_file(dir / "instance.json", plugrisk::io::to_json(inst).dump());
    const auto r = cli({"verify-theorem1", "--replay", (dir / "instance.json").string()});
    CHECK(r.code == 0);
    const auto report = json::parse(r.out);
    CHECK(report["excess"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(report["bound"].get<double>() == doctest::Approx(0.22).epsilon(1e-12));

    // same file twice gives the same output
    CHECK(cli({"verify-theorem1", "--replay", (dir / "instance.json").string()}).out == r.out);

    // a malformed instance file is a usage error
    plugrisk::io::write_text_file(dir / "bad.json", "{\"priors\": [1]}");
    CHECK(cli({"verify-theorem1", "--replay", (dir / "bad.json").string()}).code == 2);
}

TEST_CASE("lower-bounds rows") {
    const auto dir = scratch("lb");
    CHECK(cli({"lower-bounds", "--eps-prime", "0.1", "--gamma", "0.01", "--out-dir", dir.string()}).code == 0);
    const auto summary = json::parse(slurp(dir / "summary.json"));
    const auto& ex1 = summary["rows"][0]["example1"];
    CHECK(ex1["risk_opt"].get<double>() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ex1["risk_plugin"].get<double>() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(ex1["bound"].get<double>() == doctest::Approx(0.22).epsilon(1e-12));

    const auto flat = scratch("lb0");
    CHECK(cli({"lower-bounds", "--eps-prime", "0", "--out-dir", flat.string()}).code == 0);
    const auto s0 = json::parse(slurp(flat / "summary.json"));
    CHECK(std::abs(s0["rows"][0]["example1"]["excess"].get<double>()) < 1e-12);
}

TEST_CASE("smooth suite") {
    const auto dir = scratch("smooth");
    const auto r = cli({"smooth", "--trials", "200", "--out-dir", dir.string()});
    CHECK(r.code == 0);
    CHECK(lines(slurp(dir / "report.csv")) == 201);
    CHECK(json::parse(slurp(dir / "summary.json"))["failures"] == 0);
}

TEST_CASE("pipeline with machine sources") {
    const auto dir = scratch("pdfa");
    const auto machines = kSource / "configs" / "machines";
    const auto r = cli({"pipeline", "--config", (kSource / "configs" / "consistency_m16_k3.json").string(), "--source",
                        "pdfa:" + (machines / "a_heavy.json").string(), "--source",
                        "pdfa:" + (machines / "b_heavy.json").string(), "--truncate", "8", "--trials", "10",
                        "--out-dir", dir.string()});
    CHECK(r.code == 0);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    // 1 + 2 + ... + 2^8 strings plus the overflow atom
    CHECK(manifest["config"]["classes"][0]["atoms"].size() == 512);
    CHECK(cli({"pipeline", "--config", (kSource / "configs" / "consistency_m16_k3.json").string(), "--source",
               "file:x", "--out-dir", scratch("pdfa-bad").string()})
              .code == 2);

    const auto cfg = scratch("pdfa-config");
    CHECK(cli({"pipeline", "--config", (kSource / "configs" / "pdfa_two_class.json").string(), "--out-dir",
               cfg.string()})
              .code == 0);
}

TEST_CASE("pipeline is deterministic for a seed") {
    const auto config = (kSource / "configs" / "logloss_m8_k2.json").string();
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    CHECK(cli({"pipeline", "--config", config, "--trials", "20", "--threads", "1", "--out-dir", a.string()}).code == 0);
    CHECK(cli({"pipeline", "--config", config, "--trials", "20", "--threads", "3", "--out-dir", b.string()}).code == 0);
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    const auto c = scratch("det-c");
    CHECK(cli({"pipeline", "--config", config, "--trials", "20", "--seed", "5", "--out-dir", c.string()}).code == 0);
    CHECK(slurp(a / "report.csv") != slurp(c / "report.csv"));
}

TEST_CASE("tightness") {
    const auto dir = scratch("tight");
    const auto r = cli({"tightness", "--out-dir", dir.string()});
    CHECK(r.code == 0);
    CHECK(json::parse(slurp(dir / "summary.json"))["ratio"].get<double>() >= 0.9);

    const auto zero = scratch("tight0");
    CHECK(cli({"tightness", "--epsilon", "0", "--out-dir", zero.string()}).code == 0);
    CHECK(json::parse(slurp(zero / "summary.json"))["ratio"].get<double>() == 0.0);

    const auto kl = scratch("tightkl");
    CHECK(cli({"tightness", "--metric", "kl", "--k", "3", "--domain-size", "3", "--trials", "2", "--out-dir",
               kl.string()})
              .code == 0);
    CHECK(json::parse(slurp(kl / "summary.json"))["ratio"].get<double>() <= 1.0 + 1e-9);
}
