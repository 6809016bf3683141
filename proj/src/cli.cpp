#include "plugrisk/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "plugrisk/bounds.hpp"
#include "plugrisk/error.hpp"
#include "plugrisk/pdfa.hpp"
#include "plugrisk/pipeline.hpp"
#include "plugrisk/serialize.hpp"
#include "plugrisk/smoothing.hpp"

namespace plugrisk {

namespace {

namespace fs = std::filesystem;
using io::format_double;
using io::json;

constexpr int kCsvSchemaVersion = 1;
constexpr double kClosedFormTolerance = 1e-12;
constexpr double kIdentityTolerance = 1e-9;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Collects everything needed to rerun a subcommand, written as manifest.json.
class RunRecorder {
public:
    RunRecorder(std::string subcommand, fs::path out_dir, std::uint64_t seed)
        : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)), seed_(seed), started_(utc_now()) {}

    json& config() { return config_; }

    void write(const std::string& name, const std::string& text) {
        io::write_text_file(out_dir_ / name, text);
        outputs_.push_back((out_dir_ / name).string());
    }

    void set_columns(const std::string& header) { columns_ = header; }

    void finish() {
        json manifest = {{"tool", "plugrisk"},
                         {"version", kToolVersion},
                         {"subcommand", subcommand_},
                         {"seed", seed_},
                         {"config", config_},
                         {"csv_schema_version", kCsvSchemaVersion},
                         {"csv_columns", columns_},
                         {"started_at", started_},
                         {"finished_at", utc_now()}};
        outputs_.push_back((out_dir_ / "manifest.json").string());
        manifest["outputs"] = outputs_;
        io::write_text_file(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    std::string subcommand_;
    fs::path out_dir_;
    std::uint64_t seed_;
    std::string started_;
    std::string columns_;
    json config_ = json::object();
    std::vector<std::string> outputs_;
};

struct Common {
    std::uint64_t seed = 42;
    std::string out_dir = "plugrisk-out";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "master random seed")->capture_default_str();
    sub->add_option("--out-dir", c.out_dir, "directory for report.csv, summary.json, manifest.json")
        ->capture_default_str();
}

// ---------------------------------------------------------------------------

struct TheoremOptions {
    Common common;
    std::size_t trials = 10000;
    std::size_t k_max = 5;
    std::size_t m_max = 64;
    std::string replay;
};

int replay_instance(const std::string& path, bool theorem2, std::ostream& out) {
    const Instance inst = io::instance_from_json(io::read_json_file(path));
    const SuiteRow row = theorem2 ? evaluate_theorem2(inst) : evaluate_theorem1(inst);
    json j = io::to_json(row.report);
    if (theorem2) {
        j["identity_lhs"] = io::number(row.identity.lhs);
        j["identity_rhs"] = io::number(row.identity.rhs);
        j["identity_ok"] = row.identity_ok;
    }
    out << j.dump(2) << "\n";
    return row.ok() ? kExitOk : kExitViolation;
}

int cmd_verify_theorem(const TheoremOptions& o, bool theorem2, std::ostream& out) {
    if (!o.replay.empty()) return replay_instance(o.replay, theorem2, out);

    const SuiteOptions suite{o.trials, o.common.seed, 2, o.k_max, 2, o.m_max};
    const auto rows = theorem2 ? run_theorem2_suite(suite) : run_theorem1_suite(suite);

    RunRecorder rec(theorem2 ? "verify-theorem2" : "verify-theorem1", o.common.out_dir, o.common.seed);
    rec.config() = {{"trials", o.trials}, {"k_max", o.k_max}, {"domain_size_max", o.m_max}};

    std::string header = "index,k,m,epsilon," + io::csv_header(BoundReport{});
    if (theorem2) header += ",identity_lhs,identity_rhs,identity_gap,identity_ok";
    rec.set_columns(header);
    std::ostringstream csv;
    csv << header << "\n";
    std::size_t violations = 0;
    double max_ratio = 0.0;
    double max_identity_gap = 0.0;
    json violation_files = json::array();
    for (const auto& row : rows) {
        csv << row.index << ',' << row.k << ',' << row.m << ',' << format_double(row.report.epsilon) << ','
            << io::csv_row(row.report);
        if (theorem2) {
            csv << ',' << format_double(row.identity.lhs) << ',' << format_double(row.identity.rhs) << ','
                << format_double(row.identity.gap()) << ',' << (row.identity_ok ? 1 : 0);
            if (std::isfinite(row.identity.rhs)) max_identity_gap = std::max(max_identity_gap, row.identity.gap());
        }
        csv << "\n";
        if (std::isfinite(row.report.bound) && row.report.bound > 0.0) {
            max_ratio = std::max(max_ratio, row.report.excess / row.report.bound);
        }
        if (!row.ok()) {
            ++violations;
            const Instance inst =
                theorem2 ? theorem2_suite_instance(suite, row.index) : theorem1_suite_instance(suite, row.index);
            const std::string name = "violation_" + std::to_string(row.index) + ".json";
            rec.write(name, io::to_json(inst).dump(2) + "\n");
            violation_files.push_back(name);
        }
    }
    rec.write("report.csv", csv.str());
    json summary = {{"trials", rows.size()},
                    {"violations", violations},
                    {"max_excess_to_bound_ratio", max_ratio},
                    {"violation_instances", violation_files}};
    if (theorem2) summary["max_identity_gap"] = max_identity_gap;
    rec.write("summary.json", summary.dump(2) + "\n");
    rec.finish();
    out << (theorem2 ? "theorem2" : "theorem1") << ": " << rows.size() << " instances, " << violations
        << " violations, max excess/bound " << format_double(max_ratio) << "\n";
    return violations == 0 ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------

struct LowerBoundOptions {
    Common common;
    double eps_prime = 0.1;
    double gamma = 0.01;
    std::size_t grid = 1;
};

int cmd_lower_bounds(const LowerBoundOptions& o, std::ostream& out, std::ostream& err) {
    std::vector<double> gammas;
    for (std::size_t j = 0; j < o.grid; ++j) gammas.push_back(o.gamma * std::pow(10.0, -static_cast<double>(j)));
    if (!(o.eps_prime >= 0.0) || !(o.gamma > 0.0) || !(o.eps_prime + o.gamma < 0.5)) {
        err << "lower-bounds: need eps-prime >= 0, gamma > 0 and eps-prime + gamma < 0.5\n";
        return kExitUsage;
    }

    RunRecorder rec("lower-bounds", o.common.out_dir, o.common.seed);
    rec.config() = {{"eps_prime", o.eps_prime}, {"gamma", o.gamma}, {"grid", o.grid}};
    const std::string header =
        "eps_prime,gamma,l1_per_class,epsilon,risk_opt,risk_plugin,excess,bound,slack,"
        "kl_per_class,logloss_opt,logloss_plugin,logloss_excess,identity_gap,closed_form_ok";
    rec.set_columns(header);
    std::ostringstream csv;
    csv << header << "\n";
    bool all_ok = true;
    json rows = json::array();
    for (double gamma : gammas) {
        const Instance ex1 = example1_construction(o.eps_prime, gamma);
        const BoundReport r1 = check_theorem1(ex1.source, ex1.estimates, *ex1.cost);
        const double l1 = l1_distance(ex1.source.class_dist(0), ex1.estimates[0]);

        const Instance ex2 = example2_construction(o.eps_prime, gamma);
        const BoundReport r2 = check_theorem2(ex2.source, ex2.estimates);
        const double kl = kl_divergence(ex2.source.class_dist(0), ex2.estimates[0]);
        const IdentityCheck id = excess_logloss_identity(ex2.source, ex2.estimates);

        const double max_cost = ex1.cost->max_entry();
        const bool ok = std::abs(r1.risk_opt - (0.5 - o.eps_prime)) <= kClosedFormTolerance &&
                        std::abs(r1.risk_plugin - (0.5 + o.eps_prime)) <= kClosedFormTolerance &&
                        std::abs(r1.slack - 2.0 * gamma * max_cost) <= kClosedFormTolerance &&
                        std::abs(r2.excess - kl) <= kIdentityTolerance && id.gap() <= kIdentityTolerance &&
                        r1.satisfied && r2.satisfied;
        all_ok = all_ok && ok;
        csv << format_double(o.eps_prime) << ',' << format_double(gamma) << ',' << format_double(l1) << ','
            << format_double(r1.epsilon) << ',' << format_double(r1.risk_opt) << ',' << format_double(r1.risk_plugin)
            << ',' << format_double(r1.excess) << ',' << format_double(r1.bound) << ',' << format_double(r1.slack)
            << ',' << format_double(kl) << ',' << format_double(r2.risk_opt) << ','
            << format_double(r2.risk_plugin) << ',' << format_double(r2.excess) << ',' << format_double(id.gap())
            << ',' << (ok ? 1 : 0) << "\n";
        rows.push_back({{"gamma", gamma}, {"example1", io::to_json(r1)}, {"example2", io::to_json(r2)},
                        {"l1_per_class", l1}, {"kl_per_class", kl}, {"closed_form_ok", ok}});
        out << "eps'=" << format_double(o.eps_prime) << " gamma=" << format_double(gamma)
            << " R(f*)=" << format_double(r1.risk_opt) << " R(f')=" << format_double(r1.risk_plugin)
            << " bound=" << format_double(r1.bound) << " slack=" << format_double(r1.slack)
            << " KL=" << format_double(kl) << (ok ? "" : "  MISMATCH") << "\n";
    }
    rec.write("report.csv", csv.str());
    rec.write("summary.json", json{{"rows", rows}, {"all_closed_forms_hold", all_ok}}.dump(2) + "\n");
    rec.finish();
    return all_ok ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------

struct SmoothOptions {
    Common common;
    double epsilon = 0.5;
    std::uint64_t ld = 0;  // 0: m * b
    std::size_t m = 8;
    unsigned bits = 8;
    std::size_t trials = 1000;
};

int cmd_smooth(const SmoothOptions& o, std::ostream& out, std::ostream& err) {
    const QuantizedClassSpec spec(Domain::indexed(o.m), o.bits);
    const std::uint64_t ld = o.ld == 0 ? spec.description_length : o.ld;
    if (ld < spec.description_length) {
        err << "smooth: --ld must be at least domain-size * bits (" << spec.description_length << ")\n";
        return kExitUsage;
    }
    const SmoothingParams params(o.epsilon, ld);
    const BaseDistribution base = base_mixture(spec);

    RunRecorder rec("smooth", o.common.out_dir, o.common.seed);
    rec.config() = {{"epsilon", o.epsilon}, {"ld", ld}, {"domain_size", o.m}, {"bits", o.bits}, {"trials", o.trials}};
    const std::string header =
        "trial,xi,l1_actual,l1_smoothing,kl_actual,certificate,certificate_floor,within,under_certificate";
    rec.set_columns(header);
    std::ostringstream csv;
    csv << header << "\n";
    std::size_t failures = 0;
    double worst_kl = 0.0;
    for (std::size_t t = 0; t < o.trials; ++t) {
        Rng rng = make_rng(o.common.seed, t);
        const Distribution truth = random_quantized(spec, rng);
        const Distribution estimate = random_l1_perturbation(truth, params.xi, rng);
        const SmoothingReport r = verify_smoothing(truth, estimate, params, base);
        const bool under = r.kl_actual <= r.certificate;
        if (!r.within || !under) ++failures;
        worst_kl = std::max(worst_kl, r.kl_actual);
        csv << t << ',' << format_double(r.xi) << ',' << format_double(r.l1_actual) << ','
            << format_double(r.l1_smoothing) << ',' << format_double(r.kl_actual) << ','
            << format_double(r.certificate) << ',' << format_double(r.certificate_floor) << ','
            << (r.within ? 1 : 0) << ',' << (under ? 1 : 0) << "\n";
    }
    rec.write("report.csv", csv.str());
    rec.write("summary.json", json{{"trials", o.trials},
                                   {"failures", failures},
                                   {"xi", params.xi},
                                   {"certificate", kl_certificate(params)},
                                   {"max_kl", worst_kl}}
                                      .dump(2) +
                                  "\n");
    rec.finish();
    out << "smooth: xi=" << format_double(params.xi) << " certificate=" << format_double(kl_certificate(params))
        << " max KL=" << format_double(worst_kl) << " failures=" << failures << "\n";
    return failures == 0 ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------

struct PipelineOptions {
    Common common;
    std::string config;
    std::vector<std::string> sources;
    std::size_t truncate = 8;
    std::size_t trials = 0;  // 0: from config
    std::size_t threads = 0;
    bool seed_given = false;
};

int cmd_pipeline(const PipelineOptions& o, std::ostream& out, std::ostream& err) {
    const fs::path config_path(o.config);
    json j = io::read_json_file(config_path);
    if (!o.sources.empty()) {
        json classes = json::array();
        for (const auto& s : o.sources) {
            const std::string prefix = "pdfa:";
            if (s.rfind(prefix, 0) != 0) {
                err << "pipeline: --source must look like pdfa:<machine file>\n";
                return kExitUsage;
            }
            classes.push_back({{"pdfa", fs::absolute(s.substr(prefix.size())).string()}, {"truncate", o.truncate}});
        }
        j["classes"] = classes;
        if (j.contains("priors") && j["priors"].size() != classes.size()) j.erase("priors");
        if (j.contains("cost") && j["cost"].size() != classes.size()) {
            j.erase("cost");
            if (!j.contains("mode")) j["mode"] = "cost";
        }
    }
    if (o.trials != 0) j["trials"] = o.trials;
    if (o.seed_given) j["seed"] = o.common.seed;

    TrialConfig config = io::trial_config_from_json(j, config_path.parent_path());
    config.threads = o.threads;
    const ExperimentSummary summary = run_pac_experiment(config);

    RunRecorder rec("pipeline", o.common.out_dir, config.seed);
    rec.config() = io::to_json(config);
    const std::size_t k = config.source.num_classes();
    std::string header = "grid_index,sample_size,trial,risk_opt,risk_plugin,excess,epsilon_achieved,bound_achieved,"
                         "bound_satisfied";
    for (std::size_t i = 0; i < k; ++i) header += ",count_" + std::to_string(i);
    for (std::size_t i = 0; i < k; ++i) header += ",l1_" + std::to_string(i);
    for (std::size_t i = 0; i < k; ++i) header += ",kl_" + std::to_string(i);
    rec.set_columns(header);
    std::ostringstream csv;
    csv << header << "\n";
    std::size_t failures = 0;
    for (std::size_t g = 0; g < summary.trials.size(); ++g) {
        for (std::size_t t = 0; t < summary.trials[g].size(); ++t) {
            const TrialOutcome& o_t = summary.trials[g][t];
            csv << g << ',' << o_t.sample_size << ',' << t << ',' << format_double(o_t.risk_opt) << ','
                << format_double(o_t.risk_plugin) << ',' << format_double(o_t.excess) << ','
                << format_double(o_t.epsilon_achieved) << ',' << format_double(o_t.bound_achieved) << ','
                << (o_t.bound_satisfied ? 1 : 0);
            for (auto c : o_t.class_counts) csv << ',' << c;
            for (double v : o_t.l1) csv << ',' << format_double(v);
            for (double v : o_t.kl) csv << ',' << format_double(v);
            csv << "\n";
            if (!o_t.bound_satisfied) ++failures;
        }
    }
    json grid = json::array();
    for (const auto& point : summary.grid) {
        grid.push_back(io::to_json(point));
        out << "n=" << point.sample_size << " median excess=" << format_double(point.excess.median)
            << " violation fraction=" << format_double(point.violation_fraction) << "\n";
    }
    rec.write("report.csv", csv.str());
    rec.write("summary.json", json{{"mode", config.cost ? "cost" : "logloss"},
                                   {"trials", config.trials},
                                   {"epsilon_target", config.epsilon_target},
                                   {"delta_target", config.delta_target},
                                   {"conditional_validity_failures", failures},
                                   {"grid", grid}}
                                      .dump(2) +
                                  "\n");
    rec.finish();
    return failures == 0 ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------

struct TightnessOptions {
    Common common;
    std::size_t k = 2;
    std::size_t m = 2;
    double epsilon = 0.1;
    std::string metric = "l1";
    std::size_t restarts = 8;
    std::string cost_file;
};

int cmd_tightness(const TightnessOptions& o, std::ostream& out, std::ostream& err) {
    const CostMatrix cost =
        o.cost_file.empty() ? CostMatrix::zero_one(o.k) : io::cost_from_json(io::read_json_file(o.cost_file));
    if (cost.size() != o.k) {
        err << "tightness: cost matrix must be " << o.k << " x " << o.k << "\n";
        return kExitUsage;
    }
    const PerturbationBudget budget(o.metric == "kl" ? Metric::KL : Metric::L1, o.epsilon);
    Rng rng(o.common.seed);
    const TightnessResult r = tightness_search(o.k, o.m, cost, budget, o.restarts, rng);

    RunRecorder rec("tightness", o.common.out_dir, o.common.seed);
    rec.config() = {{"k", o.k}, {"domain_size", o.m}, {"epsilon", o.epsilon}, {"metric", o.metric},
                    {"restarts", o.restarts}, {"cost", io::to_json(cost)}};
    const std::string header = "k,m,metric,epsilon,excess,bound,ratio,evaluations";
    rec.set_columns(header);
    std::ostringstream csv;
    csv << header << "\n"
        << o.k << ',' << o.m << ',' << o.metric << ',' << format_double(o.epsilon) << ',' << format_double(r.excess)
        << ',' << format_double(r.bound) << ',' << format_double(r.ratio) << ',' << r.evaluations << "\n";
    rec.write("report.csv", csv.str());
    rec.write("summary.json", json{{"ratio", r.ratio},
                                   {"excess", r.excess},
                                   {"bound", r.bound},
                                   {"evaluations", r.evaluations},
                                   {"best_instance", io::to_json(r.best)}}
                                      .dump(2) +
                                  "\n");
    rec.finish();
    out << "tightness: best excess/bound ratio " << format_double(r.ratio) << "\n";
    return r.ratio <= 1.0 + kBoundTolerance ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Plug-in Bayes classifier risk bounds: verification suites and experiments", "plugrisk"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    TheoremOptions t1;
    TheoremOptions t2;
    auto add_theorem = [&](const char* name, const char* desc, TheoremOptions& o) {
        auto* sub = app.add_subcommand(name, desc);
        add_common(sub, o.common);
        sub->add_option("--trials", o.trials, "number of random instances")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--k", o.k_max, "largest class count")->check(CLI::Range(2, 64))->capture_default_str();
        sub->add_option("--domain-size", o.m_max, "largest domain size")
            ->check(CLI::Range(2, 100000))
            ->capture_default_str();
        sub->add_option("--replay", o.replay, "recompute one report from an instance file")
            ->check(CLI::ExistingFile);
        return sub;
    };
    auto* sub_t1 = add_theorem("verify-theorem1", "randomized L1 / cost-matrix bound suite", t1);
    auto* sub_t2 = add_theorem("verify-theorem2", "randomized KL / log-loss bound suite with identity check", t2);

    LowerBoundOptions lb;
    auto* sub_lb = app.add_subcommand("lower-bounds", "evaluate the two-atom lower-bound constructions");
    add_common(sub_lb, lb.common);
    sub_lb->add_option("--eps-prime", lb.eps_prime, "class separation")->capture_default_str();
    sub_lb->add_option("--gamma", lb.gamma, "estimate offset")->capture_default_str();
    sub_lb->add_option("--grid", lb.grid, "number of gamma decades: gamma, gamma/10, ...")
        ->check(CLI::Range(1, 15))
        ->capture_default_str();

    SmoothOptions sm;
    auto* sub_sm = app.add_subcommand("smooth", "randomized L1-to-KL smoothing suite");
    add_common(sub_sm, sm.common);
    sub_sm->add_option("--epsilon", sm.epsilon, "target KL accuracy (bits)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub_sm->add_option("--ld", sm.ld, "description length in bits (default domain-size * bits)");
    sub_sm->add_option("--domain-size", sm.m, "atoms in the quantized domain")
        ->check(CLI::Range(1, 4096))
        ->capture_default_str();
    sub_sm->add_option("--bits", sm.bits, "bits per atom")->check(CLI::Range(1, 30))->capture_default_str();
    sub_sm->add_option("--trials", sm.trials, "random instances")->check(CLI::PositiveNumber)->capture_default_str();

    PipelineOptions pl;
    auto* sub_pl = app.add_subcommand("pipeline", "PAC classification experiment from a config file");
    add_common(sub_pl, pl.common);
    sub_pl->add_option("--config", pl.config, "experiment config (JSON)")->required();
    sub_pl->add_option("--source", pl.sources, "class distribution pdfa:<machine file>; repeat once per class");
    sub_pl->add_option("--truncate", pl.truncate, "max string length for machine sources")->capture_default_str();
    sub_pl->add_option("--trials", pl.trials, "override the config's trial count")->check(CLI::PositiveNumber);
    sub_pl->add_option("--threads", pl.threads, "worker threads (0: all cores)");

    TightnessOptions tg;
    auto* sub_tg = app.add_subcommand("tightness", "search for instances close to the theorem bounds");
    add_common(sub_tg, tg.common);
    sub_tg->add_option("--k", tg.k, "classes")->check(CLI::Range(2, 16))->capture_default_str();
    sub_tg->add_option("--domain-size", tg.m, "atoms")->check(CLI::Range(1, 256))->capture_default_str();
    sub_tg->add_option("--epsilon", tg.epsilon, "budget")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub_tg->add_option("--metric", tg.metric, "l1 or kl")->check(CLI::IsMember({"l1", "kl"}))->capture_default_str();
    sub_tg->add_option("--restarts,--trials", tg.restarts, "random restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub_tg->add_option("--cost-file", tg.cost_file, "cost matrix JSON (default 0/1)")->check(CLI::ExistingFile);

    std::vector<std::string> argv_storage{"plugrisk"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (sub_t1->parsed()) return cmd_verify_theorem(t1, false, out);
        if (sub_t2->parsed()) return cmd_verify_theorem(t2, true, out);
        if (sub_lb->parsed()) return cmd_lower_bounds(lb, out, err);
        if (sub_sm->parsed()) return cmd_smooth(sm, out, err);
        if (sub_pl->parsed()) {
            pl.seed_given = sub_pl->count("--seed") > 0;
            return cmd_pipeline(pl, out, err);
        }
        if (sub_tg->parsed()) return cmd_tightness(tg, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace plugrisk
