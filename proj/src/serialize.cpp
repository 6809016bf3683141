#include "plugrisk/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "plugrisk/error.hpp"

namespace plugrisk::io {

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::vector<double> doubles(const json& j) {
    if (!j.is_array()) throw Error("expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(to_double(v));
    return out;
}

}  // namespace

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double to_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw Error("expected a number");
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const Distribution& d) {
    return {{"atoms", d.domain()->atoms()}, {"mass", std::vector<double>(d.mass().begin(), d.mass().end())}};
}

Distribution distribution_from_json(const json& j, const DomainPtr& domain) {
    auto atoms = field(j, "atoms").get<std::vector<std::string>>();
    DomainPtr dom = (domain && domain->atoms() == atoms) ? domain : Domain::make(std::move(atoms));
    return Distribution(std::move(dom), doubles(field(j, "mass")));
}

json to_json(const CostMatrix& c) { return c.rows(); }

CostMatrix cost_from_json(const json& j) {
    if (!j.is_array()) throw Error("cost must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) rows.push_back(doubles(row));
    return CostMatrix(rows);
}

namespace {

std::vector<Distribution> distributions_from_json(const json& j, DomainPtr& shared) {
    if (!j.is_array()) throw Error("expected an array of distributions");
    std::vector<Distribution> out;
    for (const auto& d : j) {
        out.push_back(distribution_from_json(d, shared));
        shared = out.back().domain();
    }
    return out;
}

}  // namespace

json to_json(const LabeledSource& s) {
    json classes = json::array();
    for (const auto& d : s.classes()) classes.push_back(to_json(d));
    return {{"priors", s.priors()}, {"classes", classes}};
}

LabeledSource source_from_json(const json& j) {
    DomainPtr shared;
    auto classes = distributions_from_json(field(j, "classes"), shared);
    return LabeledSource(doubles(field(j, "priors")), std::move(classes));
}

json to_json(const Instance& inst) {
    json j = to_json(inst.source);
    json est = json::array();
    for (const auto& d : inst.estimates) est.push_back(to_json(d));
    j["estimates"] = est;
    if (inst.cost) j["cost"] = to_json(*inst.cost);
    return j;
}

Instance instance_from_json(const json& j) {
    DomainPtr shared;
    auto classes = distributions_from_json(field(j, "classes"), shared);
    auto estimates = distributions_from_json(field(j, "estimates"), shared);
    Instance inst{LabeledSource(doubles(field(j, "priors")), std::move(classes)), std::move(estimates), std::nullopt};
    if (j.contains("cost") && !j.at("cost").is_null()) inst.cost = cost_from_json(j.at("cost"));
    return inst;
}

json to_json(const BoundReport& r) {
    return {{"epsilon", number(r.epsilon)}, {"risk_opt", number(r.risk_opt)},
            {"risk_plugin", number(r.risk_plugin)}, {"excess", number(r.excess)},
            {"bound", number(r.bound)}, {"slack", number(r.slack)},
            {"satisfied", r.satisfied}};
}

std::string csv_header(const BoundReport&) { return "risk_opt,risk_plugin,excess,bound,slack,satisfied"; }

std::string csv_row(const BoundReport& r) {
    std::ostringstream os;
    os << format_double(r.risk_opt) << ',' << format_double(r.risk_plugin) << ',' << format_double(r.excess) << ','
       << format_double(r.bound) << ',' << format_double(r.slack) << ',' << (r.satisfied ? 1 : 0);
    return os.str();
}

json to_json(const SmoothingReport& r) {
    return {{"xi", number(r.xi)},
            {"l1_actual", number(r.l1_actual)},
            {"l1_smoothing", number(r.l1_smoothing)},
            {"kl_actual", number(r.kl_actual)},
            {"certificate", number(r.certificate)},
            {"certificate_floor", number(r.certificate_floor)},
            {"within", r.within}};
}

json to_json(const Pdfa& a) {
    json alphabet = json::array();
    for (char c : a.alphabet()) alphabet.push_back(std::string(1, c));
    json states = json::array();
    for (std::size_t q = 0; q < a.num_states(); ++q) {
        json trans = json::object();
        for (std::size_t s = 0; s < a.alphabet().size(); ++s) {
            const double p = a.transition_probability(q, s);
            if (p == 0.0) continue;
            trans[std::string(1, a.alphabet()[s])] = {{"p", p}, {"to", a.states()[q].target[s]}};
        }
        states.push_back({{"stop", a.stop_probability(q)}, {"trans", trans}});
    }
    return {{"n", a.num_states()}, {"alphabet", alphabet}, {"precision", a.precision()},
            {"initial", a.initial()}, {"states", states}};
}

Pdfa pdfa_from_json(const json& j) {
    std::string alphabet;
    for (const auto& sym : field(j, "alphabet")) {
        const auto s = sym.get<std::string>();
        if (s.size() != 1) throw Error("alphabet symbols must be single characters");
        alphabet += s;
    }
    const auto& states_json = field(j, "states");
    const auto n = field(j, "n").get<std::size_t>();
    if (!states_json.is_array() || states_json.size() != n) throw Error("state count does not match 'n'");
    std::vector<Pdfa::StateSpec> specs;
    for (const auto& st : states_json) {
        Pdfa::StateSpec spec;
        spec.stop = to_double(field(st, "stop"));
        if (st.contains("trans")) {
            for (const auto& [sym, edge] : st.at("trans").items()) {
                if (sym.size() != 1) throw Error("transition symbols must be single characters");
                spec.transitions[sym[0]] = {to_double(field(edge, "p")), field(edge, "to").get<std::size_t>()};
            }
        }
        specs.push_back(std::move(spec));
    }
    return Pdfa::from_probabilities(std::move(alphabet), field(j, "precision").get<unsigned>(),
                                    field(j, "initial").get<std::size_t>(), specs);
}

namespace {

Distribution class_from_config(const json& j, const std::filesystem::path& base_dir, const DomainPtr& shared) {
    if (j.contains("pdfa")) {
        const json& machine = j.at("pdfa");
        const Pdfa a = machine.is_string() ? pdfa_from_json(read_json_file(base_dir / machine.get<std::string>()))
                                           : pdfa_from_json(machine);
        Distribution d = truncate(a, field(j, "truncate").get<std::size_t>());
        if (shared && *shared == *d.domain()) return Distribution(shared, std::vector<double>(d.mass().begin(), d.mass().end()));
        return d;
    }
    return distribution_from_json(j, shared);
}

}  // namespace

TrialConfig trial_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    DomainPtr shared;
    std::vector<Distribution> classes;
    const auto& classes_json = field(j, "classes");
    if (!classes_json.is_array()) throw Error("'classes' must be an array");
    for (const auto& c : classes_json) {
        classes.push_back(class_from_config(c, base_dir, shared));
        shared = classes.back().domain();
    }
    std::vector<double> priors;
    if (j.contains("priors")) {
        priors = doubles(j.at("priors"));
    } else {
        priors.assign(classes.size(), 1.0 / static_cast<double>(classes.size()));
    }
    TrialConfig c{LabeledSource(std::move(priors), std::move(classes))};

    const std::string mode = j.value("mode", j.contains("cost") ? "cost" : "logloss");
    if (mode == "cost") {
        c.cost = j.contains("cost") ? cost_from_json(j.at("cost")) : CostMatrix::zero_one(c.source.num_classes());
    } else if (mode != "logloss") {
        throw Error("mode must be 'cost' or 'logloss'");
    }

    c.sample_size = j.value("sample_size", c.sample_size);
    if (j.contains("sample_grid")) c.sample_grid = j.at("sample_grid").get<std::vector<std::size_t>>();
    const std::string estimator = j.value("estimator", c.cost ? "empirical" : "add_lambda");
    if (estimator == "empirical") {
        c.estimator = Estimator::empirical();
    } else if (estimator == "add_lambda") {
        c.estimator = Estimator::add_lambda(j.value("lambda", 1.0));
    } else {
        throw Error("estimator must be 'empirical' or 'add_lambda'");
    }
    c.trials = j.value("trials", c.trials);
    c.epsilon_target = j.value("epsilon_target", c.epsilon_target);
    c.delta_target = j.value("delta_target", c.delta_target);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

json to_json(const TrialConfig& c) {
    json j = to_json(c.source);
    j["mode"] = c.cost ? "cost" : "logloss";
    if (c.cost) j["cost"] = to_json(*c.cost);
    j["sample_size"] = c.sample_size;
    j["sample_grid"] = c.grid();
    j["estimator"] = c.estimator.kind == Estimator::Kind::Empirical ? "empirical" : "add_lambda";
    j["lambda"] = c.estimator.effective_lambda();
    j["trials"] = c.trials;
    j["epsilon_target"] = c.epsilon_target;
    j["delta_target"] = c.delta_target;
    j["seed"] = c.seed;
    return j;
}

json to_json(const Quantiles& q) {
    return {{"min", number(q.min)},       {"q25", number(q.q25)}, {"median", number(q.median)},
            {"q75", number(q.q75)},       {"max", number(q.max)}, {"mean", number(q.mean)}};
}

json to_json(const GridPoint& g) {
    return {{"sample_size", g.sample_size},
            {"violation_fraction", g.violation_fraction},
            {"meets_delta", g.meets_delta},
            {"excess", to_json(g.excess)},
            {"l1", to_json(g.l1)},
            {"kl", to_json(g.kl)},
            {"infinite_kl", g.infinite_kl},
            {"conditional_validity_failures", g.conditional_validity_failures}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace plugrisk::io
