#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "plugrisk/bounds.hpp"
#include "plugrisk/classify.hpp"
#include "plugrisk/cli.hpp"
#include "plugrisk/dist_core.hpp"
#include "plugrisk/error.hpp"
#include "plugrisk/pdfa.hpp"
#include "plugrisk/pipeline.hpp"
#include "plugrisk/serialize.hpp"
#include "plugrisk/smoothing.hpp"

namespace py = pybind11;
using namespace plugrisk;

namespace {

Distribution make_dist(const std::vector<std::string>& atoms, std::vector<double> weights) {
    return make_distribution(Domain::make(atoms), std::move(weights));
}

std::vector<Distribution> share_domain(const std::vector<Distribution>& ds) {
    // Python callers build each distribution separately; rebind to one domain.
    std::vector<Distribution> out;
    for (const auto& d : ds) {
        if (!out.empty() && d.same_domain(out.front())) {
            out.emplace_back(out.front().domain(), std::vector<double>(d.mass().begin(), d.mass().end()));
        } else {
            out.push_back(d);
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Plug-in Bayes classifier risk bounds";
    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    py::class_<Distribution>(m, "Distribution")
        .def(py::init(&make_dist), py::arg("atoms"), py::arg("weights"))
        .def_property_readonly("atoms", [](const Distribution& d) { return d.domain()->atoms(); })
        .def_property_readonly("mass", [](const Distribution& d) {
            return std::vector<double>(d.mass().begin(), d.mass().end());
        })
        .def("__len__", &Distribution::size)
        .def("to_json", [](const Distribution& d) { return io::to_json(d).dump(); });

    m.def("l1_distance", &l1_distance);
    m.def("kl_divergence", &kl_divergence);
    m.def("mixture", [](const std::vector<std::pair<double, Distribution>>& components) {
        return mixture(components);
    });

    py::class_<CostMatrix>(m, "CostMatrix")
        .def(py::init<const std::vector<std::vector<double>>&>())
        .def_static("zero_one", &CostMatrix::zero_one)
        .def("rows", &CostMatrix::rows)
        .def("max_entry", &CostMatrix::max_entry);

    py::class_<LabeledSource>(m, "LabeledSource")
        .def(py::init([](std::vector<double> priors, const std::vector<Distribution>& classes) {
                 return LabeledSource(std::move(priors), share_domain(classes));
             }),
             py::arg("priors"), py::arg("classes"))
        .def_property_readonly("priors", &LabeledSource::priors)
        .def_property_readonly("classes", &LabeledSource::classes)
        .def("marginal", py::overload_cast<>(&LabeledSource::marginal, py::const_));

    m.def("bayes_classifier", [](const LabeledSource& s, const CostMatrix& c) { return bayes_classifier(s, c).labels(); });
    m.def("risk", [](const std::vector<Label>& labels, const LabeledSource& s, const CostMatrix& c) {
        return risk(Classifier(s.num_classes(), labels), s, c);
    });
    m.def("posterior", &posterior);
    m.def("posterior_rule", [](const LabeledSource& s) { return posterior_rule(s).rows(); });
    m.def("logloss_risk", [](const std::vector<std::vector<double>>& rows, const LabeledSource& s) {
        return logloss_risk(StochasticRule(s.num_classes(), rows), s);
    });

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("epsilon", &BoundReport::epsilon)
        .def_readonly("risk_opt", &BoundReport::risk_opt)
        .def_readonly("risk_plugin", &BoundReport::risk_plugin)
        .def_readonly("excess", &BoundReport::excess)
        .def_readonly("bound", &BoundReport::bound)
        .def_readonly("slack", &BoundReport::slack)
        .def_readonly("satisfied", &BoundReport::satisfied);

    py::class_<Instance>(m, "Instance")
        .def_readonly("source", &Instance::source)
        .def_readonly("estimates", &Instance::estimates)
        .def_readonly("cost", &Instance::cost)
        .def("to_json", [](const Instance& i) { return io::to_json(i).dump(); });

    m.def("theorem1_bound", &theorem1_bound);
    m.def("theorem2_bound", &theorem2_bound);
    m.def("check_theorem1", [](const LabeledSource& s, const std::vector<Distribution>& est, const CostMatrix& c) {
        return check_theorem1(s, share_domain(est), c);
    });
    m.def("check_theorem2", [](const LabeledSource& s, const std::vector<Distribution>& est) {
        return check_theorem2(s, share_domain(est));
    });
    m.def("excess_logloss_identity", [](const LabeledSource& s, const std::vector<Distribution>& est) {
        const auto r = excess_logloss_identity(s, share_domain(est));
        return std::make_pair(r.lhs, r.rhs);
    });
    m.def("example1_construction", &example1_construction, py::arg("epsilon_prime"), py::arg("gamma"));
    m.def("example2_construction", &example2_construction, py::arg("epsilon_prime"), py::arg("gamma"));
    m.def(
        "tightness_search",
        [](std::size_t k, std::size_t dom, const CostMatrix& cost, const std::string& metric, double epsilon,
           std::size_t restarts, std::uint64_t seed) {
            Rng rng(seed);
            const auto r = tightness_search(k, dom, cost, PerturbationBudget(metric == "kl" ? Metric::KL : Metric::L1, epsilon),
                                            restarts, rng);
            return py::dict(py::arg("ratio") = r.ratio, py::arg("excess") = r.excess, py::arg("bound") = r.bound);
        },
        py::arg("k"), py::arg("m"), py::arg("cost"), py::arg("metric"), py::arg("epsilon"), py::arg("restarts"),
        py::arg("seed") = 42);

    m.def("smoothing_xi", [](double eps, std::uint64_t ld) { return SmoothingParams(eps, ld).xi; });
    m.def("kl_certificate", [](double eps, std::uint64_t ld) { return kl_certificate(SmoothingParams(eps, ld)); });
    m.def(
        "verify_smoothing",
        [](const Distribution& truth, const Distribution& estimate, double eps, std::uint64_t ld) {
            const Distribution est(truth.domain(), std::vector<double>(estimate.mass().begin(), estimate.mass().end()));
            const auto r = verify_smoothing(truth, est, SmoothingParams(eps, ld),
                                            base_mixture(QuantizedClassSpec(truth.domain(), 1)));
            return py::dict(py::arg("xi") = r.xi, py::arg("l1_actual") = r.l1_actual,
                            py::arg("kl_actual") = r.kl_actual, py::arg("certificate") = r.certificate,
                            py::arg("within") = r.within);
        },
        py::arg("truth"), py::arg("estimate"), py::arg("epsilon"), py::arg("ld"));

    py::class_<Pdfa>(m, "Pdfa")
        .def_static("from_json", [](const std::string& s) { return io::pdfa_from_json(io::json::parse(s)); })
        .def("to_json", [](const Pdfa& a) { return io::to_json(a).dump(); })
        .def_property_readonly("num_states", &Pdfa::num_states)
        .def("__eq__", [](const Pdfa& a, const Pdfa& b) { return a == b; });
    m.def("string_probability", &string_probability);
    m.def("truncate", [](const Pdfa& a, std::size_t max_len) { return truncate(a, max_len); });
    m.def("encoding_length", &encoding_length);
    m.def("encode", &encode);
    m.def("decode", &decode);

    m.def("run_pipeline", [](const std::string& config_json) {
        const TrialConfig config = io::trial_config_from_json(io::json::parse(config_json));
        const auto summary = run_pac_experiment(config);
        io::json grid = io::json::array();
        for (const auto& g : summary.grid) grid.push_back(io::to_json(g));
        return grid.dump();
    });

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    });
    m.attr("__version__") = kToolVersion;
}
