#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "plugrisk/classify.hpp"
#include "plugrisk/instances.hpp"
#include "plugrisk/random.hpp"

namespace plugrisk {

/// Exact risks of the optimal and plug-in predictors against a theorem bound.
struct BoundReport {
    double epsilon = 0.0;  // effective budget: max_i g_i * divergence_i
    double risk_opt = 0.0;
    double risk_plugin = 0.0;
    double excess = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // bound - excess
    bool satisfied = true;
};

/// Tolerance used for `satisfied`.
inline constexpr double kBoundTolerance = 1e-9;

enum class Metric { L1, KL };

/// Per-class hypothesis budget: divergence(D_i, D'_i) <= epsilon / g_i.
struct PerturbationBudget {
    PerturbationBudget(Metric metric, double epsilon);
    Metric metric;
    double epsilon;
};

/// epsilon * k * max_ij c_ij
double theorem1_bound(double epsilon, std::size_t k, const CostMatrix& cost);

/// k * epsilon
double theorem2_bound(double epsilon, std::size_t k);

/// Cost-matrix loss. f* from the true source, f' from the estimates, bound from
/// epsilon = max_i g_i * L1(D_i, D'_i).
BoundReport check_theorem1(const LabeledSource& truth, const std::vector<Distribution>& estimates,
                           const CostMatrix& cost);

/// Log loss. Posterior rule vs plug-in rule, bound from
/// epsilon = max_i g_i * KL(D_i || D'_i). An infinite per-class KL makes the
/// hypothesis vacuous: bound = +inf and the report is satisfied.
BoundReport check_theorem2(const LabeledSource& truth, const std::vector<Distribution>& estimates);

struct IdentityCheck {
    double lhs = 0.0;  // excess log loss
    double rhs = 0.0;  // sum_i g_i KL(D_i||D'_i) - KL(D||D')
    double gap() const;
};

/// Both sides of the exact excess-log-loss decomposition.
IdentityCheck excess_logloss_identity(const LabeledSource& truth, const std::vector<Distribution>& estimates);

/// Two atoms, two equally likely classes. D_0 = (1/2 + e', 1/2 - e'), D_1 mirrored;
/// estimates D'_0 = (1/2 - g, 1/2 + g), D'_1 mirrored; 0/1 cost. The plug-in
/// classifier is wrong on every atom.
Instance example1_construction(double epsilon_prime, double gamma);

/// Same two-atom instance for the log-loss setting (no cost matrix).
Instance example2_construction(double epsilon_prime, double gamma);

/// Returns d' with L1(d, d') <= budget from a random zero-sum transfer vector,
/// clipped at zero and renormalized; pulled back toward d if clipping overshoots.
Distribution random_l1_perturbation(const Distribution& d, double budget, Rng& rng);

struct TightnessResult {
    Instance best;
    double excess = 0.0;
    double bound = 0.0;
    double ratio = 0.0;  // excess / bound, 0 when the bound is 0
    std::size_t evaluations = 0;
};

/// Random-restart coordinate hill climbing over (priors, classes, estimates)
/// inside the budget, maximizing excess risk. `restarts` >= 1.
TightnessResult tightness_search(std::size_t k, std::size_t m, const CostMatrix& cost, const PerturbationBudget& budget,
                                 std::size_t restarts, Rng& rng);

// Randomized falsification suites. Instance i is regenerated from (seed, i),
// so a violation is replayable from its index alone.

struct SuiteOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 42;
    std::size_t k_min = 2;
    std::size_t k_max = 5;
    std::size_t m_min = 2;
    std::size_t m_max = 64;
};

struct SuiteRow {
    std::size_t index = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    BoundReport report;
    IdentityCheck identity;  // theorem 2 suite only
    bool identity_ok = true;
    bool ok() const { return report.satisfied && identity_ok; }
};

Instance theorem1_suite_instance(const SuiteOptions& opts, std::size_t index);
Instance theorem2_suite_instance(const SuiteOptions& opts, std::size_t index);

std::vector<SuiteRow> run_theorem1_suite(const SuiteOptions& opts);
std::vector<SuiteRow> run_theorem2_suite(const SuiteOptions& opts);

SuiteRow evaluate_theorem1(const Instance& instance, std::size_t index = 0);
SuiteRow evaluate_theorem2(const Instance& instance, std::size_t index = 0);

}  // namespace plugrisk
