#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "plugrisk/classify.hpp"
#include "plugrisk/random.hpp"

namespace plugrisk {

/// Add-lambda counting over the known domain: (count(x) + lambda) / (n + lambda m).
/// lambda = 0 is the raw empirical frequency; an empty sample with lambda = 0
/// yields the uniform distribution.
Distribution empirical_estimator(std::span<const std::size_t> samples, const DomainPtr& domain, double lambda);

struct Estimator {
    enum class Kind { Empirical, AddLambda };
    Kind kind = Kind::Empirical;
    double lambda = 0.0;

    double effective_lambda() const { return kind == Kind::Empirical ? 0.0 : lambda; }
    static Estimator empirical() { return {}; }
    static Estimator add_lambda(double l) { return {Kind::AddLambda, l}; }
};

struct TrialConfig {
    explicit TrialConfig(LabeledSource truth) : source(std::move(truth)) {}

    LabeledSource source;
    std::optional<CostMatrix> cost;  // absent: log-loss mode
    std::size_t sample_size = 1000;
    std::vector<std::size_t> sample_grid;  // empty: just sample_size
    Estimator estimator;
    std::size_t trials = 100;
    double epsilon_target = 0.05;
    double delta_target = 0.05;
    std::uint64_t seed = 42;
    std::size_t threads = 0;  // 0: hardware concurrency

    bool log_loss_mode() const { return !cost.has_value(); }
    std::vector<std::size_t> grid() const;
    void validate() const;
};

struct TrialOutcome {
    std::size_t sample_size = 0;
    std::vector<std::size_t> class_counts;
    std::vector<double> l1;  // per class
    std::vector<double> kl;  // per class, may be +inf
    double risk_opt = 0.0;
    double risk_plugin = 0.0;
    double excess = 0.0;
    double epsilon_achieved = 0.0;  // max_i g_i * divergence_i for the active loss
    double bound_achieved = 0.0;    // theorem bound evaluated at epsilon_achieved
    bool bound_satisfied = true;
};

/// One draw-split-estimate-classify-evaluate cycle of size config.sample_size.
TrialOutcome run_trial(const TrialConfig& config, Rng& rng);

/// Same as run_trial with an explicit sample size.
TrialOutcome run_trial(const TrialConfig& config, std::size_t sample_size, Rng& rng);

struct Quantiles {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

Quantiles summarize(std::vector<double> values);

struct GridPoint {
    std::size_t sample_size = 0;
    double violation_fraction = 0.0;  // fraction of trials with excess > epsilon_target
    bool meets_delta = false;         // violation_fraction <= delta_target
    Quantiles excess;
    Quantiles l1;  // pooled over classes and trials
    Quantiles kl;  // pooled, finite values only
    std::size_t infinite_kl = 0;
    std::size_t conditional_validity_failures = 0;
};

struct ExperimentSummary {
    std::vector<GridPoint> grid;
    std::vector<std::vector<TrialOutcome>> trials;  // [grid index][trial index]
};

/// Runs config.trials independent trials at every grid size. Trial t at grid
/// index g uses a stream derived from (seed, g, t), so results are identical
/// for any thread count.
ExperimentSummary run_pac_experiment(const TrialConfig& config);

}  // namespace plugrisk
