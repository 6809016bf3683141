#include "plugrisk/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plugrisk/error.hpp"

namespace plugrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIdentityTolerance = 1e-9;

void require_estimates(const LabeledSource& truth, const std::vector<Distribution>& estimates) {
    if (estimates.size() != truth.num_classes()) throw Error("one estimate per class is required");
    for (const auto& d : estimates) require_same_domain(truth.class_dist(0), d);
}

BoundReport finish(double epsilon, double risk_opt, double risk_plugin, double bound) {
    BoundReport r;
    r.epsilon = epsilon;
    r.risk_opt = risk_opt;
    r.risk_plugin = risk_plugin;
    r.bound = bound;
    if (std::isinf(bound)) {
        r.excess = risk_plugin - risk_opt;
        r.slack = kInf;
        r.satisfied = true;
        return r;
    }
    r.excess = risk_plugin - risk_opt;
    r.slack = bound - r.excess;
    r.satisfied = r.excess <= bound + kBoundTolerance;
    return r;
}

Instance two_atom_instance(double epsilon_prime, double gamma, bool with_cost) {
    if (!(epsilon_prime >= 0.0) || !(gamma > 0.0) || !(epsilon_prime + gamma < 0.5)) {
        throw Error("need epsilon' >= 0, gamma > 0 and epsilon' + gamma < 1/2");
    }
    auto domain = Domain::indexed(2);
    std::vector<Distribution> classes{Distribution(domain, {0.5 + epsilon_prime, 0.5 - epsilon_prime}),
                                      Distribution(domain, {0.5 - epsilon_prime, 0.5 + epsilon_prime})};
    std::vector<Distribution> estimates{Distribution(domain, {0.5 - gamma, 0.5 + gamma}),
                                        Distribution(domain, {0.5 + gamma, 0.5 - gamma})};
    Instance inst{LabeledSource({0.5, 0.5}, std::move(classes)), std::move(estimates), std::nullopt};
    if (with_cost) inst.cost = CostMatrix::zero_one(2);
    return inst;
}

}  // namespace

PerturbationBudget::PerturbationBudget(Metric metric_, double epsilon_) : metric(metric_), epsilon(epsilon_) {
    if (!std::isfinite(epsilon) || epsilon < 0.0) throw Error("budget epsilon must be finite and non-negative");
}

double theorem1_bound(double epsilon, std::size_t k, const CostMatrix& cost) {
    if (epsilon < 0.0) throw Error("epsilon must be non-negative");
    return epsilon * static_cast<double>(k) * cost.max_entry();
}

double theorem2_bound(double epsilon, std::size_t k) {
    if (epsilon < 0.0) throw Error("epsilon must be non-negative");
    return static_cast<double>(k) * epsilon;
}

BoundReport check_theorem1(const LabeledSource& truth, const std::vector<Distribution>& estimates,
                           const CostMatrix& cost) {
    require_estimates(truth, estimates);
    double epsilon = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        epsilon = std::max(epsilon, truth.prior(i) * l1_distance(truth.class_dist(i), estimates[i]));
    }
    const LabeledSource estimated = truth.with_classes(estimates);
    const double r_opt = risk(bayes_classifier(truth, cost), truth, cost);
    const double r_plugin = risk(bayes_classifier(estimated, cost), truth, cost);
    return finish(epsilon, r_opt, r_plugin, theorem1_bound(epsilon, truth.num_classes(), cost));
}

BoundReport check_theorem2(const LabeledSource& truth, const std::vector<Distribution>& estimates) {
    require_estimates(truth, estimates);
    double epsilon = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        epsilon = std::max(epsilon, truth.prior(i) * kl_divergence(truth.class_dist(i), estimates[i]));
    }
    const LabeledSource estimated = truth.with_classes(estimates);
    const double r_opt = logloss_risk(posterior_rule(truth), truth);
    const double r_plugin = logloss_risk(plugin_rule(estimated), truth);
    const double bound = std::isinf(epsilon) ? kInf : theorem2_bound(epsilon, truth.num_classes());
    return finish(epsilon, r_opt, r_plugin, bound);
}

double IdentityCheck::gap() const {
    if (std::isinf(lhs) && std::isinf(rhs) && lhs == rhs) return 0.0;
    return std::abs(lhs - rhs);
}

IdentityCheck excess_logloss_identity(const LabeledSource& truth, const std::vector<Distribution>& estimates) {
    require_estimates(truth, estimates);
    const LabeledSource estimated = truth.with_classes(estimates);
    IdentityCheck out;
    out.lhs = logloss_risk(plugin_rule(estimated), truth) - logloss_risk(posterior_rule(truth), truth);
    double weighted = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        weighted += truth.prior(i) * kl_divergence(truth.class_dist(i), estimates[i]);
    }
    out.rhs = weighted - kl_divergence(truth.marginal(), estimated.marginal());
    return out;
}

Instance example1_construction(double epsilon_prime, double gamma) {
    return two_atom_instance(epsilon_prime, gamma, true);
}

Instance example2_construction(double epsilon_prime, double gamma) {
    return two_atom_instance(epsilon_prime, gamma, false);
}

Distribution random_l1_perturbation(const Distribution& d, double budget, Rng& rng) {
    if (!(budget >= 0.0) || budget > 2.0) throw Error("L1 budget must lie in [0, 2]");
    const std::size_t m = d.size();
    if (budget == 0.0 || m == 1) return d;

    std::vector<double> transfer(m);
    double mean = 0.0;
    for (double& t : transfer) {
        t = uniform01(rng) - 0.5;
        mean += t;
    }
    mean /= static_cast<double>(m);
    double norm = 0.0;
    for (double& t : transfer) {
        t -= mean;
        norm += std::abs(t);
    }
    if (norm == 0.0) return d;
    const double target = budget * uniform01_open_low(rng);

    std::vector<double> w(m);
    for (std::size_t x = 0; x < m; ++x) w[x] = std::max(0.0, d[x] + transfer[x] * target / norm);
    double total = 0.0;
    for (double v : w) total += v;
    if (total <= 0.0) return d;
    Distribution candidate(d.domain(), std::move(w));

    const double achieved = l1_distance(d, candidate);
    if (achieved <= budget) return candidate;
    // Clipping plus renormalization overshot: move back along the segment toward d,
    // where L1 scales linearly.
    const double t = budget / achieved;
    std::vector<double> pulled(m);
    for (std::size_t x = 0; x < m; ++x) pulled[x] = d[x] + t * (candidate[x] - d[x]);
    return Distribution(d.domain(), std::move(pulled));
}

// ---------------------------------------------------------------------------
// tightness search

namespace {

struct SearchSpace {
    std::size_t k;
    std::size_t m;
    const CostMatrix& cost;
    PerturbationBudget budget;
    DomainPtr domain;

    std::size_t dimension() const { return k + 2 * k * m; }

    Distribution block(std::span<const double> theta, std::size_t offset) const {
        std::vector<double> w(theta.begin() + static_cast<std::ptrdiff_t>(offset),
                              theta.begin() + static_cast<std::ptrdiff_t>(offset + m));
        bool any = std::any_of(w.begin(), w.end(), [](double v) { return v > 0.0; });
        if (!any) return Distribution::uniform(domain);
        return Distribution(domain, std::move(w));
    }

    // Largest step toward `target` from `d` keeping divergence(d, .) <= allowed.
    Distribution fit_budget(const Distribution& d, const Distribution& target, double allowed) const {
        auto along = [&](double t) {
            std::vector<double> w(m);
            for (std::size_t x = 0; x < m; ++x) w[x] = d[x] + t * (target[x] - d[x]);
            return Distribution(domain, std::move(w));
        };
        if (budget.metric == Metric::L1) {
            const double full = l1_distance(d, target);
            if (full <= allowed) return target;
            return along(allowed / full);
        }
        if (kl_divergence(d, target) <= allowed) return target;
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (kl_divergence(d, along(mid)) <= allowed) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return along(lo);
    }

    Instance decode(std::span<const double> theta) const {
        std::vector<double> priors(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(k));
        double total = 0.0;
        for (double& g : priors) {
            g += 1e-6;
            total += g;
        }
        for (double& g : priors) g /= total;
        std::vector<Distribution> classes;
        std::vector<Distribution> estimates;
        for (std::size_t i = 0; i < k; ++i) classes.push_back(block(theta, k + i * m));
        for (std::size_t i = 0; i < k; ++i) {
            const Distribution target = block(theta, k + (k + i) * m);
            estimates.push_back(fit_budget(classes[i], target, budget.epsilon / priors[i]));
        }
        Instance inst{LabeledSource(std::move(priors), std::move(classes)), std::move(estimates), std::nullopt};
        if (budget.metric == Metric::L1) inst.cost = cost;
        return inst;
    }

    double bound() const {
        return budget.metric == Metric::L1 ? theorem1_bound(budget.epsilon, k, cost)
                                           : theorem2_bound(budget.epsilon, k);
    }

    double excess(const Instance& inst) const {
        if (budget.metric == Metric::L1) return check_theorem1(inst.source, inst.estimates, cost).excess;
        return check_theorem2(inst.source, inst.estimates).excess;
    }
};

// The two-atom lower-bound instance with gamma = budget/10, in search coordinates.
std::vector<double> example1_seed(double epsilon) {
    const double gamma = epsilon / 10.0;
    const double ep = epsilon - gamma;
    return {0.5, 0.5, 0.5 + ep, 0.5 - ep, 0.5 - ep, 0.5 + ep, 0.5 - gamma, 0.5 + gamma, 0.5 + gamma, 0.5 - gamma};
}

}  // namespace

TightnessResult tightness_search(std::size_t k, std::size_t m, const CostMatrix& cost,
                                 const PerturbationBudget& budget, std::size_t restarts, Rng& rng) {
    if (restarts == 0) throw Error("tightness search needs at least one restart");
    if (k < 2 || m < 1) throw Error("tightness search needs k >= 2 and m >= 1");
    if (cost.size() != k) throw Error("cost matrix dimension mismatch");
    const SearchSpace space{k, m, cost, budget, Domain::indexed(m)};
    const double bound = space.bound();

    TightnessResult result{space.decode(std::vector<double>(space.dimension(), 1.0)), 0.0, bound, 0.0, 0};
    result.excess = space.excess(result.best);

    constexpr double kInitialStep = 0.1;
    constexpr int kHalvings = 20;
    constexpr int kMaxSweepsPerStep = 50;

    for (std::size_t restart = 0; restart < restarts; ++restart) {
        Rng local(rng());
        std::vector<double> theta(space.dimension());
        const bool seed_example =
            restart == 0 && k == 2 && m == 2 && budget.metric == Metric::L1 && budget.epsilon > 0.0 && budget.epsilon < 0.5;
        if (seed_example) {
            theta = example1_seed(budget.epsilon);
        } else {
            for (double& v : theta) v = uniform01(local);
        }
        double current = space.excess(space.decode(theta));
        ++result.evaluations;

        double step = kInitialStep;
        for (int level = 0; level <= kHalvings; ++level, step *= 0.5) {
            for (int sweep = 0; sweep < kMaxSweepsPerStep; ++sweep) {
                bool improved = false;
                for (std::size_t c = 0; c < theta.size(); ++c) {
                    for (double dir : {+1.0, -1.0}) {
                        std::vector<double> trial = theta;
                        trial[c] = std::clamp(trial[c] + dir * step, 0.0, 1.0);
                        if (trial[c] == theta[c]) continue;
                        const double value = space.excess(space.decode(trial));
                        ++result.evaluations;
                        if (value > current + 1e-15) {
                            theta = std::move(trial);
                            current = value;
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) break;
            }
        }
        if (current > result.excess) {
            result.excess = current;
            result.best = space.decode(theta);
        }
    }
    result.ratio = bound > 0.0 ? result.excess / bound : 0.0;
    return result;
}

// ---------------------------------------------------------------------------
// falsification suites

namespace {

struct Shape {
    std::size_t k;
    std::size_t m;
};

Shape draw_shape(const SuiteOptions& opts, Rng& rng) {
    if (opts.k_min < 2 || opts.k_max < opts.k_min || opts.m_min < 1 || opts.m_max < opts.m_min) {
        throw Error("invalid suite shape ranges");
    }
    const std::size_t k = opts.k_min + uniform_index(rng, opts.k_max - opts.k_min + 1);
    const std::size_t m = opts.m_min + uniform_index(rng, opts.m_max - opts.m_min + 1);
    return {k, m};
}

// Distinct sub-streams so the two suites never share instances.
constexpr std::uint64_t kTheorem1Stream = 1;
constexpr std::uint64_t kTheorem2Stream = 2;

}  // namespace

Instance theorem1_suite_instance(const SuiteOptions& opts, std::size_t index) {
    Rng rng = make_rng(split_seed(opts.seed, kTheorem1Stream), index);
    const auto [k, m] = draw_shape(opts, rng);
    const double zero_fraction = uniform01(rng) < 0.3 ? 0.4 * uniform01(rng) : 0.0;
    LabeledSource source = random_source(k, m, rng, zero_fraction);
    CostMatrix cost = random_cost_matrix(k, rng);
    std::vector<Distribution> estimates;
    for (std::size_t i = 0; i < k; ++i) {
        const double u = uniform01(rng);
        estimates.push_back(random_l1_perturbation(source.class_dist(i), 2.0 * u * u, rng));
    }
    return Instance{std::move(source), std::move(estimates), std::move(cost)};
}

Instance theorem2_suite_instance(const SuiteOptions& opts, std::size_t index) {
    Rng rng = make_rng(split_seed(opts.seed, kTheorem2Stream), index);
    const auto [k, m] = draw_shape(opts, rng);
    const double zero_fraction = uniform01(rng) < 0.3 ? 0.4 * uniform01(rng) : 0.0;
    LabeledSource source = random_source(k, m, rng, zero_fraction);
    const double strength = 2.0 * uniform01(rng);
    std::vector<Distribution> estimates;
    for (std::size_t i = 0; i < k; ++i) {
        estimates.push_back(random_support_safe_estimate(source.class_dist(i), rng, strength));
    }
    return Instance{std::move(source), std::move(estimates), std::nullopt};
}

SuiteRow evaluate_theorem1(const Instance& instance, std::size_t index) {
    if (!instance.cost) throw Error("theorem 1 instance requires a cost matrix");
    SuiteRow row;
    row.index = index;
    row.k = instance.source.num_classes();
    row.m = instance.source.domain_size();
    row.report = check_theorem1(instance.source, instance.estimates, *instance.cost);
    return row;
}

SuiteRow evaluate_theorem2(const Instance& instance, std::size_t index) {
    SuiteRow row;
    row.index = index;
    row.k = instance.source.num_classes();
    row.m = instance.source.domain_size();
    row.report = check_theorem2(instance.source, instance.estimates);
    if (std::isfinite(row.report.epsilon)) {
        row.identity = excess_logloss_identity(instance.source, instance.estimates);
        row.identity_ok = row.identity.gap() <= kIdentityTolerance;
    } else {
        row.identity = {row.report.excess, kInf};
    }
    return row;
}

std::vector<SuiteRow> run_theorem1_suite(const SuiteOptions& opts) {
    std::vector<SuiteRow> rows;
    rows.reserve(opts.trials);
    for (std::size_t i = 0; i < opts.trials; ++i) rows.push_back(evaluate_theorem1(theorem1_suite_instance(opts, i), i));
    return rows;
}

std::vector<SuiteRow> run_theorem2_suite(const SuiteOptions& opts) {
    std::vector<SuiteRow> rows;
    rows.reserve(opts.trials);
    for (std::size_t i = 0; i < opts.trials; ++i) rows.push_back(evaluate_theorem2(theorem2_suite_instance(opts, i), i));
    return rows;
}

}  // namespace plugrisk
