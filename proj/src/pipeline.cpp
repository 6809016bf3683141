#include "plugrisk/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "plugrisk/bounds.hpp"
#include "plugrisk/error.hpp"

namespace plugrisk {

Distribution empirical_estimator(std::span<const std::size_t> samples, const DomainPtr& domain, double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) throw Error("lambda must be finite and non-negative");
    const std::size_t m = domain->size();
    if (samples.empty() && lambda == 0.0) return Distribution::uniform(domain);
    std::vector<double> counts(m, lambda);
    for (std::size_t x : samples) {
        if (x >= m) throw Error("sample atom outside the domain");
        counts[x] += 1.0;
    }
    return Distribution(domain, std::move(counts));
}

std::vector<std::size_t> TrialConfig::grid() const {
    return sample_grid.empty() ? std::vector<std::size_t>{sample_size} : sample_grid;
}

void TrialConfig::validate() const {
    for (std::size_t n : grid()) {
        if (n == 0) throw Error("sample size must be at least 1");
    }
    if (trials == 0) throw Error("trials must be at least 1");
    if (!std::isfinite(estimator.lambda) || estimator.lambda < 0.0) throw Error("lambda must be non-negative");
    if (!(epsilon_target > 0.0)) throw Error("epsilon target must be positive");
    if (!(delta_target > 0.0 && delta_target < 1.0)) throw Error("delta target must lie in (0, 1)");
    if (cost && cost->size() != source.num_classes()) throw Error("cost matrix dimension mismatch");
}

TrialOutcome run_trial(const TrialConfig& config, Rng& rng) { return run_trial(config, config.sample_size, rng); }

TrialOutcome run_trial(const TrialConfig& config, std::size_t sample_size, Rng& rng) {
    const LabeledSource& truth = config.source;
    const std::size_t k = truth.num_classes();

    // Label by priors, then atom by the class distribution.
    Sampler label_draw(Distribution(Domain::indexed(k), truth.priors()));
    std::vector<Sampler> atom_draw;
    atom_draw.reserve(k);
    for (const auto& d : truth.classes()) atom_draw.emplace_back(d);
    std::vector<std::vector<std::size_t>> split(k);
    for (std::size_t t = 0; t < sample_size; ++t) {
        const std::size_t label = label_draw(rng);
        split[label].push_back(atom_draw[label](rng));
    }

    TrialOutcome out;
    out.sample_size = sample_size;
    std::vector<Distribution> estimates;
    estimates.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.class_counts.push_back(split[i].size());
        estimates.push_back(empirical_estimator(split[i], truth.domain(), config.estimator.effective_lambda()));
        out.l1.push_back(l1_distance(truth.class_dist(i), estimates.back()));
        out.kl.push_back(kl_divergence(truth.class_dist(i), estimates.back()));
    }

    const BoundReport report =
        config.cost ? check_theorem1(truth, estimates, *config.cost) : check_theorem2(truth, estimates);
    out.risk_opt = report.risk_opt;
    out.risk_plugin = report.risk_plugin;
    out.excess = report.excess;
    out.epsilon_achieved = report.epsilon;
    out.bound_achieved = report.bound;
    out.bound_satisfied = report.satisfied;
    return out;
}

Quantiles summarize(std::vector<double> values) {
    Quantiles q;
    if (values.empty()) return q;
    std::sort(values.begin(), values.end());
    // Linear interpolation between order statistics.
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    q.min = values.front();
    q.q25 = at(0.25);
    q.median = at(0.5);
    q.q75 = at(0.75);
    q.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    q.mean = sum / static_cast<double>(values.size());
    return q;
}

ExperimentSummary run_pac_experiment(const TrialConfig& config) {
    config.validate();
    const auto sizes = config.grid();
    ExperimentSummary summary;
    summary.trials.resize(sizes.size());

    std::size_t threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, config.trials);

    for (std::size_t g = 0; g < sizes.size(); ++g) {
        auto& outcomes = summary.trials[g];
        outcomes.resize(config.trials);
        const std::uint64_t grid_seed = split_seed(config.seed, g);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t t = next++; t < config.trials; t = next++) {
                Rng rng = make_rng(grid_seed, t);
                outcomes[t] = run_trial(config, sizes[g], rng);
            }
        };
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
            worker();
        }

        GridPoint point;
        point.sample_size = sizes[g];
        std::vector<double> excess;
        std::vector<double> l1;
        std::vector<double> kl;
        std::size_t violations = 0;
        for (const auto& o : outcomes) {
            excess.push_back(o.excess);
            if (o.excess > config.epsilon_target) ++violations;
            if (!o.bound_satisfied) ++point.conditional_validity_failures;
            l1.insert(l1.end(), o.l1.begin(), o.l1.end());
            for (double v : o.kl) {
                if (std::isfinite(v)) {
                    kl.push_back(v);
                } else {
                    ++point.infinite_kl;
                }
            }
        }
        point.violation_fraction = static_cast<double>(violations) / static_cast<double>(config.trials);
        point.meets_delta = point.violation_fraction <= config.delta_target;
        point.excess = summarize(std::move(excess));
        point.l1 = summarize(std::move(l1));
        point.kl = summarize(std::move(kl));
        summary.grid.push_back(point);
    }
    return summary;
}

}  // namespace plugrisk
