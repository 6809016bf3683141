#include "plugrisk/instances.hpp"

#include <cmath>

namespace plugrisk {

namespace {

double exponential(Rng& rng) { return -std::log(uniform01_open_low(rng)); }

// Box-Muller; only one of the pair is used so the stream layout stays simple.
double standard_normal(Rng& rng) {
    const double u1 = uniform01_open_low(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

Distribution random_distribution(const DomainPtr& domain, Rng& rng, double zero_fraction) {
    const std::size_t m = domain->size();
    std::vector<double> w(m);
    bool any = false;
    for (double& v : w) {
        const bool zero = uniform01(rng) < zero_fraction;
        v = zero ? 0.0 : exponential(rng);
        any = any || v > 0.0;
    }
    if (!any) w[uniform_index(rng, m)] = 1.0;
    return Distribution(domain, std::move(w));
}

std::vector<double> random_priors(std::size_t k, Rng& rng) {
    std::vector<double> g(k);
    double total = 0.0;
    for (double& v : g) {
        v = exponential(rng) + 1e-3;
        total += v;
    }
    for (double& v : g) v /= total;
    return g;
}

LabeledSource random_source(std::size_t k, std::size_t m, Rng& rng, double zero_fraction) {
    auto domain = Domain::indexed(m);
    auto priors = random_priors(k, rng);
    std::vector<Distribution> classes;
    classes.reserve(k);
    for (std::size_t i = 0; i < k; ++i) classes.push_back(random_distribution(domain, rng, zero_fraction));
    return LabeledSource(std::move(priors), std::move(classes));
}

CostMatrix random_cost_matrix(std::size_t k, Rng& rng) {
    const bool zero_diagonal = uniform01(rng) < 0.5;
    std::vector<double> c(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) c[i * k + j] = (zero_diagonal && i == j) ? 0.0 : 10.0 * uniform01(rng);
    }
    return CostMatrix(k, std::move(c));
}

Distribution random_support_safe_estimate(const Distribution& d, Rng& rng, double strength) {
    std::vector<double> w(d.size());
    for (std::size_t x = 0; x < d.size(); ++x) {
        const double z = standard_normal(rng);
        if (d[x] > 0.0) {
            w[x] = d[x] * std::exp(strength * z);
        } else if (uniform01(rng) < 0.5) {
            w[x] = 0.1 * strength * uniform01(rng);
        }
    }
    return Distribution(d.domain(), std::move(w));
}

}  // namespace plugrisk
