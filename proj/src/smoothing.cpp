#include "plugrisk/smoothing.hpp"

#include <algorithm>
#include <cmath>

#include "plugrisk/error.hpp"

namespace plugrisk {

namespace {

constexpr double kHypothesisTolerance = 1e-12;
constexpr double kWithinTolerance = 1e-9;

// C(n, r) with saturation at `cap + 1`.
std::size_t binomial_capped(std::uint64_t n, std::uint64_t r, std::size_t cap) {
    r = std::min(r, n - r);
    long double value = 1.0L;
    for (std::uint64_t i = 1; i <= r; ++i) {
        value = value * static_cast<long double>(n - r + i) / static_cast<long double>(i);
        if (value > static_cast<long double>(cap)) return cap + 1;
    }
    return static_cast<std::size_t>(std::llround(static_cast<double>(value)));
}

}  // namespace

QuantizedClassSpec::QuantizedClassSpec(DomainPtr domain_, unsigned bits)
    : domain(std::move(domain_)), bits_per_atom(bits), description_length(0) {
    if (!domain) throw Error("quantized class requires a domain");
    if (bits == 0 || bits > 52) throw Error("bits per atom must lie in [1, 52]");
    description_length = static_cast<std::uint64_t>(domain->size()) * bits;
}

bool QuantizedClassSpec::admits(const Distribution& d) const {
    if (d.domain() != domain && !(*d.domain() == *domain)) return false;
    const double scale = std::ldexp(1.0, static_cast<int>(bits_per_atom));
    return std::all_of(d.mass().begin(), d.mass().end(), [&](double p) {
        const double units = p * scale;
        return units == std::floor(units);
    });
}

SmoothingParams::SmoothingParams(double epsilon_, std::uint64_t ld)
    : epsilon(epsilon_), description_length(ld), xi(0.0) {
    if (!std::isfinite(epsilon) || epsilon <= 0.0) throw Error("epsilon must be positive");
    if (ld == 0) throw Error("description length must be positive");
    xi = epsilon * epsilon / (12.0 * static_cast<double>(ld));
    if (!(xi > 0.0 && xi < 1.0)) throw Error("xi must lie in (0, 1)");
}

BaseDistribution base_mixture(const QuantizedClassSpec& spec) {
    return {Distribution::uniform(spec.domain), 1.0 / static_cast<double>(spec.domain->size())};
}

BaseDistribution base_mixture(const std::vector<Distribution>& members) {
    if (members.empty()) throw Error("explicit class is empty");
    std::vector<double> mass(members.front().size(), 0.0);
    for (const auto& d : members) {
        require_same_domain(members.front(), d);
        for (std::size_t x = 0; x < mass.size(); ++x) mass[x] += d[x];
    }
    const double n = static_cast<double>(members.size());
    for (double& v : mass) v /= n;
    const double floor = *std::min_element(mass.begin(), mass.end());
    return {Distribution(members.front().domain(), std::move(mass)), floor};
}

std::vector<Distribution> enumerate_quantized_class(const QuantizedClassSpec& spec, std::size_t limit) {
    const std::size_t m = spec.domain->size();
    const std::uint64_t units = std::uint64_t{1} << spec.bits_per_atom;
    if (binomial_capped(units + m - 1, m - 1, limit) > limit) throw Error("enumeration infeasible");
    const double unit = std::ldexp(1.0, -static_cast<int>(spec.bits_per_atom));

    std::vector<Distribution> out;
    std::vector<std::uint64_t> parts(m, 0);
    // Iterate compositions of `units` into m parts in lexicographic order.
    auto emit = [&] {
        std::vector<double> w(m);
        for (std::size_t x = 0; x < m; ++x) w[x] = static_cast<double>(parts[x]) * unit;
        out.emplace_back(spec.domain, std::move(w));
    };
    auto recurse = [&](auto& self, std::size_t pos, std::uint64_t remaining) -> void {
        if (pos + 1 == m) {
            parts[pos] = remaining;
            emit();
            return;
        }
        for (std::uint64_t v = 0; v <= remaining; ++v) {
            parts[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    recurse(recurse, 0, units);
    return out;
}

Distribution random_quantized(const QuantizedClassSpec& spec, Rng& rng) {
    const std::size_t m = spec.domain->size();
    const std::uint64_t units = std::uint64_t{1} << spec.bits_per_atom;
    // Stars and bars: choose m-1 distinct bar positions among units + m - 1 slots.
    const std::uint64_t slots = units + m - 1;
    std::vector<std::uint64_t> bars;
    while (bars.size() + 1 < m) {
        const std::uint64_t s = uniform_index(rng, slots);
        if (std::find(bars.begin(), bars.end(), s) == bars.end()) bars.push_back(s);
    }
    std::sort(bars.begin(), bars.end());
    std::vector<double> w(m);
    std::uint64_t prev = 0;
    const double unit = std::ldexp(1.0, -static_cast<int>(spec.bits_per_atom));
    for (std::size_t x = 0; x < m; ++x) {
        const std::uint64_t end = x + 1 < m ? bars[x] : slots;
        const std::uint64_t start = x == 0 ? 0 : prev + 1;
        w[x] = static_cast<double>(end - start) * unit;
        prev = end;
    }
    return Distribution(spec.domain, std::move(w));
}

Distribution smooth(const Distribution& estimate, const SmoothingParams& params, const BaseDistribution& base) {
    if (!(base.min_mass > 0.0)) throw Error("base provides no floor");
    require_same_domain(estimate, base.dist);
    std::vector<double> mass(estimate.size());
    for (std::size_t x = 0; x < mass.size(); ++x) mass[x] = (1.0 - params.xi) * estimate[x] + params.xi * base.dist[x];
    return Distribution(estimate.domain(), std::move(mass));
}

double kl_certificate(const SmoothingParams& params) {
    return 3.0 * params.xi * (1.0 + static_cast<double>(params.description_length) - std::log2(params.xi));
}

double kl_certificate_floor(const SmoothingParams& params, double min_mass) {
    if (!(min_mass > 0.0)) throw Error("base provides no floor");
    return 3.0 * params.xi * (1.0 - std::log2(min_mass) - std::log2(params.xi));
}

SmoothingReport verify_smoothing(const Distribution& truth, const Distribution& estimate, const SmoothingParams& params,
                                 const BaseDistribution& base) {
    SmoothingReport r;
    r.xi = params.xi;
    r.l1_actual = l1_distance(truth, estimate);
    if (r.l1_actual > params.xi + kHypothesisTolerance) throw Error("hypothesis not met");
    const Distribution smoothed = smooth(estimate, params, base);
    r.l1_smoothing = l1_distance(estimate, smoothed);
    r.kl_actual = kl_divergence(truth, smoothed);
    r.certificate = kl_certificate(params);
    r.certificate_floor = kl_certificate_floor(params, base.min_mass);
    r.within = r.kl_actual <= params.epsilon + kWithinTolerance;
    return r;
}

}  // namespace plugrisk
