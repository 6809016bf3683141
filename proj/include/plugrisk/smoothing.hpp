#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "plugrisk/dist_core.hpp"
#include "plugrisk/random.hpp"

namespace plugrisk {

/// Class of distributions whose masses are all multiples of 2^-b on a fixed
/// domain. Description length L_D = m * b bits.
struct QuantizedClassSpec {
    QuantizedClassSpec(DomainPtr domain, unsigned bits_per_atom);

    DomainPtr domain;
    unsigned bits_per_atom;
    std::uint64_t description_length;

    /// True when every mass of d is an integer multiple of 2^-b.
    bool admits(const Distribution& d) const;
};

/// Target KL accuracy epsilon (bits) and description length L_D; the L1
/// accuracy required of the estimate is xi = epsilon^2 / (12 L_D).
struct SmoothingParams {
    SmoothingParams(double epsilon, std::uint64_t description_length);

    double epsilon;
    std::uint64_t description_length;
    double xi;
};

/// Mixing base with a certified per-atom mass floor.
struct BaseDistribution {
    Distribution dist;
    double min_mass;
};

/// Unweighted mixture of the full quantized class. The class is closed under
/// atom permutations, so the mixture is uniform with floor 1/m.
BaseDistribution base_mixture(const QuantizedClassSpec& spec);

/// Exact average of an explicitly listed class. The floor is the smallest
/// averaged mass and may be 0, in which case smooth() refuses the base.
BaseDistribution base_mixture(const std::vector<Distribution>& members);

/// Lists every member of the quantized class. Throws "enumeration infeasible"
/// when the class has more than `limit` members.
std::vector<Distribution> enumerate_quantized_class(const QuantizedClassSpec& spec, std::size_t limit = 1'000'000);

/// Random member of the quantized class (uniform over compositions of 2^b into m parts).
Distribution random_quantized(const QuantizedClassSpec& spec, Rng& rng);

/// (1 - xi) * estimate + xi * base.
Distribution smooth(const Distribution& estimate, const SmoothingParams& params, const BaseDistribution& base);

/// 3 xi (1 + L_D - log2 xi).
double kl_certificate(const SmoothingParams& params);

/// Same bound with -log2(min_mass) in place of L_D; never larger when min_mass >= 2^-L_D.
double kl_certificate_floor(const SmoothingParams& params, double min_mass);

struct SmoothingReport {
    double xi = 0.0;
    double l1_actual = 0.0;     // L1(truth, estimate)
    double l1_smoothing = 0.0;  // L1(estimate, smoothed)
    double kl_actual = 0.0;     // KL(truth || smoothed)
    double certificate = 0.0;
    double certificate_floor = 0.0;
    bool within = false;  // kl_actual <= epsilon
};

/// Smooths `estimate` and measures the result against `truth`. Throws
/// "hypothesis not met" when L1(truth, estimate) > xi.
SmoothingReport verify_smoothing(const Distribution& truth, const Distribution& estimate, const SmoothingParams& params,
                                 const BaseDistribution& base);

}  // namespace plugrisk
