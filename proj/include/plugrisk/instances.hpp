#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "plugrisk/classify.hpp"
#include "plugrisk/random.hpp"

namespace plugrisk {

/// A true source together with per-class estimates, optionally with a cost
/// matrix. This is the unit the bound checkers consume and the replay files store.
struct Instance {
    LabeledSource source;
    std::vector<Distribution> estimates;
    std::optional<CostMatrix> cost;

    LabeledSource estimated_source() const { return source.with_classes(estimates); }
};

// Random generators for the randomized verification suites.

/// Exponential weights with roughly `zero_fraction` of atoms forced to zero
/// (at least one atom always keeps positive mass).
Distribution random_distribution(const DomainPtr& domain, Rng& rng, double zero_fraction = 0.0);

std::vector<double> random_priors(std::size_t k, Rng& rng);

LabeledSource random_source(std::size_t k, std::size_t m, Rng& rng, double zero_fraction = 0.0);

/// Random non-negative costs in [0, 10); the diagonal is zero about half the time.
CostMatrix random_cost_matrix(std::size_t k, Rng& rng);

/// Multiplicative log-normal-style perturbation of d that keeps every atom of
/// d's support, and may add mass outside it. KL(d || result) is always finite.
Distribution random_support_safe_estimate(const Distribution& d, Rng& rng, double strength);

}  // namespace plugrisk
