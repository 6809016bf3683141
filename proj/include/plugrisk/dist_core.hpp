#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "plugrisk/random.hpp"

namespace plugrisk {

/// Finite, ordered sample space. Atoms are opaque unique strings.
class Domain {
public:
    explicit Domain(std::vector<std::string> atoms);

    /// Domain with atoms "x0", "x1", ..., "x{m-1}".
    static std::shared_ptr<const Domain> indexed(std::size_t m);
    static std::shared_ptr<const Domain> make(std::vector<std::string> atoms);

    std::size_t size() const { return atoms_.size(); }
    const std::string& atom(std::size_t i) const { return atoms_.at(i); }
    const std::vector<std::string>& atoms() const { return atoms_; }

    /// Index of a named atom; throws if absent.
    std::size_t index_of(const std::string& atom) const;

    bool operator==(const Domain& other) const { return atoms_ == other.atoms_; }

private:
    std::vector<std::string> atoms_;
    std::unordered_map<std::string, std::size_t> index_;
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Probability mass function over a Domain. Immutable; unit mass is
/// established once at construction.
class Distribution {
public:
    /// Normalizes `weights`. Throws "invalid mass" on negative/non-finite
    /// entries and "degenerate" when all weights are zero.
    Distribution(DomainPtr domain, std::vector<double> weights);

    static Distribution uniform(DomainPtr domain);
    static Distribution point_mass(DomainPtr domain, std::size_t atom);

    const DomainPtr& domain() const { return domain_; }
    std::size_t size() const { return mass_.size(); }
    double operator[](std::size_t i) const { return mass_[i]; }
    std::span<const double> mass() const { return mass_; }

    bool same_domain(const Distribution& other) const;

private:
    DomainPtr domain_;
    std::vector<double> mass_;
};

Distribution make_distribution(DomainPtr domain, std::vector<double> weights);

/// Sum over atoms of |p(x) - q(x)|, in [0, 2].
double l1_distance(const Distribution& p, const Distribution& q);

/// KL divergence I(p || q) in bits. +infinity on support violation.
double kl_divergence(const Distribution& p, const Distribution& q);

/// Pointwise convex combination. Weights must sum to 1 within 1e-12.
Distribution mixture(std::span<const std::pair<double, Distribution>> components);

/// Draws one atom index by inverse-CDF lookup.
std::size_t sample_one(const Distribution& d, Rng& rng);

/// n i.i.d. atom indices.
std::vector<std::size_t> sample(const Distribution& d, Rng& rng, std::size_t n);

/// Precomputed cumulative table for repeated draws from one distribution.
class Sampler {
public:
    explicit Sampler(const Distribution& d);
    std::size_t operator()(Rng& rng) const;

private:
    std::vector<double> cumulative_;
};

void require_same_domain(const Distribution& p, const Distribution& q);

}  // namespace plugrisk
