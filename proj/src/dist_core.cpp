#include "plugrisk/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "plugrisk/error.hpp"

namespace plugrisk {

namespace {

constexpr double kUnitMassTolerance = 1e-12;

}  // namespace

Domain::Domain(std::vector<std::string> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw Error("domain must contain at least one atom");
    index_.reserve(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!index_.emplace(atoms_[i], i).second) throw Error("duplicate atom '" + atoms_[i] + "'");
    }
}

std::shared_ptr<const Domain> Domain::make(std::vector<std::string> atoms) {
    return std::make_shared<const Domain>(std::move(atoms));
}

std::shared_ptr<const Domain> Domain::indexed(std::size_t m) {
    std::vector<std::string> atoms;
    atoms.reserve(m);
    for (std::size_t i = 0; i < m; ++i) atoms.push_back("x" + std::to_string(i));
    return make(std::move(atoms));
}

std::size_t Domain::index_of(const std::string& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) throw Error("unknown atom '" + atom + "'");
    return it->second;
}

Distribution::Distribution(DomainPtr domain, std::vector<double> weights)
    : domain_(std::move(domain)), mass_(std::move(weights)) {
    if (!domain_) throw Error("distribution requires a domain");
    if (mass_.size() != domain_->size()) throw Error("weights length does not match domain size");
    double total = 0.0;
    for (double w : mass_) {
        if (!std::isfinite(w) || w < 0.0) throw Error("invalid mass");
        total += w;
    }
    if (total <= 0.0) throw Error("degenerate");
    // Weights that already sum to 1 up to rounding are kept as given, so a
    // serialized distribution reloads bit for bit.
    const double rounding = 4.0 * static_cast<double>(mass_.size()) * std::numeric_limits<double>::epsilon();
    if (std::abs(total - 1.0) <= rounding) return;
    for (double& w : mass_) w /= total;
}

Distribution Distribution::uniform(DomainPtr domain) {
    std::vector<double> w(domain->size(), 1.0);
    return Distribution(std::move(domain), std::move(w));
}

Distribution Distribution::point_mass(DomainPtr domain, std::size_t atom) {
    std::vector<double> w(domain->size(), 0.0);
    w.at(atom) = 1.0;
    return Distribution(std::move(domain), std::move(w));
}

bool Distribution::same_domain(const Distribution& other) const {
    return domain_ == other.domain_ || *domain_ == *other.domain_;
}

Distribution make_distribution(DomainPtr domain, std::vector<double> weights) {
    return Distribution(std::move(domain), std::move(weights));
}

void require_same_domain(const Distribution& p, const Distribution& q) {
    if (!p.same_domain(q)) throw Error("distributions are defined on different domains");
}

double l1_distance(const Distribution& p, const Distribution& q) {
    require_same_domain(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return sum;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    require_same_domain(p, q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        sum += p[i] * std::log2(p[i] / q[i]);
    }
    // Rounding can leave a -1e-17 residue for p == q.
    return std::max(sum, 0.0);
}

Distribution mixture(std::span<const std::pair<double, Distribution>> components) {
    if (components.empty()) throw Error("mixture requires at least one component");
    const Distribution& first = components.front().second;
    double weight_sum = 0.0;
    for (const auto& [w, d] : components) {
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) throw Error("mixture weight outside [0, 1]");
        require_same_domain(first, d);
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > kUnitMassTolerance) throw Error("mixture weights do not sum to 1");
    std::vector<double> mass(first.size(), 0.0);
    for (const auto& [w, d] : components) {
        for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += w * d[i];
    }
    return Distribution(first.domain(), std::move(mass));
}

Sampler::Sampler(const Distribution& d) : cumulative_(d.size()) {
    std::partial_sum(d.mass().begin(), d.mass().end(), cumulative_.begin());
}

std::size_t Sampler::operator()(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx < cumulative_.size()) return idx;
    // u rounded up to the total: take the last atom with positive mass.
    idx = cumulative_.size() - 1;
    while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1]) --idx;
    return idx;
}

std::size_t sample_one(const Distribution& d, Rng& rng) { return Sampler(d)(rng); }

std::vector<std::size_t> sample(const Distribution& d, Rng& rng, std::size_t n) {
    std::vector<std::size_t> out;
    out.reserve(n);
    if (n == 0) return out;
    Sampler draw(d);
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng));
    return out;
}

}  // namespace plugrisk
