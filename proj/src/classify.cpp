#include "plugrisk/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plugrisk/error.hpp"

namespace plugrisk {

namespace {

constexpr double kUnitMassTolerance = 1e-12;

// Relative band inside which two expected costs count as a tie. Keeps the
// argmin stable under cost rescaling and summation-order rounding.
constexpr double kTieRelTolerance = 1e-13;

void require_compatible(const LabeledSource& source, std::size_t k, std::size_t m) {
    if (source.num_classes() != k) throw Error("class count mismatch");
    if (source.domain_size() != m) throw Error("domain size mismatch");
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.size());
    for (const auto& row : rows) {
        if (row.size() != rows.size()) throw Error("cost matrix must be square");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return flat;
}

}  // namespace

LabeledSource::LabeledSource(std::vector<double> priors, std::vector<Distribution> classes)
    : priors_(std::move(priors)), classes_(std::move(classes)) {
    if (priors_.size() < 2) throw Error("a labeled source needs at least two classes");
    if (classes_.size() != priors_.size()) throw Error("priors and class distributions differ in count");
    double total = 0.0;
    for (double g : priors_) {
        if (!std::isfinite(g) || g <= 0.0 || g > 1.0) throw Error("class prior outside (0, 1]");
        total += g;
    }
    if (std::abs(total - 1.0) > kUnitMassTolerance) throw Error("class priors do not sum to 1");
    for (const auto& d : classes_) require_same_domain(classes_.front(), d);
}

double LabeledSource::marginal(std::size_t x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < priors_.size(); ++i) sum += priors_[i] * classes_[i][x];
    return sum;
}

Distribution LabeledSource::marginal() const {
    std::vector<double> mass(domain_size());
    for (std::size_t x = 0; x < mass.size(); ++x) mass[x] = marginal(x);
    return Distribution(domain(), std::move(mass));
}

LabeledSource LabeledSource::with_classes(std::vector<Distribution> classes) const {
    if (classes.size() != priors_.size()) throw Error("class count mismatch");
    for (const auto& d : classes) require_same_domain(classes_.front(), d);
    return LabeledSource(priors_, std::move(classes));
}

CostMatrix::CostMatrix(std::size_t k, std::vector<double> row_major) : k_(k), c_(std::move(row_major)) {
    if (k_ == 0 || c_.size() != k_ * k_) throw Error("cost matrix must be k x k");
    for (double c : c_) {
        if (!std::isfinite(c) || c < 0.0) throw Error("cost entries must be finite and non-negative");
    }
}

CostMatrix::CostMatrix(const std::vector<std::vector<double>>& rows) : CostMatrix(rows.size(), flatten(rows)) {}

CostMatrix CostMatrix::zero_one(std::size_t k) {
    std::vector<double> c(k * k, 1.0);
    for (std::size_t i = 0; i < k; ++i) c[i * k + i] = 0.0;
    return CostMatrix(k, std::move(c));
}

double CostMatrix::max_entry() const { return *std::max_element(c_.begin(), c_.end()); }

std::vector<std::vector<double>> CostMatrix::rows() const {
    std::vector<std::vector<double>> out(k_);
    for (std::size_t i = 0; i < k_; ++i) out[i].assign(c_.begin() + i * k_, c_.begin() + (i + 1) * k_);
    return out;
}

CostMatrix CostMatrix::scaled(double factor) const {
    std::vector<double> c = c_;
    for (double& v : c) v *= factor;
    return CostMatrix(k_, std::move(c));
}

CostMatrix operator+(const CostMatrix& a, const CostMatrix& b) {
    if (a.k_ != b.k_) throw Error("cost matrix dimension mismatch");
    std::vector<double> c(a.c_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.c_[i] + b.c_[i];
    return CostMatrix(a.k_, std::move(c));
}

Classifier::Classifier(std::size_t num_classes, std::vector<Label> labels) : k_(num_classes), labels_(std::move(labels)) {
    for (Label l : labels_) {
        if (l >= k_) throw Error("classifier label out of range");
    }
}

StochasticRule::StochasticRule(std::size_t num_classes, std::vector<std::vector<double>> rows)
    : k_(num_classes), rows_(std::move(rows)) {
    for (const auto& row : rows_) {
        if (row.size() != k_) throw Error("rule row has wrong length");
        double total = 0.0;
        for (double p : row) {
            if (!std::isfinite(p) || p < 0.0) throw Error("rule row has an invalid probability");
            total += p;
        }
        if (std::abs(total - 1.0) > kUnitMassTolerance) throw Error("rule row does not sum to 1");
    }
}

Classifier bayes_classifier(const LabeledSource& source, const CostMatrix& cost) {
    const std::size_t k = source.num_classes();
    if (cost.size() != k) throw Error("cost matrix dimension mismatch");
    const std::size_t m = source.domain_size();
    std::vector<Label> labels(m, 0);
    std::vector<double> weighted(k);
    for (std::size_t x = 0; x < m; ++x) {
        double scale = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            weighted[i] = source.prior(i) * source.class_dist(i)[x];
            scale += weighted[i];
        }
        scale *= cost.max_entry();
        Label best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (Label j = 0; j < k; ++j) {
            double expected = 0.0;
            for (std::size_t i = 0; i < k; ++i) expected += cost.at(i, j) * weighted[i];
            if (expected < best_cost - kTieRelTolerance * scale) {
                best = j;
                best_cost = expected;
            }
        }
        labels[x] = best;
    }
    return Classifier(k, std::move(labels));
}

double risk(const Classifier& f, const LabeledSource& source, const CostMatrix& cost) {
    const std::size_t k = source.num_classes();
    if (cost.size() != k) throw Error("cost matrix dimension mismatch");
    require_compatible(source, f.num_classes(), f.domain_size());
    double total = 0.0;
    for (std::size_t x = 0; x < f.domain_size(); ++x) {
        const Label j = f(x);
        for (std::size_t i = 0; i < k; ++i) total += cost.at(i, j) * source.prior(i) * source.class_dist(i)[x];
    }
    return total;
}

std::vector<double> posterior(const LabeledSource& source, std::size_t x) {
    if (x >= source.domain_size()) throw Error("atom index out of range");
    const double mass = source.marginal(x);
    if (mass <= 0.0) throw Error("atom outside mixture support");
    std::vector<double> out(source.num_classes());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = source.prior(i) * source.class_dist(i)[x] / mass;
    return out;
}

StochasticRule posterior_rule(const LabeledSource& source) {
    const std::size_t k = source.num_classes();
    std::vector<std::vector<double>> rows;
    rows.reserve(source.domain_size());
    for (std::size_t x = 0; x < source.domain_size(); ++x) {
        if (source.marginal(x) > 0.0) {
            rows.push_back(posterior(source, x));
        } else {
            rows.emplace_back(k, 1.0 / static_cast<double>(k));
        }
    }
    return StochasticRule(k, std::move(rows));
}

StochasticRule plugin_rule(const LabeledSource& estimated) { return posterior_rule(estimated); }

double logloss_risk(const StochasticRule& rule, const LabeledSource& source) {
    require_compatible(source, rule.num_classes(), rule.domain_size());
    double total = 0.0;
    for (std::size_t x = 0; x < rule.domain_size(); ++x) {
        const auto row = rule(x);
        for (std::size_t i = 0; i < rule.num_classes(); ++i) {
            // D(x) * Pr_i(x) == g_i * D_i(x)
            const double joint = source.prior(i) * source.class_dist(i)[x];
            if (joint == 0.0) continue;
            if (row[i] == 0.0) return std::numeric_limits<double>::infinity();
            total -= joint * std::log2(row[i]);
        }
    }
    return total;
}

}  // namespace plugrisk
