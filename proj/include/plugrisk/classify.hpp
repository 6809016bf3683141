#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plugrisk/dist_core.hpp"

namespace plugrisk {

// Labels are 0-based indices into the class list.
using Label = std::size_t;

/// Class priors plus one class-conditional distribution per label, all on a
/// shared domain. The induced marginal is the prior-weighted mixture.
class LabeledSource {
public:
    LabeledSource(std::vector<double> priors, std::vector<Distribution> classes);

    std::size_t num_classes() const { return priors_.size(); }
    std::size_t domain_size() const { return classes_.front().size(); }
    const DomainPtr& domain() const { return classes_.front().domain(); }
    double prior(Label i) const { return priors_[i]; }
    const std::vector<double>& priors() const { return priors_; }
    const Distribution& class_dist(Label i) const { return classes_[i]; }
    const std::vector<Distribution>& classes() const { return classes_; }

    /// Marginal mass D(x) = sum_i g_i D_i(x).
    double marginal(std::size_t x) const;
    Distribution marginal() const;

    /// Same priors, different class-conditional distributions.
    LabeledSource with_classes(std::vector<Distribution> classes) const;

private:
    std::vector<double> priors_;
    std::vector<Distribution> classes_;
};

/// k x k non-negative costs; at(i, j) is the cost of predicting j when the truth is i.
class CostMatrix {
public:
    CostMatrix(std::size_t k, std::vector<double> row_major);
    explicit CostMatrix(const std::vector<std::vector<double>>& rows);

    static CostMatrix zero_one(std::size_t k);

    std::size_t size() const { return k_; }
    double at(Label truth, Label predicted) const { return c_[truth * k_ + predicted]; }
    double max_entry() const;
    std::vector<std::vector<double>> rows() const;

    CostMatrix scaled(double factor) const;
    friend CostMatrix operator+(const CostMatrix& a, const CostMatrix& b);

private:
    std::size_t k_;
    std::vector<double> c_;
};

/// Deterministic labeling of every atom.
class Classifier {
public:
    Classifier(std::size_t num_classes, std::vector<Label> labels);

    std::size_t num_classes() const { return k_; }
    std::size_t domain_size() const { return labels_.size(); }
    Label operator()(std::size_t x) const { return labels_[x]; }
    const std::vector<Label>& labels() const { return labels_; }

    bool operator==(const Classifier&) const = default;

private:
    std::size_t k_;
    std::vector<Label> labels_;
};

/// Per-atom probability vector over labels (a k-class p-concept).
class StochasticRule {
public:
    StochasticRule(std::size_t num_classes, std::vector<std::vector<double>> rows);

    std::size_t num_classes() const { return k_; }
    std::size_t domain_size() const { return rows_.size(); }
    std::span<const double> operator()(std::size_t x) const { return rows_[x]; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

private:
    std::size_t k_;
    std::vector<std::vector<double>> rows_;
};

/// Cost-minimizing label at every atom; ties go to the smallest label.
Classifier bayes_classifier(const LabeledSource& source, const CostMatrix& cost);

/// Expected cost of `f` under the joint distribution of `source`.
double risk(const Classifier& f, const LabeledSource& source, const CostMatrix& cost);

/// Label posterior at atom x. Throws when x has zero marginal mass.
std::vector<double> posterior(const LabeledSource& source, std::size_t x);

/// Posterior tabulated over the domain; zero-mass atoms get the uniform row.
StochasticRule posterior_rule(const LabeledSource& source);

/// Posterior rule of an estimated source (estimated class distributions, true priors).
StochasticRule plugin_rule(const LabeledSource& estimated);

/// Expected negative log2-likelihood of the true label. +infinity when the
/// rule assigns zero probability to a label that occurs.
double logloss_risk(const StochasticRule& rule, const LabeledSource& source);

}  // namespace plugrisk
