#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "plugrisk/bounds.hpp"
#include "plugrisk/classify.hpp"
#include "plugrisk/error.hpp"
#include "plugrisk/instances.hpp"

using namespace plugrisk;

namespace {

LabeledSource two_atom(double a, double b) {
    const auto domain = Domain::indexed(2);
    return LabeledSource({0.5, 0.5}, {make_distribution(domain, {a, 1 - a}), make_distribution(domain, {b, 1 - b})});
}

StochasticRule random_rule(std::size_t k, std::size_t m, Rng& rng) {
    std::vector<std::vector<double>> rows(m, std::vector<double>(k));
    for (auto& row : rows) {
        double s = 0;
        for (auto& v : row) s += v = uniform01_open_low(rng);
        for (auto& v : row) v /= s;
    }
    return StochasticRule(k, rows);
}

}  // namespace

TEST_CASE("source and cost validation") {
    const auto d = Domain::indexed(2);
    const auto u = Distribution::uniform(d);
    CHECK_THROWS_AS(LabeledSource({1.0}, {u}), Error);
    CHECK_THROWS_AS(LabeledSource({0.5, 0.6}, {u, u}), Error);
    CHECK_THROWS_AS(LabeledSource({0.5, 0.5}, {u}), Error);
    CHECK_THROWS_AS(LabeledSource({0.5, 0.5}, {u, Distribution::uniform(Domain::indexed(3))}), Error);
    CHECK_THROWS_AS(CostMatrix(2, {0, 1, -1, 0}), Error);
    CHECK_THROWS_AS(CostMatrix(2, {0, 1, 1}), Error);
    CHECK_THROWS_AS(bayes_classifier(two_atom(0.6, 0.4), CostMatrix::zero_one(3)), Error);
}

TEST_CASE("bayes classifier examples") {
    const auto src = two_atom(0.6, 0.4);
    CHECK(bayes_classifier(src, CostMatrix::zero_one(2)).labels() == std::vector<Label>{0, 1});

    // identical classes: everything ties, smallest label wins
    CHECK(bayes_classifier(two_atom(0.3, 0.3), CostMatrix::zero_one(2)).labels() == std::vector<Label>{0, 0});

    const auto d4 = Domain::indexed(4);
    const auto u = Distribution::uniform(d4);
    const double tiny = 1e-6;
    const LabeledSource heavy({tiny, 1 - 2 * tiny, tiny}, {u, u, u});
    CHECK(bayes_classifier(heavy, CostMatrix::zero_one(3)).labels() == std::vector<Label>(4, 1));
}

TEST_CASE("risk examples") {
    const auto inst = example1_construction(0.1, 0.01);
    const auto& cost = *inst.cost;
    const auto fstar = bayes_classifier(inst.source, cost);
    const auto fprime = bayes_classifier(inst.estimated_source(), cost);
    CHECK(risk(fstar, inst.source, cost) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(risk(fprime, inst.source, cost) == doctest::Approx(0.6).epsilon(1e-12));
    const CostMatrix zero(2, {0, 0, 0, 0});
    CHECK(risk(fstar, inst.source, zero) == 0.0);
    CHECK(risk(fprime, inst.source, zero) == 0.0);
}

TEST_CASE("posterior examples") {
    const auto post = posterior(two_atom(0.6, 0.4), 0);
    CHECK(post[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(post[1] == doctest::Approx(0.4).epsilon(1e-15));

    const auto d = Domain::indexed(3);
    const LabeledSource exclusive({0.5, 0.5}, {make_distribution(d, {1, 0, 0}), make_distribution(d, {0, 1, 0})});
    CHECK(posterior(exclusive, 1) == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_WITH_AS(posterior(exclusive, 2), "atom outside mixture support", Error);

    const auto same = posterior(two_atom(0.3, 0.3), 1);
    CHECK(same[0] == doctest::Approx(0.5));
    CHECK(same[1] == doctest::Approx(0.5));
    // zero-mass atom gets the uniform row
    const auto rule = posterior_rule(exclusive);
    CHECK(rule(2)[0] == 0.5);
}

TEST_CASE("log loss examples") {
    const auto inst = example2_construction(0.1, 0.01);
    const double h = logloss_risk(posterior_rule(inst.source), inst.source);
    // H2(0.6) = -(0.6 log2 0.6 + 0.4 log2 0.4)
    CHECK(h == doctest::Approx(0.9709505944546686).epsilon(1e-12));

    const auto plug = plugin_rule(inst.estimated_source());
    CHECK(plug(0)[0] == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(plug(0)[1] == doctest::Approx(0.51).epsilon(1e-14));

    const auto id = plugin_rule(inst.source);
    const auto post = posterior_rule(inst.source);
    CHECK(id.rows() == post.rows());

    const auto d = Domain::indexed(2);
    const LabeledSource exclusive({0.5, 0.5}, {make_distribution(d, {1, 0}), make_distribution(d, {0, 1})});
    const StochasticRule perfect(2, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(logloss_risk(perfect, exclusive) == 0.0);
    CHECK(plugin_rule(exclusive).rows() == perfect.rows());
    const StochasticRule wrong(2, {{0.0, 1.0}, {0.0, 1.0}});
    CHECK(std::isinf(logloss_risk(wrong, exclusive)));
}

TEST_CASE("bayes classifier is optimal over all classifiers") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 2);
        const std::size_t m = 1 + uniform_index(rng, 6);
        const auto src = random_source(k, m, rng, trial % 2 ? 0.3 : 0.0);
        const auto cost = random_cost_matrix(k, rng);
        const oracle::Problem p(src, cost);
        const double r = risk(bayes_classifier(src, cost), src, cost);
        CHECK(r == doctest::Approx(static_cast<double>(p.risk(bayes_classifier(src, cost).labels()))).epsilon(1e-12));
        CHECK(r <= static_cast<double>(p.brute_force_min_risk()) + 1e-12);
    }
}

TEST_CASE("posterior rule minimizes log loss") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 3);
        const std::size_t m = 2 + uniform_index(rng, 10);
        const auto src = random_source(k, m, rng);
        const double best = logloss_risk(posterior_rule(src), src);
        CHECK(best == doctest::Approx(static_cast<double>(oracle::Problem(src).logloss(oracle::masses(src.classes()))))
                          .epsilon(1e-10));
        for (int r = 0; r < 100; ++r) CHECK(best <= logloss_risk(random_rule(k, m, rng), src) + 1e-9);
    }
}

TEST_CASE("risk is linear in the cost matrix and the argmin is scale invariant") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 4);
        const std::size_t m = 2 + uniform_index(rng, 30);
        const auto src = random_source(k, m, rng);
        const auto c1 = random_cost_matrix(k, rng);
        const auto c2 = random_cost_matrix(k, rng);
        const double a = 5 * uniform01(rng);
        const double b = 5 * uniform01(rng);
        const Classifier f(k, [&] {
            std::vector<Label> labels(m);
            for (auto& l : labels) l = uniform_index(rng, k);
            return labels;
        }());
        const double lhs = risk(f, src, c1.scaled(a) + c2.scaled(b));
        CHECK(lhs == doctest::Approx(a * risk(f, src, c1) + b * risk(f, src, c2)).epsilon(1e-12));

        const double s = std::ldexp(1.0, static_cast<int>(uniform_index(rng, 20)) - 10) * (1 + uniform01(rng));
        CHECK(bayes_classifier(src, c1.scaled(s)) == bayes_classifier(src, c1));

        for (std::size_t x = 0; x < m; ++x) {
            if (src.marginal(x) == 0) continue;
            double total = 0;
            for (double v : posterior(src, x)) total += v;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}
