#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "plugrisk/dist_core.hpp"
#include "plugrisk/error.hpp"
#include "plugrisk/instances.hpp"
#include "plugrisk/serialize.hpp"

using namespace plugrisk;

namespace {

Distribution two(double a, double b) {
    static const DomainPtr domain = Domain::indexed(2);
    return make_distribution(domain, {a, b});
}

}  // namespace

TEST_CASE("domain rejects empty and duplicate atoms") {
    CHECK_THROWS_AS(Domain(std::vector<std::string>{}), Error);
    CHECK_THROWS_AS(Domain({"a", "b", "a"}), Error);
    const Domain d({"a", "b"});
    CHECK(d.size() == 2);
    CHECK(d.index_of("b") == 1);
    CHECK_THROWS_AS(d.index_of("c"), Error);
}

TEST_CASE("make_distribution normalizes") {
    const auto even = two(1, 1);
    CHECK(even[0] == 0.5);
    CHECK(even[1] == 0.5);
    const auto skew = two(3, 1);
    CHECK(skew[0] == 0.75);
    CHECK(skew[1] == 0.25);
}

TEST_CASE("make_distribution errors") {
    CHECK_THROWS_WITH_AS(make_distribution(Domain::indexed(1), {0.0}), "degenerate", Error);
    CHECK_THROWS_WITH_AS(two(-1, 2), "invalid mass", Error);
    CHECK_THROWS_WITH_AS(two(std::nan(""), 2), "invalid mass", Error);
    CHECK_THROWS_WITH_AS(two(std::numeric_limits<double>::infinity(), 2), "invalid mass", Error);
    CHECK_THROWS_AS(make_distribution(Domain::indexed(3), {1, 1}), Error);
}

TEST_CASE("l1 distance examples") {
    CHECK(l1_distance(two(0.3, 0.7), two(0.3, 0.7)) == 0.0);
    CHECK(l1_distance(two(1, 0), two(0, 1)) == 2.0);
    CHECK(l1_distance(two(0.6, 0.4), two(0.49, 0.51)) == doctest::Approx(0.22).epsilon(1e-12));
}

TEST_CASE("kl divergence examples") {
    CHECK(kl_divergence(two(0.6, 0.4), two(0.6, 0.4)) == 0.0);
    // 0.6 log2(0.6/0.49) + 0.4 log2(0.4/0.51), summed independently
    CHECK(kl_divergence(two(0.6, 0.4), two(0.49, 0.51)) == doctest::Approx(0.035109552062332905).epsilon(1e-12));
    CHECK(std::isinf(kl_divergence(two(1, 0), two(0, 1))));
    // 0 log 0 convention
    CHECK(kl_divergence(two(1, 0), two(0.5, 0.5)) == doctest::Approx(1.0));
}

TEST_CASE("divergences reject mismatched domains") {
    const auto p = two(1, 1);
    const auto q = make_distribution(Domain::make({"a", "b"}), {1, 1});
    CHECK_THROWS_AS(l1_distance(p, q), Error);
    CHECK_THROWS_AS(kl_divergence(p, q), Error);
    // equal atom lists on distinct Domain objects are the same domain
    const auto r = make_distribution(Domain::indexed(2), {1, 3});
    CHECK(l1_distance(p, r) == doctest::Approx(0.5));
}

TEST_CASE("mixture examples") {
    std::vector<std::pair<double, Distribution>> half{{0.5, two(0.6, 0.4)}, {0.5, two(0.4, 0.6)}};
    const auto mixed = mixture(half);
    CHECK(mixed[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mixed[1] == doctest::Approx(0.5).epsilon(1e-15));

    std::vector<std::pair<double, Distribution>> single{{1.0, two(0.3, 0.7)}};
    CHECK(l1_distance(mixture(single), two(0.3, 0.7)) == 0.0);

    std::vector<std::pair<double, Distribution>> points{{0.25, two(1, 0)}, {0.75, two(0, 1)}};
    const auto pm = mixture(points);
    CHECK(pm[0] == 0.25);
    CHECK(pm[1] == 0.75);

    std::vector<std::pair<double, Distribution>> bad{{0.5, two(1, 0)}, {0.6, two(0, 1)}};
    CHECK_THROWS_AS(mixture(bad), Error);
}

TEST_CASE("sampling") {
    const auto domain = Domain::indexed(3);
    Rng rng(7);
    const auto point = Distribution::point_mass(domain, 0);
    CHECK(sample(point, rng, 5) == std::vector<std::size_t>(5, 0));
    CHECK(sample(point, rng, 0).empty());

    // Zero-mass atoms are never drawn.
    const auto gap = make_distribution(domain, {1, 0, 1});
    for (auto x : sample(gap, rng, 2000)) CHECK(x != 1);

    const auto fair = two(1, 1);
    Rng seeded(12345);
    const auto draws = sample(fair, seeded, 100000);
    std::size_t zeros = 0;
    for (auto x : draws) zeros += x == 0;
    CHECK(std::abs(static_cast<double>(zeros) / 1e5 - 0.5) < 0.01);

    Rng again(12345);
    CHECK(sample(fair, again, 100000) == draws);
}

TEST_CASE("divergence properties on random triples") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const auto domain = Domain::indexed(1 + uniform_index(rng, 40));
        const double zeros = trial % 3 == 0 ? 0.3 : 0.0;
        const auto p = random_distribution(domain, rng, zeros);
        const auto q = random_distribution(domain, rng, zeros);
        const auto r = random_distribution(domain, rng, zeros);
        const double pq = l1_distance(p, q);
        CHECK(pq >= 0.0);
        CHECK(pq <= 2.0 + 1e-12);
        CHECK(pq == l1_distance(q, p));
        CHECK(pq <= l1_distance(p, r) + l1_distance(r, q) + 1e-12);
        CHECK(pq == doctest::Approx(static_cast<double>(oracle::l1(oracle::mass_of(p), oracle::mass_of(q)))));

        const double kl = kl_divergence(p, q);
        CHECK(kl >= 0.0);
        CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-12));
        // Pinsker, KL in bits
        CHECK(pq * pq / (2.0 * std::log(2.0)) <= kl + 1e-12);
        if (std::isfinite(kl)) {
            CHECK(kl == doctest::Approx(static_cast<double>(oracle::kl_bits(oracle::mass_of(p), oracle::mass_of(q))))
                            .epsilon(1e-10));
        }

        const double w = uniform01(rng);
        std::vector<std::pair<double, Distribution>> parts{{w, p}, {1.0 - w, q}};
        const auto mix = mixture(parts);
        double total = 0.0;
        for (double v : mix.mass()) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("distribution JSON round-trips bit-exactly") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_distribution(Domain::indexed(1 + uniform_index(rng, 30)), rng, 0.2);
        const auto text = io::to_json(d).dump();
        const auto back = io::distribution_from_json(io::json::parse(text));
        CHECK(back.domain()->atoms() == d.domain()->atoms());
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(back[i] == d[i]);
    }
}
