#pragma once

// Test machines shared by the PDFA unit tests and the acceptance binary.

#include <string>
#include <utility>
#include <vector>

#include "plugrisk/pdfa.hpp"
#include "plugrisk/random.hpp"

namespace zoo {

using plugrisk::Pdfa;

// Stop 1/2, emit 'a' with 1/2 and loop.
inline Pdfa geometric() { return Pdfa::from_probabilities("a", 8, 0, {{0.5, {{'a', {0.5, 0}}}}}); }

inline Pdfa point_mass() { return Pdfa::from_probabilities("a", 4, 0, {{1.0, {}}}); }

inline Pdfa empty_alphabet() { return Pdfa::from_probabilities("", 8, 0, {{1.0, {}}}); }

inline Pdfa two_symbol() { return Pdfa::from_probabilities("ab", 2, 0, {{0.5, {{'a', {0.25, 0}}, {'b', {0.25, 0}}}}}); }

// Alternates a then b.
inline Pdfa alternating() {
    return Pdfa::from_probabilities("ab", 3, 0, {{0.25, {{'a', {0.75, 1}}}}, {0.5, {{'b', {0.5, 0}}}}});
}

// Never stops.
inline Pdfa runaway() { return Pdfa::from_probabilities("ab", 1, 0, {{0.0, {{'a', {0.5, 0}}, {'b', {0.5, 0}}}}}); }

// Random machine: every state stops with probability >= 1/4, the rest is
// split over the alphabet at `precision` bits.
inline Pdfa random_machine(std::size_t n, const std::string& alphabet, unsigned precision, plugrisk::Rng& rng) {
    const std::uint64_t full = std::uint64_t{1} << precision;
    std::vector<Pdfa::State> states(n);
    for (auto& st : states) {
        std::uint64_t left = full - full / 4;
        st.weight.assign(alphabet.size(), 0);
        st.target.assign(alphabet.size(), 0);
        for (std::size_t s = 0; s < alphabet.size(); ++s) {
            const std::uint64_t w = plugrisk::uniform_index(rng, left + 1);
            st.weight[s] = w;
            st.target[s] = plugrisk::uniform_index(rng, n);
            left -= w;
        }
        st.stop = full;
        for (auto w : st.weight) st.stop -= w;
    }
    return Pdfa(alphabet, precision, plugrisk::uniform_index(rng, n), std::move(states));
}

/// Every machine the integration checks iterate over.
inline std::vector<std::pair<std::string, Pdfa>> machines() {
    std::vector<std::pair<std::string, Pdfa>> out{{"geometric", geometric()},      {"point_mass", point_mass()},
                                                  {"empty_alphabet", empty_alphabet()}, {"two_symbol", two_symbol()},
                                                  {"alternating", alternating()},  {"runaway", runaway()}};
    plugrisk::Rng rng(2718);
    const std::string alphabets[] = {"a", "ab", "xyz", "0123"};
    for (int i = 0; i < 24; ++i) {
        const std::size_t n = 1 + plugrisk::uniform_index(rng, 9);
        const auto& sigma = alphabets[plugrisk::uniform_index(rng, 4)];
        const unsigned precision = 2 + static_cast<unsigned>(plugrisk::uniform_index(rng, 30));
        out.emplace_back("random_" + std::to_string(i), random_machine(n, sigma, precision, rng));
    }
    return out;
}

/// Pairs built differently that generate the same distribution.
inline std::vector<std::pair<Pdfa, Pdfa>> designed_equal_pairs() {
    return {
        // geometric chain unrolled over two identical states
        {geometric(), Pdfa::from_probabilities("a", 8, 0, {{0.5, {{'a', {0.5, 1}}}}, {0.5, {{'a', {0.5, 0}}}}})},
        // an unreachable extra state
        {two_symbol(), Pdfa::from_probabilities("ab", 2, 1,
                                                {{1.0, {}}, {0.5, {{'a', {0.25, 1}}, {'b', {0.25, 1}}}}})},
        // same probabilities at a finer precision
        {alternating(), Pdfa::from_probabilities("ab", 12, 0, {{0.25, {{'a', {0.75, 1}}}}, {0.5, {{'b', {0.5, 0}}}}})},
    };
}

}  // namespace zoo
