#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plugrisk/dist_core.hpp"
#include "plugrisk/random.hpp"

namespace plugrisk {

/// Probabilistic deterministic finite automaton with quantized probabilities.
///
/// Every probability is stored as an integer numerator over 2^precision. At
/// each state the stop numerator plus all transition numerators equals
/// 2^precision exactly. A transition with numerator 0 is undefined (it has no
/// target; the stored target is canonically 0). A single transition may not
/// carry the whole mass of a state, since its numerator must fit in
/// `precision` bits of the canonical encoding.
class Pdfa {
public:
    struct State {
        std::uint64_t stop = 0;
        std::vector<std::uint64_t> weight;  // per symbol
        std::vector<std::size_t> target;    // per symbol

        bool operator==(const State&) const = default;
    };

    /// Symbols are single printable ASCII characters.
    Pdfa(std::string alphabet, unsigned precision, std::size_t initial, std::vector<State> states);

    /// Builds from real-valued probabilities, each of which must be an exact
    /// multiple of 2^-precision. `transitions[q]` maps symbol -> (probability, target).
    struct StateSpec {
        double stop = 1.0;
        std::map<char, std::pair<double, std::size_t>> transitions;
    };
    static Pdfa from_probabilities(std::string alphabet, unsigned precision, std::size_t initial,
                                   const std::vector<StateSpec>& states);

    std::size_t num_states() const { return states_.size(); }
    const std::string& alphabet() const { return alphabet_; }
    unsigned precision() const { return precision_; }
    std::size_t initial() const { return initial_; }
    const std::vector<State>& states() const { return states_; }

    double stop_probability(std::size_t q) const;
    double transition_probability(std::size_t q, std::size_t symbol) const;
    /// Symbol index, or throws for a character outside the alphabet.
    std::size_t symbol_index(char c) const;

    bool operator==(const Pdfa&) const = default;

private:
    std::string alphabet_;
    unsigned precision_;
    std::size_t initial_;
    std::vector<State> states_;
};

/// Probability that the machine generates exactly `s` and then stops.
double string_probability(const Pdfa& a, const std::string& s);

/// Atom label collecting all strings longer than the truncation length.
inline const std::string kOverflowAtom = "⊥";

/// All strings of length <= max_len in shortlex order, then the overflow atom.
DomainPtr truncated_string_domain(const std::string& alphabet, std::size_t max_len,
                                  std::size_t max_atoms = std::size_t{1} << 20);

/// Number of atoms of truncated_string_domain without building it.
std::size_t truncated_domain_size(std::size_t alphabet_size, std::size_t max_len);

/// Exact string probabilities up to max_len; the overflow atom gets the rest.
/// Throws when the domain would exceed `max_atoms`.
Distribution truncate(const Pdfa& a, std::size_t max_len, std::size_t max_atoms = std::size_t{1} << 20);

inline constexpr std::size_t kDefaultEmissionCap = 1'000'000;

/// Random walk from the initial state. Throws "runaway generation" past `emission_cap` symbols.
std::string sample_string(const Pdfa& a, Rng& rng, std::size_t emission_cap = kDefaultEmissionCap);

// Canonical bit encoding:
//   header  = gamma(n) gamma(|alphabet| + 1) gamma(precision) gamma(initial + 1),
//             then 8 bits per alphabet symbol
//   payload = per state: stop (precision bits), then per symbol:
//             numerator (precision bits), target (ceil(log2 n) bits)
// where gamma is the Elias gamma code. A stop probability of 1 is written as 0;
// it is the only state layout whose fields are all zero.

std::size_t encoding_header_length(const Pdfa& a);
std::size_t encoding_payload_length(const Pdfa& a);

/// header + n * (|alphabet| * (precision + ceil(log2 n)) + precision)
std::size_t encoding_length(const Pdfa& a);

std::vector<bool> encode(const Pdfa& a);
Pdfa decode(const std::vector<bool>& bits);

}  // namespace plugrisk
