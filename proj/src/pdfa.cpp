#include "plugrisk/pdfa.hpp"

#include <bit>
#include <cmath>

#include "plugrisk/error.hpp"

namespace plugrisk {

namespace {

constexpr unsigned kMaxPrecision = 52;

std::size_t ceil_log2(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1)); }

std::size_t gamma_length(std::uint64_t v) { return 2 * static_cast<std::size_t>(std::bit_width(v)) - 1; }

class BitWriter {
public:
    void put(std::uint64_t value, std::size_t width) {
        for (std::size_t i = width; i-- > 0;) bits_.push_back(((value >> i) & 1U) != 0);
    }
    void put_gamma(std::uint64_t v) {
        const auto width = static_cast<std::size_t>(std::bit_width(v));
        put(0, width - 1);
        put(v, width);
    }
    std::vector<bool> take() { return std::move(bits_); }

private:
    std::vector<bool> bits_;
};

class BitReader {
public:
    explicit BitReader(const std::vector<bool>& bits) : bits_(bits) {}

    std::uint64_t get(std::size_t width) {
        if (width > 64 || pos_ + width > bits_.size()) throw Error("corrupt encoding: truncated");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < width; ++i) v = (v << 1) | (bits_[pos_++] ? 1U : 0U);
        return v;
    }
    std::uint64_t get_gamma() {
        std::size_t zeros = 0;
        while (true) {
            if (pos_ >= bits_.size()) throw Error("corrupt encoding: truncated");
            if (bits_[pos_]) break;
            ++zeros;
            ++pos_;
        }
        if (zeros >= 64) throw Error("corrupt encoding: integer too large");
        return get(zeros + 1);
    }
    bool exhausted() const { return pos_ == bits_.size(); }

private:
    const std::vector<bool>& bits_;
    std::size_t pos_ = 0;
};

}  // namespace

Pdfa::Pdfa(std::string alphabet, unsigned precision, std::size_t initial, std::vector<State> states)
    : alphabet_(std::move(alphabet)), precision_(precision), initial_(initial), states_(std::move(states)) {
    if (precision_ == 0 || precision_ > kMaxPrecision) throw Error("precision must lie in [1, 52]");
    if (states_.empty()) throw Error("automaton needs at least one state");
    if (initial_ >= states_.size()) throw Error("initial state out of range");
    for (std::size_t i = 0; i < alphabet_.size(); ++i) {
        const char c = alphabet_[i];
        if (c < 0x21 || c > 0x7e) throw Error("alphabet symbols must be printable ASCII");
        if (alphabet_.find(c) != i) throw Error("duplicate alphabet symbol");
    }
    const std::uint64_t full = std::uint64_t{1} << precision_;
    for (auto& st : states_) {
        if (st.weight.size() != alphabet_.size() || st.target.size() != alphabet_.size()) {
            throw Error("state transition table does not match the alphabet");
        }
        std::uint64_t total = st.stop;
        for (std::size_t s = 0; s < alphabet_.size(); ++s) {
            if (st.weight[s] >= full) throw Error("transition probability 1 is not encodable at this precision");
            if (st.weight[s] == 0) {
                st.target[s] = 0;
            } else if (st.target[s] >= states_.size()) {
                throw Error("transition target out of range");
            }
            total += st.weight[s];
        }
        if (total != full) throw Error("state probabilities do not sum to 1");
    }
}

Pdfa Pdfa::from_probabilities(std::string alphabet, unsigned precision, std::size_t initial,
                              const std::vector<StateSpec>& specs) {
    if (precision == 0 || precision > kMaxPrecision) throw Error("precision must lie in [1, 52]");
    const double scale = std::ldexp(1.0, static_cast<int>(precision));
    auto quantize = [&](double p) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw Error("probability outside [0, 1]");
        const double units = p * scale;
        if (units != std::floor(units)) throw Error("probability is not a multiple of 2^-precision");
        return static_cast<std::uint64_t>(units);
    };
    std::vector<State> states;
    states.reserve(specs.size());
    for (const auto& spec : specs) {
        State st;
        st.stop = quantize(spec.stop);
        st.weight.assign(alphabet.size(), 0);
        st.target.assign(alphabet.size(), 0);
        for (const auto& [symbol, edge] : spec.transitions) {
            const auto pos = alphabet.find(symbol);
            if (pos == std::string::npos) throw Error(std::string("symbol '") + symbol + "' outside alphabet");
            st.weight[pos] = quantize(edge.first);
            st.target[pos] = edge.second;
        }
        states.push_back(std::move(st));
    }
    return Pdfa(std::move(alphabet), precision, initial, std::move(states));
}

double Pdfa::stop_probability(std::size_t q) const {
    return std::ldexp(static_cast<double>(states_.at(q).stop), -static_cast<int>(precision_));
}

double Pdfa::transition_probability(std::size_t q, std::size_t symbol) const {
    return std::ldexp(static_cast<double>(states_.at(q).weight.at(symbol)), -static_cast<int>(precision_));
}

std::size_t Pdfa::symbol_index(char c) const {
    const auto pos = alphabet_.find(c);
    if (pos == std::string::npos) throw Error(std::string("symbol '") + c + "' outside alphabet");
    return pos;
}

double string_probability(const Pdfa& a, const std::string& s) {
    std::size_t q = a.initial();
    double p = 1.0;
    for (char c : s) {
        const std::size_t sym = a.symbol_index(c);
        const double step = a.transition_probability(q, sym);
        if (step == 0.0) return 0.0;
        p *= step;
        q = a.states()[q].target[sym];
    }
    return p * a.stop_probability(q);
}

std::size_t truncated_domain_size(std::size_t alphabet_size, std::size_t max_len) {
    // sum_{l=0}^{L} |S|^l, plus the overflow atom; saturates instead of overflowing.
    std::size_t total = 0;
    std::size_t level = 1;
    for (std::size_t l = 0; l <= max_len; ++l) {
        if (total > SIZE_MAX - level) return SIZE_MAX;
        total += level;
        if (alphabet_size == 0) {
            level = 0;
        } else if (level > SIZE_MAX / alphabet_size) {
            level = SIZE_MAX - total;
        } else {
            level *= alphabet_size;
        }
    }
    return total == SIZE_MAX ? total : total + 1;
}

DomainPtr truncated_string_domain(const std::string& alphabet, std::size_t max_len, std::size_t max_atoms) {
    const std::size_t count = truncated_domain_size(alphabet.size(), max_len);
    if (count > max_atoms) throw Error("truncated domain exceeds the enumeration limit");
    std::vector<std::string> atoms;
    atoms.reserve(count);
    atoms.emplace_back();
    for (std::size_t begin = 0; atoms.back().size() < max_len && !alphabet.empty();) {
        const std::size_t end = atoms.size();
        for (std::size_t i = begin; i < end; ++i) {
            for (char c : alphabet) atoms.push_back(atoms[i] + c);
        }
        begin = end;
    }
    atoms.push_back(kOverflowAtom);
    return Domain::make(std::move(atoms));
}

Distribution truncate(const Pdfa& a, std::size_t max_len, std::size_t max_atoms) {
    DomainPtr domain = truncated_string_domain(a.alphabet(), max_len, max_atoms);
    const std::size_t m = domain->size();
    // Walk the atoms in shortlex order carrying prefix probability and state;
    // the children of atom i are contiguous, so one queue index suffices.
    std::vector<double> prefix(m - 1);
    std::vector<std::size_t> state(m - 1);
    std::vector<double> mass(m, 0.0);
    prefix[0] = 1.0;
    state[0] = a.initial();
    const std::size_t sigma = a.alphabet().size();
    std::size_t next = 1;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        mass[i] = prefix[i] * a.stop_probability(state[i]);
        total += mass[i];
        if (domain->atom(i).size() == max_len) continue;
        for (std::size_t s = 0; s < sigma; ++s, ++next) {
            prefix[next] = prefix[i] * a.transition_probability(state[i], s);
            state[next] = a.states()[state[i]].target[s];
        }
    }
    mass[m - 1] = std::max(0.0, 1.0 - total);
    return Distribution(std::move(domain), std::move(mass));
}

std::string sample_string(const Pdfa& a, Rng& rng, std::size_t emission_cap) {
    const double scale = std::ldexp(1.0, static_cast<int>(a.precision()));
    std::string out;
    std::size_t q = a.initial();
    while (true) {
        const auto& st = a.states()[q];
        // Draw an integer in [0, 2^precision) and walk the cumulative numerators.
        const auto u = static_cast<std::uint64_t>(uniform01(rng) * scale);
        std::uint64_t acc = st.stop;
        if (u < acc) return out;
        std::size_t chosen = 0;
        for (std::size_t s = 0; s < st.weight.size(); ++s) {
            acc += st.weight[s];
            if (u < acc) {
                chosen = s;
                break;
            }
        }
        if (out.size() >= emission_cap) throw Error("runaway generation");
        out.push_back(a.alphabet()[chosen]);
        q = st.target[chosen];
    }
}

std::size_t encoding_header_length(const Pdfa& a) {
    return gamma_length(a.num_states()) + gamma_length(a.alphabet().size() + 1) + gamma_length(a.precision()) +
           gamma_length(a.initial() + 1) + 8 * a.alphabet().size();
}

std::size_t encoding_payload_length(const Pdfa& a) {
    const std::size_t n = a.num_states();
    const std::size_t l = a.precision();
    return n * (a.alphabet().size() * (l + ceil_log2(n)) + l);
}

std::size_t encoding_length(const Pdfa& a) { return encoding_header_length(a) + encoding_payload_length(a); }

std::vector<bool> encode(const Pdfa& a) {
    BitWriter w;
    const std::size_t n = a.num_states();
    w.put_gamma(n);
    w.put_gamma(a.alphabet().size() + 1);
    w.put_gamma(a.precision());
    w.put_gamma(a.initial() + 1);
    for (char c : a.alphabet()) w.put(static_cast<unsigned char>(c), 8);
    const std::uint64_t mask = (std::uint64_t{1} << a.precision()) - 1;
    const std::size_t target_bits = ceil_log2(n);
    for (const auto& st : a.states()) {
        w.put(st.stop & mask, a.precision());
        for (std::size_t s = 0; s < st.weight.size(); ++s) {
            w.put(st.weight[s], a.precision());
            w.put(st.target[s], target_bits);
        }
    }
    return w.take();
}

Pdfa decode(const std::vector<bool>& bits) {
    BitReader r(bits);
    const std::uint64_t n = r.get_gamma();
    const std::uint64_t sigma = r.get_gamma() - 1;
    const std::uint64_t precision = r.get_gamma();
    const std::uint64_t initial = r.get_gamma() - 1;
    if (precision > kMaxPrecision) throw Error("corrupt encoding: precision out of range");
    if (sigma > 94 || n > (std::uint64_t{1} << 32)) throw Error("corrupt encoding: header out of range");
    std::string alphabet;
    for (std::uint64_t s = 0; s < sigma; ++s) alphabet.push_back(static_cast<char>(r.get(8)));
    const std::uint64_t full = std::uint64_t{1} << precision;
    const std::size_t target_bits = ceil_log2(static_cast<std::size_t>(n));
    std::vector<Pdfa::State> states(static_cast<std::size_t>(n));
    for (auto& st : states) {
        const std::uint64_t stop_field = r.get(precision);
        std::uint64_t emitted = 0;
        for (std::uint64_t s = 0; s < sigma; ++s) {
            st.weight.push_back(r.get(precision));
            st.target.push_back(static_cast<std::size_t>(r.get(target_bits)));
            emitted += st.weight.back();
        }
        if (emitted > full) throw Error("corrupt encoding: state mass exceeds 1");
        st.stop = full - emitted;
        if ((st.stop & (full - 1)) != stop_field) throw Error("corrupt encoding: inconsistent stop probability");
    }
    if (!r.exhausted()) throw Error("corrupt encoding: trailing bits");
    return Pdfa(std::move(alphabet), static_cast<unsigned>(precision), static_cast<std::size_t>(initial),
                std::move(states));
}

}  // namespace plugrisk
