#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rwdre/errors.hpp"

namespace rwdre {

// Local state of an ordered triple (lower, middle, upper) at one site. Only
// the four ordered states occur; they are written lower-middle-upper, so
// "001" means only the upper coordinate holds a particle.
enum class TripleState : std::uint8_t { s000 = 0, s001 = 1, s011 = 2, s111 = 3 };

inline constexpr std::array<TripleState, 4> kTripleStates{TripleState::s000, TripleState::s001,
                                                          TripleState::s011, TripleState::s111};

// Coordinate values of a triple state, in the order (lower, middle, upper).
inline constexpr std::array<int, 3> coordinates(TripleState s) noexcept {
    switch (s) {
        case TripleState::s000: return {0, 0, 0};
        case TripleState::s001: return {0, 0, 1};
        case TripleState::s011: return {0, 1, 1};
        case TripleState::s111: return {1, 1, 1};
    }
    return {0, 0, 0};
}

TripleState triple_from(int lower, int middle, int upper);
std::string to_string(TripleState s);

// Particle/hole exchange: (a, b, c) -> (1-c, 1-b, 1-a).
inline constexpr TripleState complement(TripleState s) noexcept {
    return static_cast<TripleState>(3 - static_cast<int>(s));
}

// A rate written as an integer combination of c0, c1, lambda0, lambda1, the
// middle flip rates a = c(eta) and b = c(eta') of the two copies, min(a, b)
// and max(a, b).
enum RateSymbol : int { kC0, kC1, kL0, kL1, kA, kB, kMin, kMax, kSymbolCount };

struct RateExpr {
    std::array<int, kSymbolCount> coef{};

    static RateExpr of(std::initializer_list<std::pair<RateSymbol, int>> terms) {
        RateExpr e;
        for (auto [sym, c] : terms) e.coef[sym] += c;
        return e;
    }

    // Swaps the roles of the two copies.
    RateExpr swapped() const {
        RateExpr e = *this;
        std::swap(e.coef[kA], e.coef[kB]);
        return e;
    }
    // Exchanges particles and holes: c0 <-> c1, lambda0 <-> lambda1.
    RateExpr complemented() const {
        RateExpr e = *this;
        std::swap(e.coef[kC0], e.coef[kC1]);
        std::swap(e.coef[kL0], e.coef[kL1]);
        return e;
    }

    template <class Real>
    Real evaluate(const Real& c0, const Real& c1, const Real& l0, const Real& l1, const Real& a,
                  const Real& b) const {
        const Real lo = std::min(a, b);
        const Real hi = std::max(a, b);
        const Real values[kSymbolCount] = {c0, c1, l0, l1, a, b, lo, hi};
        Real sum = Real(0);
        for (int i = 0; i < kSymbolCount; ++i) {
            if (coef[i] != 0) sum += Real(coef[i]) * values[i];
        }
        return sum;
    }

    bool operator==(const RateExpr&) const = default;
};

std::string to_string(const RateExpr& e);

struct TripleTransition {
    TripleState from;
    TripleState to;
    RateExpr rate;
};

struct PairTransition {
    TripleState from_a, from_b;
    TripleState to_a, to_b;
    RateExpr rate;
};

// The basic coupling of one triple: transitions out of each local state.
const std::vector<TripleTransition>& triple_transitions();

// The coupling of two triples: the six tabulated starting states plus their
// completions under copy exchange and particle/hole exchange (all 16 states).
const std::vector<PairTransition>& pair_transitions();

// Only the tabulated starting states, before completion.
const std::vector<PairTransition>& pair_transitions_tabulated();

template <class Real>
struct NumericRates {
    Real c0, c1, l0, l1;
};

// Evaluated outgoing rates of a triple state; throws CouplingError on a
// negative entry, naming the transition.
template <class Real>
std::vector<std::pair<TripleState, Real>> triple_rates(TripleState from, const NumericRates<Real>& r,
                                                       const Real& a) {
    std::vector<std::pair<TripleState, Real>> out;
    for (const auto& t : triple_transitions()) {
        if (t.from != from) continue;
        Real v = t.rate.evaluate(r.c0, r.c1, r.l0, r.l1, a, a);
        if (v < Real(0)) {
            throw CouplingError("negative rate for " + to_string(t.from) + " -> " + to_string(t.to) + " (" +
                                to_string(t.rate) + ")");
        }
        out.emplace_back(t.to, v);
    }
    return out;
}

template <class Real>
std::vector<std::pair<std::pair<TripleState, TripleState>, Real>> pair_rates(TripleState from_a,
                                                                             TripleState from_b,
                                                                             const NumericRates<Real>& r,
                                                                             const Real& a, const Real& b) {
    std::vector<std::pair<std::pair<TripleState, TripleState>, Real>> out;
    for (const auto& t : pair_transitions()) {
        if (t.from_a != from_a || t.from_b != from_b) continue;
        Real v = t.rate.evaluate(r.c0, r.c1, r.l0, r.l1, a, b);
        if (v < Real(0)) {
            throw CouplingError("negative rate for (" + to_string(t.from_a) + ")(" + to_string(t.from_b) +
                                ") -> (" + to_string(t.to_a) + ")(" + to_string(t.to_b) + ") (" +
                                to_string(t.rate) + ")");
        }
        out.push_back({{t.to_a, t.to_b}, v});
    }
    return out;
}

}  // namespace rwdre
