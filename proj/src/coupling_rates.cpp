#include "rwdre/coupling_rates.hpp"

#include <map>

namespace rwdre {

TripleState triple_from(int lower, int middle, int upper) {
    for (TripleState s : kTripleStates) {
        const auto c = coordinates(s);
        if (c[0] == lower && c[1] == middle && c[2] == upper) return s;
    }
    throw OrderViolation("unordered triple (" + std::to_string(lower) + std::to_string(middle) +
                         std::to_string(upper) + ")");
}

std::string to_string(TripleState s) {
    const auto c = coordinates(s);
    return std::to_string(c[0]) + std::to_string(c[1]) + std::to_string(c[2]);
}

std::string to_string(const RateExpr& e) {
    static const char* names[kSymbolCount] = {"c0", "c1", "l0", "l1", "a", "b", "min", "max"};
    std::string out;
    for (int i = 0; i < kSymbolCount; ++i) {
        const int c = e.coef[i];
        if (c == 0) continue;
        if (c < 0) out += "-";
        else if (!out.empty()) out += "+";
        if (c != 1 && c != -1) out += std::to_string(c < 0 ? -c : c) + "*";
        out += names[i];
    }
    return out.empty() ? "0" : out;
}

namespace {

using S = TripleState;

RateExpr R(std::initializer_list<std::pair<RateSymbol, int>> terms) { return RateExpr::of(terms); }

std::vector<TripleTransition> make_triple_table() {
    return {
        {S::s000, S::s111, R({{kC1, 1}})},
        {S::s000, S::s011, R({{kA, 1}, {kC1, -1}})},
        {S::s000, S::s001, R({{kC1, 1}, {kL1, 1}, {kA, -1}})},

        {S::s001, S::s111, R({{kC1, 1}})},
        {S::s001, S::s011, R({{kA, 1}, {kC1, -1}})},
        {S::s001, S::s000, R({{kC0, 1}})},

        {S::s011, S::s111, R({{kC1, 1}})},
        {S::s011, S::s000, R({{kC0, 1}})},
        {S::s011, S::s001, R({{kA, 1}, {kC0, -1}})},

        {S::s111, S::s000, R({{kC0, 1}})},
        {S::s111, S::s001, R({{kA, 1}, {kC0, -1}})},
        {S::s111, S::s011, R({{kC0, 1}, {kL0, 1}, {kA, -1}})},
    };
}

std::vector<PairTransition> make_pair_tabulated() {
    const RateExpr c1 = R({{kC1, 1}});
    const RateExpr c0 = R({{kC0, 1}});
    const RateExpr min_minus_c1 = R({{kMin, 1}, {kC1, -1}});
    const RateExpr a_minus_min = R({{kA, 1}, {kMin, -1}});
    const RateExpr b_minus_min = R({{kB, 1}, {kMin, -1}});
    const RateExpr upper_rest = R({{kC1, 1}, {kL1, 1}, {kMax, -1}});
    return {
        {S::s000, S::s000, S::s111, S::s111, c1},
        {S::s000, S::s000, S::s011, S::s011, min_minus_c1},
        {S::s000, S::s000, S::s011, S::s001, a_minus_min},
        {S::s000, S::s000, S::s001, S::s011, b_minus_min},
        {S::s000, S::s000, S::s001, S::s001, upper_rest},

        {S::s001, S::s001, S::s111, S::s111, c1},
        {S::s001, S::s001, S::s011, S::s011, min_minus_c1},
        {S::s001, S::s001, S::s011, S::s001, a_minus_min},
        {S::s001, S::s001, S::s001, S::s011, b_minus_min},
        {S::s001, S::s001, S::s000, S::s000, c0},

        {S::s001, S::s011, S::s111, S::s111, c1},
        {S::s001, S::s011, S::s011, S::s011, R({{kA, 1}, {kC1, -1}})},
        {S::s001, S::s011, S::s001, S::s001, R({{kB, 1}, {kC0, -1}})},
        {S::s001, S::s011, S::s000, S::s000, c0},

        {S::s000, S::s001, S::s111, S::s111, c1},
        {S::s000, S::s001, S::s011, S::s011, min_minus_c1},
        {S::s000, S::s001, S::s011, S::s001, a_minus_min},
        {S::s000, S::s001, S::s001, S::s011, b_minus_min},
        {S::s000, S::s001, S::s001, S::s001, upper_rest},
        {S::s000, S::s001, S::s000, S::s000, c0},

        {S::s000, S::s011, S::s111, S::s111, c1},
        {S::s000, S::s011, S::s011, S::s011, R({{kA, 1}, {kC1, -1}})},
        {S::s000, S::s011, S::s001, S::s011, R({{kC1, 1}, {kL1, 1}, {kA, -1}})},
        {S::s000, S::s011, S::s000, S::s000, c0},
        {S::s000, S::s011, S::s000, S::s001, R({{kB, 1}, {kC0, -1}})},

        {S::s000, S::s111, S::s111, S::s111, c1},
        {S::s000, S::s111, S::s011, S::s111, R({{kA, 1}, {kC1, -1}})},
        {S::s000, S::s111, S::s001, S::s111, R({{kC1, 1}, {kL1, 1}, {kA, -1}})},
        {S::s000, S::s111, S::s000, S::s000, c0},
        {S::s000, S::s111, S::s000, S::s001, R({{kB, 1}, {kC0, -1}})},
        {S::s000, S::s111, S::s000, S::s011, R({{kC0, 1}, {kL0, 1}, {kB, -1}})},
    };
}

PairTransition swap_copies(const PairTransition& t) {
    return {t.from_b, t.from_a, t.to_b, t.to_a, t.rate.swapped()};
}

PairTransition exchange_particles(const PairTransition& t) {
    return {complement(t.from_a), complement(t.from_b), complement(t.to_a), complement(t.to_b),
            t.rate.complemented()};
}

std::vector<PairTransition> complete_pair_table() {
    using Key = std::pair<S, S>;
    std::map<Key, std::vector<PairTransition>> by_start;
    for (const auto& t : make_pair_tabulated()) by_start[{t.from_a, t.from_b}].push_back(t);

    bool grew = true;
    while (grew) {
        grew = false;
        const auto snapshot = by_start;
        for (const auto& [key, transitions] : snapshot) {
            for (int op = 0; op < 3; ++op) {
                std::vector<PairTransition> image;
                for (const auto& t : transitions) {
                    if (op == 0) image.push_back(swap_copies(t));
                    if (op == 1) image.push_back(exchange_particles(t));
                    if (op == 2) image.push_back(swap_copies(exchange_particles(t)));
                }
                const Key k{image.front().from_a, image.front().from_b};
                if (!by_start.count(k)) {
                    by_start[k] = std::move(image);
                    grew = true;
                }
            }
        }
    }
    std::vector<PairTransition> out;
    for (const auto& [key, transitions] : by_start) out.insert(out.end(), transitions.begin(), transitions.end());
    return out;
}

}  // namespace

const std::vector<TripleTransition>& triple_transitions() {
    static const auto table = make_triple_table();
    return table;
}

const std::vector<PairTransition>& pair_transitions_tabulated() {
    static const auto table = make_pair_tabulated();
    return table;
}

const std::vector<PairTransition>& pair_transitions() {
    static const auto table = complete_pair_table();
    return table;
}

}  // namespace rwdre
