#pragma once

#include <cstdint>
#include <vector>

#include "rwdre/spin_config.hpp"

namespace rwdre {

// A radius-r patch around a site packed into an integer: bit i holds the state
// at offset i - r, so the centre sits at bit r.
using Patch = std::uint32_t;

// Single-site flip rates of a finite-range spin-flip system. A particle flips
// to a hole at rate c0 + lambda0 * p0(patch); a hole flips to a particle at
// rate c1 + lambda1 * p1(patch). p0 and p1 are indexed by Patch.
struct RateSpec {
    double c0 = 1.0;
    double c1 = 1.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    int range = 0;
    std::vector<double> p0{0.0, 0.0};
    std::vector<double> p1{0.0, 0.0};

    // Independent flips: particle -> hole at d0, hole -> particle at d1.
    static RateSpec independent(double d0, double d1);

    // Throws ConfigError naming the offending field.
    void validate() const;

    std::size_t patch_count() const noexcept { return std::size_t{1} << (2 * range + 1); }
    static int centre(Patch patch, int range) noexcept { return static_cast<int>((patch >> range) & 1u); }

    // Total flip rate of the centre site given its patch.
    double flip_rate(Patch patch) const {
        return centre(patch, range) == 1 ? c0 + lambda0 * p0[patch] : c1 + lambda1 * p1[patch];
    }

    bool independent_flips() const noexcept { return lambda0 == 0.0 && lambda1 == 0.0; }

    // Rates of the dominating (+) and dominated (-) independent-flip systems.
    double lambda_plus() const noexcept { return c0 + c1 + lambda1; }
    double rho_plus() const noexcept { return (c1 + lambda1) / lambda_plus(); }
    double lambda_minus() const noexcept { return c0 + lambda0 + c1; }
    double rho_minus() const noexcept { return c1 / lambda_minus(); }

    // Upper bound on any single-site event rate, used for uniformisation.
    double total_event_rate() const noexcept { return c0 + c1 + lambda0 + lambda1; }

    // c1/(c0+c1): the exact equilibrium density for independent flips and the
    // default starting density for burn-in otherwise.
    double default_density() const noexcept { return c1 / (c0 + c1); }
};

// Packs the radius-r patch around x. `get(y)` returns the state at site y.
template <class Get>
Patch read_patch(Get&& get, Site x, int range) {
    Patch patch = 0;
    for (int i = 0; i <= 2 * range; ++i) {
        if (get(x - range + i) != 0) patch |= Patch{1} << i;
    }
    return patch;
}

struct MEpsilon {
    double M = 0.0;
    double epsilon = 0.0;
};

// M: summed worst-case sensitivity of the flip rate to each non-centre site.
// epsilon: smallest sum of the two flip rates of the centre over all patches.
// Both by exhaustive enumeration; throws ConfigError if 2r+1 exceeds max_patch_bits.
MEpsilon compute_M_epsilon(const RateSpec& spec, int max_patch_bits = 20);

}  // namespace rwdre
