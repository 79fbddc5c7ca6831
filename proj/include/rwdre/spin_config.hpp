#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwdre/errors.hpp"

namespace rwdre {

using Site = std::int64_t;

enum class BoundaryKind { periodic, frozen_resample };

// How sites outside the window read. Under frozen_resample the exterior is a
// fixed Bernoulli(rho) configuration drawn from `seed`; it never evolves.
struct Boundary {
    BoundaryKind kind = BoundaryKind::frozen_resample;
    double rho = 0.5;
    std::uint64_t seed = 0;

    bool operator==(const Boundary&) const = default;
};

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

// Binary spins on the window [lo, hi].
class SpinConfig {
public:
    SpinConfig(Site lo, Site hi, std::vector<std::uint8_t> states, Boundary boundary = {});

    static SpinConfig filled(Site lo, Site hi, int value, Boundary boundary = {});

    Site lo() const noexcept { return lo_; }
    Site hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return states_.size(); }
    bool contains(Site x) const noexcept { return x >= lo_ && x <= hi_; }

    // State inside the window; throws WindowOverrun outside.
    int at(Site x) const;
    // State anywhere, resolving exterior sites through the boundary policy.
    int resolve(Site x) const;
    void set(Site x, int value);

    const Boundary& boundary() const noexcept { return boundary_; }
    const std::vector<std::uint8_t>& states() const noexcept { return states_; }

    // Sites x, x+1 hold (1, 0).
    bool has_trap_at(Site x) const;
    bool operator==(const SpinConfig&) const = default;

private:
    Site lo_;
    Site hi_;
    std::vector<std::uint8_t> states_;
    Boundary boundary_;
};

int exterior_state(const Boundary& boundary, Site x);

// Pointwise order a <= b on the common window.
bool dominated_by(const SpinConfig& a, const SpinConfig& b);

enum class Direction { right, left };

inline constexpr Site kDefaultScanLimit = Site{1} << 22;

// Trap search relative to an origin. `get(y)` returns the state at origin + y,
// or a negative value when no data is available there (which ends the search).
// Right: smallest y >= 0 with state(y)=1, state(y+1)=0. Left: largest y <= 0.
template <class Get>
std::optional<Site> scan_for_trap(Get&& get, Direction dir, Site limit = kDefaultScanLimit) {
    if (dir == Direction::right) {
        int here = get(Site{0});
        for (Site y = 0; y < limit; ++y) {
            if (here < 0) return std::nullopt;
            const int next = get(y + 1);
            if (next < 0) return std::nullopt;
            if (here == 1 && next == 0) return y;
            here = next;
        }
        return std::nullopt;
    }
    int above = get(Site{1});
    for (Site y = 0; y > -limit; --y) {
        if (above < 0) return std::nullopt;
        const int here = get(y);
        if (here < 0) return std::nullopt;
        if (here == 1 && above == 0) return y;
        above = here;
    }
    return std::nullopt;
}

// Trap scan on a window; exterior sites count as missing data.
std::optional<Site> tr_scan(const SpinConfig& config, Direction dir, Site origin = 0);

}  // namespace rwdre
