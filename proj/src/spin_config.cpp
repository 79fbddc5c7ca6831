#include "rwdre/spin_config.hpp"

#include <algorithm>

#include "rwdre/random.hpp"

namespace rwdre {

std::string to_string(BoundaryKind kind) {
    return kind == BoundaryKind::periodic ? "periodic" : "frozen-resample";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
    if (name == "periodic") return BoundaryKind::periodic;
    if (name == "frozen-resample") return BoundaryKind::frozen_resample;
    throw ConfigError("", "unknown boundary policy '" + name + "'");
}

SpinConfig::SpinConfig(Site lo, Site hi, std::vector<std::uint8_t> states, Boundary boundary)
    : lo_(lo), hi_(hi), states_(std::move(states)), boundary_(boundary) {
    if (hi < lo) throw ConfigError("window", "hi < lo");
    if (states_.size() != static_cast<std::size_t>(hi - lo + 1)) {
        throw ConfigError("window", "state count does not match [lo, hi]");
    }
    for (auto s : states_) {
        if (s > 1) throw ConfigError("states", "spin values must be 0 or 1");
    }
    if (boundary_.rho < 0.0 || boundary_.rho > 1.0) throw ConfigError("boundary.rho", "must lie in [0,1]");
}

SpinConfig SpinConfig::filled(Site lo, Site hi, int value, Boundary boundary) {
    return SpinConfig(lo, hi, std::vector<std::uint8_t>(static_cast<std::size_t>(hi - lo + 1),
                                                        static_cast<std::uint8_t>(value)),
                      boundary);
}

int SpinConfig::at(Site x) const {
    if (!contains(x)) throw WindowOverrun("site " + std::to_string(x) + " outside window");
    return states_[static_cast<std::size_t>(x - lo_)];
}

int exterior_state(const Boundary& boundary, Site x) {
    return hashed_uniform(boundary.seed, {site_label(x)}) < boundary.rho ? 1 : 0;
}

int SpinConfig::resolve(Site x) const {
    if (contains(x)) return states_[static_cast<std::size_t>(x - lo_)];
    if (boundary_.kind == BoundaryKind::periodic) {
        const Site n = hi_ - lo_ + 1;
        Site k = (x - lo_) % n;
        if (k < 0) k += n;
        return states_[static_cast<std::size_t>(k)];
    }
    return exterior_state(boundary_, x);
}

void SpinConfig::set(Site x, int value) {
    if (!contains(x)) throw WindowOverrun("site " + std::to_string(x) + " outside window");
    if (value != 0 && value != 1) throw ConfigError("states", "spin values must be 0 or 1");
    states_[static_cast<std::size_t>(x - lo_)] = static_cast<std::uint8_t>(value);
}

bool SpinConfig::has_trap_at(Site x) const {
    return contains(x) && contains(x + 1) && at(x) == 1 && at(x + 1) == 0;
}

bool dominated_by(const SpinConfig& a, const SpinConfig& b) {
    const Site lo = std::max(a.lo(), b.lo());
    const Site hi = std::min(a.hi(), b.hi());
    for (Site x = lo; x <= hi; ++x) {
        if (a.at(x) > b.at(x)) return false;
    }
    return true;
}

std::optional<Site> tr_scan(const SpinConfig& config, Direction dir, Site origin) {
    auto get = [&](Site y) { return config.contains(origin + y) ? config.at(origin + y) : -1; };
    return scan_for_trap(get, dir);
}

}  // namespace rwdre
