#include "rwdre/environment.hpp"

#include <algorithm>
#include <cmath>

#include "rwdre/random.hpp"

namespace rwdre {

EnvTrajectory::EnvTrajectory(SpinConfig initial, double horizon)
    : initial_(std::move(initial)), horizon_(horizon), flips_(initial_.size()) {
    if (!(horizon >= 0.0)) throw ConfigError("horizon", "must be non-negative");
}

void EnvTrajectory::record_flip(Site x, double t) {
    auto& times = flips_.at(static_cast<std::size_t>(x - lo()));
    if (!times.empty() && t < times.back()) throw Error("flips recorded out of order");
    times.push_back(t);
}

Site EnvTrajectory::walker_site(Site x) const {
    if (initial_.boundary().kind == BoundaryKind::periodic) {
        const Site n = hi() - lo() + 1;
        Site k = (x - lo()) % n;
        if (k < 0) k += n;
        return lo() + k;
    }
    if (x < lo() + guard_ || x > hi() - guard_) {
        throw WindowOverrun("walker reached site " + std::to_string(x) + " outside usable window [" +
                            std::to_string(lo() + guard_) + ", " + std::to_string(hi() - guard_) + "]");
    }
    return x;
}

int EnvTrajectory::window_state(Site x, double t) const {
    const auto& times = flip_times(x);
    const auto count = std::upper_bound(times.begin(), times.end(), t) - times.begin();
    return initial_.at(x) ^ static_cast<int>(count & 1);
}

int EnvTrajectory::state(Site x, double t) const { return window_state(walker_site(x), t); }

double EnvTrajectory::next_flip(Site x, double t) const {
    const auto& times = flip_times(walker_site(x));
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return it == times.end() ? kNever : *it;
}

const std::vector<double>& EnvTrajectory::flip_times(Site x) const {
    if (!initial_.contains(x)) throw WindowOverrun("trajectory has no site " + std::to_string(x));
    return flips_[static_cast<std::size_t>(x - lo())];
}

std::vector<Flip> EnvTrajectory::flips() const {
    std::vector<Flip> out;
    out.reserve(flip_count());
    for (Site x = lo(); x <= hi(); ++x) {
        int s = initial_.at(x);
        for (double t : flip_times(x)) {
            s ^= 1;
            out.push_back({t, x, static_cast<std::uint8_t>(s)});
        }
    }
    std::sort(out.begin(), out.end(), [](const Flip& a, const Flip& b) {
        return a.time != b.time ? a.time < b.time : a.site < b.site;
    });
    return out;
}

std::size_t EnvTrajectory::flip_count() const {
    std::size_t n = 0;
    for (const auto& f : flips_) n += f.size();
    return n;
}

SpinConfig EnvTrajectory::snapshot(double t) const {
    SpinConfig out = initial_;
    for (Site x = lo(); x <= hi(); ++x) out.set(x, window_state(x, t));
    return out;
}

bool trajectory_dominated(const EnvTrajectory& a, const EnvTrajectory& b) {
    const Site lo = std::max(a.lo(), b.lo());
    const Site hi = std::min(a.hi(), b.hi());
    for (Site x = lo; x <= hi; ++x) {
        if (a.window_state(x, 0.0) > b.window_state(x, 0.0)) return false;
        for (const auto* times : {&a.flip_times(x), &b.flip_times(x)}) {
            for (double t : *times) {
                if (a.window_state(x, t) > b.window_state(x, t)) return false;
            }
        }
    }
    return true;
}

int LazyInitial::operator()(Site x) const {
    if (trap && (x == 0 || x == 1)) return x == 0 ? 1 : 0;
    return hashed_uniform(seed, {site_label(x)}) < rho ? 1 : 0;
}

LazyCoordinateEnv::LazyCoordinateEnv(const GraphicalSource& source, const RateSpec& spec,
                                     Coordinate coordinate, LazyInitial initial, double horizon)
    : source_(&source), coordinate_(coordinate), initial_(initial), horizon_(horizon) {
    if (coordinate == Coordinate::middle && spec.range != 0 && !spec.independent_flips()) {
        throw ConfigError("range", "the middle coordinate evolves site by site only for range 0");
    }
    accept_arrow0_ = spec.p0.size() > 1 ? spec.p0[1] : 0.0;
    accept_arrow1_ = spec.p1.empty() ? 0.0 : spec.p1[0];
}

void LazyCoordinateEnv::inject(Site x, double t, int value) {
    injected_.push_back({x, Setting{t, static_cast<std::int8_t>(value)}});
    cache_.clear();
}

int LazyCoordinateEnv::setting_value(const SourceEvent& e) const {
    switch (e.channel) {
        case Channel::cross0: return 0;
        case Channel::cross1: return 1;
        case Channel::arrow0:
            if (coordinate_ == Coordinate::lower) return 0;
            if (coordinate_ == Coordinate::upper) return -1;
            return e.mark < accept_arrow0_ ? 0 : -1;
        case Channel::arrow1:
            if (coordinate_ == Coordinate::upper) return 1;
            if (coordinate_ == Coordinate::lower) return -1;
            return e.mark < accept_arrow1_ ? 1 : -1;
    }
    return -1;
}

const std::vector<LazyCoordinateEnv::Setting>& LazyCoordinateEnv::settings(Site x, std::int64_t block) const {
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint32_t>(block);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (cache_.size() > (std::size_t{1} << 18)) cache_.clear();

    std::vector<Setting> out;
    scratch_.clear();
    source_->block(x, block, scratch_);
    for (const auto& e : scratch_) {
        if (e.time > horizon_) break;
        const int v = setting_value(e);
        if (v >= 0) out.push_back({e.time, static_cast<std::int8_t>(v)});
    }
    bool merged = false;
    for (const auto& [site, s] : injected_) {
        if (site == x && s.time >= static_cast<double>(block) && s.time < static_cast<double>(block + 1)) {
            out.push_back(s);
            merged = true;
        }
    }
    if (merged) {
        std::stable_sort(out.begin(), out.end(), [](const Setting& a, const Setting& b) { return a.time < b.time; });
    }
    return cache_.emplace(key, std::move(out)).first->second;
}

int LazyCoordinateEnv::state(Site x, double t) const {
    const double clamped = std::min(t, horizon_);
    if (clamped < 0.0) return initial_(x);
    for (auto n = static_cast<std::int64_t>(std::floor(clamped)); n >= 0; --n) {
        const auto& s = settings(x, n);
        for (auto it = s.rbegin(); it != s.rend(); ++it) {
            if (it->time <= clamped) return it->value;
        }
    }
    return initial_(x);
}

double LazyCoordinateEnv::next_flip(Site x, double t) const {
    int current = state(x, t);
    const auto last = static_cast<std::int64_t>(std::ceil(horizon_));
    for (auto n = static_cast<std::int64_t>(std::floor(std::max(t, 0.0))); n < last; ++n) {
        for (const auto& s : settings(x, n)) {
            if (s.time <= t) continue;
            if (s.value != current) return s.time;
        }
    }
    return kNever;
}

InitialLaw InitialLaw::default_for(const RateSpec& spec, bool trap_conditioned) {
    InitialLaw law;
    law.rho = spec.default_density();
    law.trap_conditioned = trap_conditioned;
    if (!spec.independent_flips()) {
        law.kind = InitialKind::equilibrium_burnin;
        law.t_burn = 20.0 / (spec.c0 + spec.c1);
    }
    return law;
}

void InitialLaw::validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("init.rho", "must lie in [0,1]");
    if (!(t_burn >= 0.0) || !std::isfinite(t_burn)) throw ConfigError("init.t_burn", "must be finite and >= 0");
}

}  // namespace rwdre
