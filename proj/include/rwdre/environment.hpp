#pragma once

#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "rwdre/event_log.hpp"
#include "rwdre/rate_spec.hpp"
#include "rwdre/spin_config.hpp"

namespace rwdre {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

// Read access to a càdlàg environment trajectory, as walkers see it.
class Environment {
public:
    virtual ~Environment() = default;

    // State at (x, t), counting flips at times <= t. Throws WindowOverrun when
    // x is not available to walkers.
    virtual int state(Site x, double t) const = 0;
    // First flip time at x strictly after t, or kNever if none up to horizon().
    virtual double next_flip(Site x, double t) const = 0;
    virtual double horizon() const = 0;
};

struct Flip {
    double time;
    Site site;
    std::uint8_t state;  // state after the flip

    bool operator==(const Flip&) const = default;
};

// Materialised trajectory on a window: initial configuration plus per-site
// flip times. Flips at one site alternate, so a time list is enough.
class EnvTrajectory final : public Environment {
public:
    EnvTrajectory(SpinConfig initial, double horizon);

    const SpinConfig& initial() const noexcept { return initial_; }
    double horizon() const override { return horizon_; }
    Site lo() const noexcept { return initial_.lo(); }
    Site hi() const noexcept { return initial_.hi(); }

    // Records a flip at x at time t; t must not precede earlier flips at x.
    void record_flip(Site x, double t);

    // Sites within `width` of either edge are hidden from walkers.
    void set_walker_guard(Site width) noexcept { guard_ = width; }

    int state(Site x, double t) const override;
    double next_flip(Site x, double t) const override;

    // Raw in-window state, ignoring the walker guard.
    int window_state(Site x, double t) const;
    const std::vector<double>& flip_times(Site x) const;
    std::vector<Flip> flips() const;  // global order by (time, site)
    std::size_t flip_count() const;
    SpinConfig snapshot(double t) const;

    bool operator==(const EnvTrajectory& other) const {
        return initial_ == other.initial_ && horizon_ == other.horizon_ && flips_ == other.flips_;
    }

private:
    Site walker_site(Site x) const;

    SpinConfig initial_;
    double horizon_;
    Site guard_ = 0;
    std::vector<std::vector<double>> flips_;
};

// Pointwise order a <= b at every site and every flip time of either.
bool trajectory_dominated(const EnvTrajectory& a, const EnvTrajectory& b);

enum class Coordinate { lower, middle, upper };

struct TripleTrajectory {
    EnvTrajectory minus;
    EnvTrajectory mid;
    EnvTrajectory plus;
};

// Per-site initial states on all of Z: site x is 1 iff a hashed uniform drawn
// from (seed, x) falls below rho. Sharing the seed across densities yields
// ordered configurations. With trap set, sites 0 and 1 read (1, 0).
struct LazyInitial {
    double rho = 0.5;
    std::uint64_t seed = 0;
    bool trap = false;

    int operator()(Site x) const;
};

// Environment on all of Z for coordinates whose sites evolve independently:
// the lower and upper envelopes always, and the middle coordinate when the
// spec has range 0. Per-site histories are read straight off the lazy
// graphical source, so unbounded walks cost only what they look at.
class LazyCoordinateEnv final : public Environment {
public:
    LazyCoordinateEnv(const GraphicalSource& source, const RateSpec& spec, Coordinate coordinate,
                      LazyInitial initial, double horizon);

    // Forces site x to `value` at time t, as an extra setting event.
    void inject(Site x, double t, int value);

    int state(Site x, double t) const override;
    double next_flip(Site x, double t) const override;
    double horizon() const override { return horizon_; }

    int initial_state(Site x) const { return initial_(x); }

private:
    struct Setting {
        double time;
        std::int8_t value;
    };
    const std::vector<Setting>& settings(Site x, std::int64_t block) const;
    int setting_value(const SourceEvent& e) const;

    const GraphicalSource* source_;
    Coordinate coordinate_;
    LazyInitial initial_;
    double horizon_;
    double accept_arrow0_;  // middle coordinate, range 0: p0 at a particle
    double accept_arrow1_;  // middle coordinate, range 0: p1 at a hole
    std::vector<std::pair<Site, Setting>> injected_;
    mutable std::unordered_map<std::uint64_t, std::vector<Setting>> cache_;
    mutable std::vector<SourceEvent> scratch_;
};

enum class InitialKind { product, equilibrium_burnin };

struct InitialLaw {
    InitialKind kind = InitialKind::product;
    double rho = 0.5;     // product density, or starting density before burn-in
    double t_burn = 0.0;  // burn-in duration for equilibrium_burnin
    bool trap_conditioned = false;

    // Independent flips: exact equilibrium product, no burn-in. Otherwise a
    // product at c1/(c0+c1) followed by a burn-in of 20/(c0+c1).
    static InitialLaw default_for(const RateSpec& spec, bool trap_conditioned);
    void validate() const;
};

// Samples an initial configuration on [lo, hi]. Burn-in runs the interacting
// dynamics on the window itself. The exterior is frozen at density `rho`.
SpinConfig sample_initial(const InitialLaw& law, const RateSpec& spec, Site lo, Site hi,
                          BoundaryKind boundary, std::uint64_t seed);

}  // namespace rwdre
