#include "rwdre/dynamics.hpp"

#include <queue>

#include "rwdre/coupling_rates.hpp"
#include "rwdre/random.hpp"

namespace rwdre {

namespace {

// Mutable spins on a window with the boundary policy of their initial config.
class LiveConfig {
public:
    explicit LiveConfig(const SpinConfig& init) : init_(&init), states_(init.states()) {}

    int operator()(Site x) const {
        if (x >= init_->lo() && x <= init_->hi()) return states_[index(x)];
        if (init_->boundary().kind == BoundaryKind::periodic) {
            const Site n = init_->hi() - init_->lo() + 1;
            Site k = (x - init_->lo()) % n;
            if (k < 0) k += n;
            return states_[static_cast<std::size_t>(k)];
        }
        return exterior_state(init_->boundary(), x);
    }
    int at(Site x) const { return states_[index(x)]; }
    void set(Site x, int v) { states_[index(x)] = static_cast<std::uint8_t>(v); }

private:
    std::size_t index(Site x) const { return static_cast<std::size_t>(x - init_->lo()); }
    const SpinConfig* init_;
    std::vector<std::uint8_t> states_;
};

void require_window_fits(const SpinConfig& init, const RateSpec& spec) {
    if (init.boundary().kind == BoundaryKind::periodic &&
        init.hi() - init.lo() + 1 < 2 * static_cast<Site>(spec.range) + 1) {
        throw ConfigError("window", "periodic window narrower than one patch");
    }
}

void require_log_covers(const SpinConfig& init, const EventLog& log) {
    if (log.lo() > init.lo() || log.hi() < init.hi()) {
        throw ConfigError("window", "event log does not cover the configuration window");
    }
}

double mark_for(const EventLog& log, const ScheduledEvent& e) {
    const auto& marks = log.site(e.site).marks;
    if (e.mark_index >= marks.size()) {
        throw MarkUnderflow("site " + std::to_string(e.site) + " ran out of marks at t=" + std::to_string(e.time));
    }
    return marks[e.mark_index];
}

// Next state of one coordinate at an event, given its pre-event spins.
int apply_event(Coordinate coordinate, Channel ch, double mark, const LiveConfig& live, Site x,
                const RateSpec& spec) {
    const int current = live.at(x);
    const int target = target_of(ch);
    if (!is_arrow(ch)) return target;
    if (current == target) return current;
    switch (coordinate) {
        case Coordinate::lower: return target == 0 ? 0 : current;
        case Coordinate::upper: return target == 1 ? 1 : current;
        case Coordinate::middle: {
            const Patch patch = read_patch(live, x, spec.range);
            const double p = target == 1 ? spec.p1[patch] : spec.p0[patch];
            return mark < p ? target : current;
        }
    }
    return current;
}

struct Track {
    const SpinConfig* init;
    Coordinate coordinate;
};

// Evolves several coordinates through one log in a single pass. After each
// event, `check(x)` may inspect the updated spins.
template <class Check>
std::vector<EnvTrajectory> evolve_tracks(const std::vector<Track>& tracks, const EventLog& log,
                                         const RateSpec& spec, Check&& check) {
    std::vector<LiveConfig> live;
    std::vector<EnvTrajectory> out;
    for (const auto& t : tracks) {
        require_window_fits(*t.init, spec);
        require_log_covers(*t.init, log);
        live.emplace_back(*t.init);
        out.emplace_back(*t.init, log.horizon());
    }
    const SpinConfig& window = *tracks.front().init;
    std::vector<int> next(tracks.size());
    for (const auto& e : log.schedule()) {
        if (!window.contains(e.site)) continue;
        const double mark = is_arrow(e.channel) ? mark_for(log, e) : 0.0;
        for (std::size_t k = 0; k < tracks.size(); ++k) {
            next[k] = apply_event(tracks[k].coordinate, e.channel, mark, live[k], e.site, spec);
        }
        for (std::size_t k = 0; k < tracks.size(); ++k) {
            if (next[k] != live[k].at(e.site)) {
                live[k].set(e.site, next[k]);
                out[k].record_flip(e.site, e.time);
            }
        }
        check(e.site, e.time, live);
    }
    return out;
}

void check_order(const LiveConfig& lower, const LiveConfig& mid, const LiveConfig& upper, Site x, double t) {
    if (lower.at(x) > mid.at(x) || mid.at(x) > upper.at(x)) {
        throw OrderViolation("triple order broken at site " + std::to_string(x) + ", t=" + std::to_string(t));
    }
}

TripleTrajectory as_triple(std::vector<EnvTrajectory>& v, std::size_t offset) {
    return TripleTrajectory{std::move(v[offset]), std::move(v[offset + 1]), std::move(v[offset + 2])};
}

}  // namespace

EnvTrajectory evolve_from_log(const SpinConfig& init, const EventLog& log, const RateSpec& spec,
                              Coordinate coordinate) {
    spec.validate();
    auto out = evolve_tracks({{&init, coordinate}}, log, spec, [](Site, double, const auto&) {});
    return std::move(out.front());
}

TripleTrajectory coupled_triple_evolve(const SpinConfig& init, const RateSpec& spec, const EventLog& log) {
    spec.validate();
    auto out = evolve_tracks({{&init, Coordinate::lower}, {&init, Coordinate::middle}, {&init, Coordinate::upper}},
                             log, spec, [](Site x, double t, const std::vector<LiveConfig>& live) {
                                 check_order(live[0], live[1], live[2], x, t);
                             });
    return as_triple(out, 0);
}

TripleTrajectory coupled_triple_evolve(const SpinConfig& init, const RateSpec& spec, double horizon,
                                       std::uint64_t seed) {
    return coupled_triple_evolve(init, spec, build_event_log(spec, init.lo(), init.hi(), horizon, seed));
}

std::pair<TripleTrajectory, TripleTrajectory> coupled_pair_evolve(const SpinConfig& init_a,
                                                                  const SpinConfig& init_b,
                                                                  const RateSpec& spec, const EventLog& log) {
    spec.validate();
    if (init_a.lo() != init_b.lo() || init_a.hi() != init_b.hi()) {
        throw ConfigError("window", "paired configurations must share a window");
    }
    auto out = evolve_tracks({{&init_a, Coordinate::lower},
                              {&init_a, Coordinate::middle},
                              {&init_a, Coordinate::upper},
                              {&init_b, Coordinate::lower},
                              {&init_b, Coordinate::middle},
                              {&init_b, Coordinate::upper}},
                             log, spec, [](Site x, double t, const std::vector<LiveConfig>& live) {
                                 check_order(live[0], live[1], live[2], x, t);
                                 check_order(live[3], live[4], live[5], x, t);
                             });
    TripleTrajectory a = as_triple(out, 0);
    TripleTrajectory b = as_triple(out, 3);
    return {std::move(a), std::move(b)};
}

std::pair<TripleTrajectory, TripleTrajectory> coupled_pair_evolve(const SpinConfig& init_a,
                                                                  const SpinConfig& init_b,
                                                                  const RateSpec& spec, double horizon,
                                                                  std::uint64_t seed) {
    return coupled_pair_evolve(init_a, init_b, spec,
                               build_event_log(spec, init_a.lo(), init_a.hi(), horizon, seed));
}

namespace {

struct Clock {
    double time;
    Site site;
    bool operator>(const Clock& o) const { return time != o.time ? time > o.time : site > o.site; }
};

using ClockQueue = std::priority_queue<Clock, std::vector<Clock>, std::greater<>>;

// Per-site clocks for direct backends. Each site owns its stream, so the
// outcome does not depend on how sites interleave.
class SiteClocks {
public:
    SiteClocks(Site lo, Site hi, std::uint64_t seed) : lo_(lo) {
        for (Site x = lo; x <= hi; ++x) rngs_.emplace_back(derive_seed(seed, {site_label(x)}));
    }
    Rng& rng(Site x) { return rngs_[static_cast<std::size_t>(x - lo_)]; }
    void schedule(Site x, double now, double rate) {
        const double t = now + rng(x).exponential(rate);
        queue_.push({t, x});
    }
    bool empty() const { return queue_.empty(); }
    Clock pop() {
        Clock c = queue_.top();
        queue_.pop();
        return c;
    }

private:
    Site lo_;
    std::vector<Rng> rngs_;
    ClockQueue queue_;
};

}  // namespace

EnvTrajectory simulate_env(const RateSpec& spec, const SpinConfig& init, double horizon, std::uint64_t seed) {
    spec.validate();
    require_window_fits(init, spec);
    EnvTrajectory out(init, horizon);
    LiveConfig live(init);
    SiteClocks clocks(init.lo(), init.hi(), seed);
    auto bound = [&](Site x) {
        return live.at(x) == 1 ? spec.c0 + spec.lambda0 : spec.c1 + spec.lambda1;
    };
    for (Site x = init.lo(); x <= init.hi(); ++x) clocks.schedule(x, 0.0, bound(x));
    while (!clocks.empty()) {
        const Clock c = clocks.pop();
        if (c.time > horizon) break;
        const double b = bound(c.site);
        const double rate = spec.flip_rate(read_patch(live, c.site, spec.range));
        if (clocks.rng(c.site).uniform() * b < rate) {
            live.set(c.site, 1 - live.at(c.site));
            out.record_flip(c.site, c.time);
        }
        clocks.schedule(c.site, c.time, bound(c.site));
    }
    return out;
}

TripleTrajectory coupled_triple_evolve_direct(const SpinConfig& init, const RateSpec& spec, double horizon,
                                              std::uint64_t seed) {
    spec.validate();
    require_window_fits(init, spec);
    LiveConfig lower(init), mid(init), upper(init);
    TripleTrajectory out{EnvTrajectory(init, horizon), EnvTrajectory(init, horizon), EnvTrajectory(init, horizon)};
    const double bound = spec.total_event_rate();
    const NumericRates<double> r{spec.c0, spec.c1, spec.lambda0, spec.lambda1};
    SiteClocks clocks(init.lo(), init.hi(), seed);
    for (Site x = init.lo(); x <= init.hi(); ++x) clocks.schedule(x, 0.0, bound);
    while (!clocks.empty()) {
        const Clock c = clocks.pop();
        if (c.time > horizon) break;
        const Site x = c.site;
        const TripleState from = triple_from(lower.at(x), mid.at(x), upper.at(x));
        const double a = spec.flip_rate(read_patch(mid, x, spec.range));
        double pick = clocks.rng(x).uniform() * bound;
        for (const auto& [to, rate] : triple_rates(from, r, a)) {
            if (pick < rate) {
                const auto v = coordinates(to);
                LiveConfig* live[3] = {&lower, &mid, &upper};
                EnvTrajectory* traj[3] = {&out.minus, &out.mid, &out.plus};
                for (int k = 0; k < 3; ++k) {
                    if (live[k]->at(x) != v[k]) {
                        live[k]->set(x, v[k]);
                        traj[k]->record_flip(x, c.time);
                    }
                }
                break;
            }
            pick -= rate;
        }
        clocks.schedule(x, c.time, bound);
    }
    return out;
}

std::pair<TripleTrajectory, TripleTrajectory> coupled_pair_evolve_direct(const SpinConfig& init_a,
                                                                         const SpinConfig& init_b,
                                                                         const RateSpec& spec, double horizon,
                                                                         std::uint64_t seed) {
    spec.validate();
    require_window_fits(init_a, spec);
    if (init_a.lo() != init_b.lo() || init_a.hi() != init_b.hi()) {
        throw ConfigError("window", "paired configurations must share a window");
    }
    LiveConfig live[6] = {LiveConfig(init_a), LiveConfig(init_a), LiveConfig(init_a),
                          LiveConfig(init_b), LiveConfig(init_b), LiveConfig(init_b)};
    TripleTrajectory ta{EnvTrajectory(init_a, horizon), EnvTrajectory(init_a, horizon), EnvTrajectory(init_a, horizon)};
    TripleTrajectory tb{EnvTrajectory(init_b, horizon), EnvTrajectory(init_b, horizon), EnvTrajectory(init_b, horizon)};
    EnvTrajectory* traj[6] = {&ta.minus, &ta.mid, &ta.plus, &tb.minus, &tb.mid, &tb.plus};
    const double bound = spec.total_event_rate();
    const NumericRates<double> r{spec.c0, spec.c1, spec.lambda0, spec.lambda1};
    SiteClocks clocks(init_a.lo(), init_a.hi(), seed);
    for (Site x = init_a.lo(); x <= init_a.hi(); ++x) clocks.schedule(x, 0.0, bound);
    while (!clocks.empty()) {
        const Clock c = clocks.pop();
        if (c.time > horizon) break;
        const Site x = c.site;
        const TripleState from_a = triple_from(live[0].at(x), live[1].at(x), live[2].at(x));
        const TripleState from_b = triple_from(live[3].at(x), live[4].at(x), live[5].at(x));
        const double a = spec.flip_rate(read_patch(live[1], x, spec.range));
        const double b = spec.flip_rate(read_patch(live[4], x, spec.range));
        double pick = clocks.rng(x).uniform() * bound;
        for (const auto& [to, rate] : pair_rates(from_a, from_b, r, a, b)) {
            if (pick < rate) {
                const auto va = coordinates(to.first);
                const auto vb = coordinates(to.second);
                for (int k = 0; k < 6; ++k) {
                    const int v = k < 3 ? va[k] : vb[k - 3];
                    if (live[k].at(x) != v) {
                        live[k].set(x, v);
                        traj[k]->record_flip(x, c.time);
                    }
                }
                break;
            }
            pick -= rate;
        }
        clocks.schedule(x, c.time, bound);
    }
    return {std::move(ta), std::move(tb)};
}

void remove_trap_breaking_events(EventLog& log, double L, Site origin) {
    log.remove_events(origin, channels_leaving(1), L);
    log.remove_events(origin + 1, channels_leaving(0), L);
}

TripleTrajectory simulate_conditioned_env(const RateSpec& spec, const SpinConfig& init, double L,
                                          const EventLog& log) {
    if (!init.has_trap_at(0)) throw ConfigError("init", "conditioned evolution needs a trap at the origin");
    EventLog conditioned = log;
    remove_trap_breaking_events(conditioned, L);
    return coupled_triple_evolve(init, spec, conditioned);
}

TripleTrajectory simulate_conditioned_env(const RateSpec& spec, const SpinConfig& init, double L, double horizon,
                                          std::uint64_t seed) {
    return simulate_conditioned_env(spec, init, L, build_event_log(spec, init.lo(), init.hi(), horizon, seed));
}

SpinConfig sample_initial(const InitialLaw& law, const RateSpec& spec, Site lo, Site hi, BoundaryKind boundary,
                          std::uint64_t seed) {
    law.validate();
    const Boundary b{boundary, law.rho, derive_seed(seed, {0xE7})};
    const LazyInitial product{law.rho, derive_seed(seed, {0x1A}), false};
    std::vector<std::uint8_t> states;
    states.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Site x = lo; x <= hi; ++x) states.push_back(static_cast<std::uint8_t>(product(x)));
    SpinConfig config(lo, hi, std::move(states), b);
    if (law.kind == InitialKind::equilibrium_burnin && law.t_burn > 0.0) {
        const EventLog log = build_event_log(spec, lo, hi, law.t_burn, derive_seed(seed, {0xB0}));
        config = evolve_from_log(config, log, spec).snapshot(law.t_burn);
    }
    if (law.trap_conditioned) {
        config.set(0, 1);
        config.set(1, 0);
    }
    return config;
}

}  // namespace rwdre
