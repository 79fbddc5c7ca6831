#include "rwdre/contact.hpp"

#include <algorithm>
#include <cmath>

#include "rwdre/dynamics.hpp"
#include "rwdre/random.hpp"
#include "rwdre/stats.hpp"

namespace rwdre {

InfectionTrajectory run_tcp(const EventLog& log, const SpinConfig& initial, const TcpOptions& options) {
    InfectionTrajectory out(initial, log.horizon());
    std::vector<std::uint8_t> live = initial.states();
    const Site lo = initial.lo();
    const Site n = initial.hi() - lo + 1;
    const bool periodic = initial.boundary().kind == BoundaryKind::periodic;
    auto get = [&](Site y) -> int {
        Site k = y - lo;
        if (k >= 0 && k < n) return live[static_cast<std::size_t>(k)];
        if (!periodic) return options.exterior_infected ? 1 : 0;
        k %= n;
        if (k < 0) k += n;
        return live[static_cast<std::size_t>(k)];
    };
    for (const auto& e : log.schedule()) {
        if (!initial.contains(e.site)) continue;
        if (e.time <= options.wall_until && (e.site == options.wall_site || e.site == options.wall_site + 1)) continue;
        int next = 0;
        if (is_arrow(e.channel)) {
            for (Site y = e.site - options.range; y <= e.site + options.range && !next; ++y) next = get(y);
        }
        auto& cell = live[static_cast<std::size_t>(e.site - lo)];
        if (next != cell) {
            cell = static_cast<std::uint8_t>(next);
            out.record_flip(e.site, e.time);
        }
    }
    return out;
}

namespace {

SpinConfig all_infected(const SpinConfig& like) {
    return SpinConfig::filled(like.lo(), like.hi(), 1, like.boundary());
}

bool triples_agree(const std::pair<TripleTrajectory, TripleTrajectory>& pair, Site x, double t) {
    const auto& [a, b] = pair;
    return a.minus.window_state(x, t) == b.minus.window_state(x, t) &&
           a.mid.window_state(x, t) == b.mid.window_state(x, t) &&
           a.plus.window_state(x, t) == b.plus.window_state(x, t);
}

void record(DiscrepancyReport& report, bool ok, Site x, double t) {
    ++report.checks;
    if (ok) return;
    if (report.violations++ == 0) {
        report.first_site = x;
        report.first_time = t;
    }
}

// Checks "healthy implies equal" at time 0 and after every event.
DiscrepancyReport check_healthy(const EventLog& log, const InfectionTrajectory& infection,
                                const std::pair<TripleTrajectory, TripleTrajectory>& pair) {
    DiscrepancyReport report;
    for (Site x = infection.lo(); x <= infection.hi(); ++x) {
        if (infection.window_state(x, 0.0) == 0) record(report, triples_agree(pair, x, 0.0), x, 0.0);
    }
    for (const auto& e : log.schedule()) {
        if (e.site < infection.lo() || e.site > infection.hi()) continue;
        if (infection.window_state(e.site, e.time) == 0) record(report, triples_agree(pair, e.site, e.time), e.site, e.time);
    }
    return report;
}

}  // namespace

TcpRun run_tcp_with_discrepancy(const EventLog& log, const RateSpec& spec, const SpinConfig& init_a,
                                const SpinConfig& init_b) {
    const auto pair = coupled_pair_evolve(init_a, init_b, spec, log);
    TcpRun run{run_tcp(log, all_infected(init_a), TcpOptions{spec.range}), {}};
    run.report = check_healthy(log, run.infection, pair);
    return run;
}

ConditionedRun run_conditioned_pair(const EventLog& log, const RateSpec& spec, const SpinConfig& init_a,
                                    const SpinConfig& init_b, double L) {
    if (!init_a.has_trap_at(0) || !init_b.has_trap_at(0)) {
        throw ConfigError("initial", "conditioned pair needs a trap at the origin in both configurations");
    }
    const auto pair = coupled_pair_evolve(init_a, init_b, spec, log);

    SpinConfig walled = all_infected(init_a);
    walled.set(0, 0);
    walled.set(1, 0);
    TcpOptions wall{spec.range};
    wall.wall_until = L;

    ConditionedRun run{run_tcp(log, walled, wall), run_tcp(log, all_infected(init_a), TcpOptions{spec.range}), {}, {}};
    run.report = check_healthy(log, run.conditioned, pair);

    auto dominated = [&](Site x, double t) {
        return run.conditioned.window_state(x, t) <= run.unconditioned.window_state(x, t);
    };
    for (Site x = walled.lo(); x <= walled.hi() && !run.domination_violation; ++x) {
        if (!dominated(x, 0.0)) run.domination_violation = 0.0;
    }
    for (const auto& e : log.schedule()) {
        if (run.domination_violation) break;
        if (!walled.contains(e.site)) continue;
        if (!dominated(e.site, e.time)) run.domination_violation = e.time;
    }
    return run;
}

namespace {

struct InfectionEvent {
    double time;
    Site site;
    Site source;  // equal to site for a recovery
};

std::vector<InfectionEvent> infection_events(const RateSpec& spec, const ExtinctionParams& p, std::uint64_t seed) {
    const double recovery = spec.c0 + spec.c1;
    const double attempt = spec.lambda0 + spec.lambda1;
    const int r = spec.range;
    std::vector<InfectionEvent> events;
    for (Site x = -p.window; x <= p.window; ++x) {
        Rng rng(derive_seed(seed, {site_label(x)}));
        for (double t = rng.exponential(recovery); t <= p.horizon; t += rng.exponential(recovery)) {
            events.push_back({t, x, x});
        }
        if (r == 0 || attempt <= 0.0) continue;
        const double total = 2.0 * r * attempt;
        for (double t = rng.exponential(total); t <= p.horizon; t += rng.exponential(total)) {
            const auto k = static_cast<Site>(rng.below(static_cast<std::uint64_t>(2 * r)));
            const Site offset = k < r ? k - r : k - r + 1;
            events.push_back({t, x, x + offset});
        }
    }
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) { return a.time != b.time ? a.time < b.time : a.site < b.site; });
    return events;
}

}  // namespace

ExtinctionReport extinction_stats(const RateSpec& spec, const ExtinctionParams& params) {
    spec.validate();
    if (params.box > params.window) throw ConfigError("extinction.box", "box must fit in the window");
    ExtinctionReport report;
    const Site width = 2 * params.window + 1;
    const int r = spec.range;
    for (std::size_t i = 0; i < params.replicas; ++i) {
        const auto events = infection_events(spec, params, derive_seed(params.seed, {i}));
        std::vector<std::uint8_t> tcp(static_cast<std::size_t>(width), 1);
        std::vector<std::uint8_t> lcp(static_cast<std::size_t>(width), 1);
        auto idx = [&](Site x) { return static_cast<std::size_t>(x + params.window); };
        auto inside = [&](Site x) { return x >= -params.window && x <= params.window; };
        auto in_box = [&](Site x) { return x >= -params.box && x <= params.box; };
        Site box_infected = 2 * params.box + 1;
        double cleared = 0.0;

        for (const auto& e : events) {
            const int before = tcp[idx(e.site)];
            if (e.source == e.site) {
                tcp[idx(e.site)] = 0;
                lcp[idx(e.site)] = 0;
            } else if (inside(e.source)) {
                if (lcp[idx(e.source)]) lcp[idx(e.site)] = 1;
                Site lowest = e.site;
                for (Site y = std::max(e.site - r, -params.window); y <= std::min(e.site + r, params.window); ++y) {
                    if (y != e.site && tcp[idx(y)]) {
                        lowest = y;
                        break;
                    }
                }
                if (lowest == e.source) tcp[idx(e.site)] = 1;
            }
            if (tcp[idx(e.site)] > lcp[idx(e.site)]) ++report.domination_violations;
            if (in_box(e.site) && before != tcp[idx(e.site)]) {
                box_infected += tcp[idx(e.site)] ? 1 : -1;
                if (box_infected == 0) cleared = e.time;
            }
        }
        report.censored.push_back(box_infected > 0);
        report.times.push_back(box_infected > 0 ? params.horizon : cleared);
    }

    std::vector<double> sorted = report.times;
    std::sort(sorted.begin(), sorted.end());
    report.threshold = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
    if (report.threshold >= params.horizon) report.threshold = 0.0;
    const TailFit fit = exponential_tail_fit(report.times, report.censored, report.threshold);
    report.tail_slope = -fit.rate;
    report.tail_slope_lo = -fit.rate_hi;
    report.tail_slope_hi = -fit.rate_lo;
    return report;
}

}  // namespace rwdre
