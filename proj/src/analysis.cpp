#include "rwdre/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rwdre/contact.hpp"
#include "rwdre/dynamics.hpp"
#include "rwdre/parallel.hpp"
#include "rwdre/random.hpp"

namespace rwdre {

namespace {

constexpr std::uint64_t kEventStream = 0xE;
constexpr std::uint64_t kInitialStream = 0x1A;
constexpr std::uint64_t kNoiseStream = 0x4E;

double geometric_raw_moment(double rho, int order) {
    // E[J^order] for P(J = j) = (1 - rho) rho^(j-1), j >= 1, summed until the
    // terms stop mattering.
    if (order == 0) return 1.0;
    double sum = 0.0;
    double weight = 1.0 - rho;
    for (int j = 1; j < 1000000; ++j) {
        const double term = std::pow(static_cast<double>(j), order) * weight;
        sum += term;
        if (j > order && term < 1e-17 * sum) break;
        weight *= rho;
    }
    return sum;
}

// Equilibrium density of a single range-0 site.
double range0_equilibrium(const RateSpec& spec) {
    const double down = spec.c0 + spec.lambda0 * spec.p0[1];
    const double up = spec.c1 + spec.lambda1 * spec.p1[0];
    return up / (up + down);
}

LazyInitial lazy_initial(const ReplicaSetup& setup, std::uint64_t seed) {
    double rho = setup.init.rho;
    if (setup.init.kind == InitialKind::equilibrium_burnin) rho = range0_equilibrium(setup.env);
    if (setup.env.independent_flips()) rho = setup.env.default_density();
    return LazyInitial{rho, derive_seed(seed, {kInitialStream}), setup.init.trap_conditioned};
}

WalkPath run_model(const ModelSpec& model, const Environment& env, const NoiseStream& noise, double horizon) {
    if (std::holds_alternative<InftyZero>(model.kind)) return run_infty_zero(env, noise, horizon);
    return run_generalized(env, model, noise, horizon);
}

RegenerationParams resolved(RegenerationParams params, const RateSpec& spec) {
    if (params.cone.m <= 0.0) params.cone.m = default_cone_slope(spec);
    return params;
}

}  // namespace

void ReplicaSetup::validate() const {
    env.validate();
    model.validate();
    init.validate();
    if (!window.automatic() && window.lo >= window.hi) throw ConfigError("window", "lo must be below hi");
    if (!window.automatic() && (window.lo > 0 || window.hi < 1)) {
        throw ConfigError("window", "must contain sites 0 and 1");
    }
}

Backend ReplicaSetup::backend() const {
    if (force_window) return Backend::window;
    return env.independent_flips() || env.range == 0 ? Backend::lazy : Backend::window;
}

WindowBounds auto_window(const RateSpec& spec, double horizon) {
    const double up_rate = spec.c1 + spec.lambda1;
    const double up_rho = spec.rho_plus();
    const double down_rate = spec.c0 + spec.lambda0;
    const double down_rho = 1.0 - spec.rho_minus();
    auto reach = [&](double rate, double rho) {
        const double mean = rate * geometric_raw_moment(rho, 1) * horizon;
        const double sd = std::sqrt(rate * geometric_raw_moment(rho, 2) * horizon);
        return static_cast<Site>(std::ceil(mean + 4.0 * sd)) + 10 + 2 * spec.range;
    };
    return WindowBounds{-reach(down_rate, down_rho), reach(up_rate, up_rho)};
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) noexcept {
    return derive_seed(seed, {static_cast<std::uint64_t>(replica)});
}

ReplicaRun run_replica(const ReplicaSetup& setup, double horizon, std::uint64_t seed,
                       const RegenerationParams* regeneration) {
    ReplicaRun run;
    run.seed = seed;
    const NoiseStream noise(derive_seed(seed, {kNoiseStream}));
    std::optional<RegenerationParams> params;
    if (regeneration) params = resolved(*regeneration, setup.env);

    try {
        if (setup.backend() == Backend::lazy) {
            const GraphicalSource source(ChannelRates::from_spec(setup.env), derive_seed(seed, {kEventStream}));
            const LazyCoordinateEnv env(source, setup.env, Coordinate::middle, lazy_initial(setup, seed), horizon);
            run.path = run_model(setup.model, env, noise, horizon);
            if (params) {
                const WalkReplica replica(run.path, setup.model, GammaData{&source, nullptr, nullptr, &noise});
                run.record = build_regeneration_times(replica, *params);
            }
        } else {
            const WindowBounds w = setup.window.automatic() ? auto_window(setup.env, horizon) : setup.window;
            const SpinConfig init = sample_initial(setup.init, setup.env, w.lo, w.hi, setup.boundary, seed);
            const EventLog log = build_event_log(setup.env, w.lo, w.hi, horizon, derive_seed(seed, {kEventStream}));
            EnvTrajectory env = evolve_from_log(init, log, setup.env);
            env.set_walker_guard(setup.env.range);
            run.path = run_model(setup.model, env, noise, horizon);
            if (params) {
                const WalkReplica replica(run.path, setup.model, GammaData{&log, nullptr, nullptr, &noise});
                run.record = build_regeneration_times(replica, *params);
            }
        }
    } catch (const WindowOverrun&) {
        run.overrun = true;
        run.path = WalkPath{};
        run.record.reset();
    }
    return run;
}

std::string to_string(SpeedMethod method) { return method == SpeedMethod::direct ? "direct" : "skeleton"; }

void SpeedConfig::validate() const {
    setup.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon", "must be positive and finite");
    if (replicas == 0) throw ConfigError("replicas", "must be at least 1");
    if (threads == 0) throw ConfigError("threads", "must be at least 1");
    RegenerationParams check = resolved(regeneration, setup.env);
    check.validate();
}

SpeedEstimate estimate_speed(const SpeedConfig& config, SpeedMethod method) {
    config.validate();
    const bool skeleton = method == SpeedMethod::skeleton;
    std::vector<std::uint64_t> seeds(config.replicas);
    std::vector<std::optional<Site>> ends(config.replicas);
    std::vector<std::optional<RegenerationRecord>> records(config.replicas);
    parallel_for(config.replicas, config.threads, [&](std::size_t i) {
        seeds[i] = replica_seed(config.seed, i);
        ReplicaRun run = run_replica(config.setup, config.horizon, seeds[i], skeleton ? &config.regeneration : nullptr);
        if (run.overrun) return;
        ends[i] = run.path.at(config.horizon);
        records[i] = std::move(run.record);
    });

    SpeedEstimate est;
    est.method = method;
    est.replicas = config.replicas;
    est.horizon = config.horizon;
    est.backend = config.setup.backend();
    est.seeds = seeds;
    est.finals = ends;
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    for (std::size_t i = 0; i < config.replicas; ++i) {
        if (!ends[i]) {
            ++est.overruns;
            continue;
        }
        sum += *ends[i];
        sum_sq += *ends[i] * *ends[i];
        ++est.used;
        if (skeleton) est.records.push_back(std::move(*records[i]));
    }
    if (est.used == 0) throw Error("every replica overran the simulation window");

    if (skeleton) {
        est.skeleton = skeleton_estimate(est.records);
        est.w = est.skeleton->w;
        est.std_error = est.skeleton->w_stderr;
        return est;
    }
    const auto n = static_cast<long double>(est.used);
    const long double h = config.horizon;
    est.w = static_cast<double>(static_cast<long double>(sum) / (n * h));
    if (est.used > 1) {
        const long double ss = static_cast<long double>(sum_sq) - static_cast<long double>(sum) * sum / n;
        est.std_error = static_cast<double>(std::sqrt(std::max(0.0L, ss) / (n - 1) / n) / h);
    }
    return est;
}

namespace {

std::string format_sigmas(double sigmas) {
    std::ostringstream os;
    os << sigmas;
    return os.str();
}

}  // namespace

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::none: return "none";
        case BoundKind::lower: return "lower";
        case BoundKind::upper: return "upper";
        case BoundKind::zero: return "zero";
    }
    return "none";
}

SpeedBoundVerdict check_speed_bounds(const RateSpec& spec, const SpeedEstimate& estimate, double sigmas) {
    SpeedBoundVerdict v;
    const double slack = sigmas * estimate.std_error;
    const double down = spec.c0 + spec.lambda0;
    const double up = spec.c1 + spec.lambda1;
    const bool lower = spec.c1 >= down;
    const bool upper = spec.c0 >= up;
    if (lower && upper) {
        v.kind = BoundKind::zero;
        v.pass = std::abs(estimate.w) <= slack;
        v.detail = "|w| <= " + format_sigmas(sigmas) + " stderr";
    } else if (lower) {
        v.kind = BoundKind::lower;
        v.bound = down * (spec.c1 - down) / (spec.c1 + down);
        v.pass = estimate.w + slack >= v.bound;
        v.detail = "w + " + format_sigmas(sigmas) + " stderr >= bound";
    } else if (upper) {
        v.kind = BoundKind::upper;
        v.bound = -up * (spec.c0 - up) / (spec.c0 + up);
        v.pass = estimate.w - slack <= v.bound;
        v.detail = "w - " + format_sigmas(sigmas) + " stderr <= bound";
    } else {
        v.detail = "no sign bound applies to these rates";
    }
    return v;
}

namespace {

// First event on `channel` at site x with time in (a, b).
std::optional<double> first_event(const GraphicalSource& source, Site x, Channel channel, double a, double b) {
    std::vector<SourceEvent> events;
    const auto last = static_cast<std::int64_t>(std::floor(std::min(b, 1e15)));
    for (auto n = static_cast<std::int64_t>(std::floor(a)); n <= last; ++n) {
        events.clear();
        source.block(x, n, events);
        for (const auto& e : events) {
            if (e.channel == channel && e.time > a && e.time < b) return e.time;
        }
    }
    return std::nullopt;
}

}  // namespace

LipschitzReport lipschitz_coupling_experiment(const LipschitzParams& params) {
    if (!(params.d0 > 0.0) || !(params.d1 > 0.0)) throw ConfigError("lipschitz.d", "flip rates must be positive");
    if (params.delta < 0.0) throw ConfigError("lipschitz.delta", "must be >= 0");
    if (params.replicas < 2) throw ConfigError("lipschitz.replicas", "must be at least 2");

    RateSpec spec = RateSpec::independent(params.d0, params.d1);
    spec.lambda1 = params.delta;
    spec.p1 = {1.0, 1.0};
    const double rho = params.d1 / (params.d0 + params.d1);
    const double rho_delta = (params.d1 + params.delta) / (params.d0 + params.d1 + params.delta);
    const double h = params.horizon;

    struct Outcome {
        bool ordered = true;
        bool used = false;
        double gap = 0.0;
        double gap_single = 0.0;
    };
    std::vector<Outcome> outcomes(params.replicas);
    parallel_for(params.replicas, params.threads, [&](std::size_t i) {
        const std::uint64_t seed = replica_seed(params.seed, i);
        const GraphicalSource source(ChannelRates::from_spec(spec), derive_seed(seed, {kEventStream}));
        const std::uint64_t init_seed = derive_seed(seed, {kInitialStream});
        const NoiseStream noise(derive_seed(seed, {kNoiseStream}));

        const LazyCoordinateEnv base(source, spec, Coordinate::lower, LazyInitial{rho, init_seed, true}, h);
        const LazyCoordinateEnv more(source, spec, Coordinate::upper, LazyInitial{rho_delta, init_seed, true}, h);
        const WalkPath w = run_infty_zero(base, noise, h);
        const WalkPath w_delta = run_infty_zero(more, noise, h);

        // First extra particle landing just right of W.
        std::optional<double> hit;
        Site hit_site = 0;
        for (std::size_t k = 0; k <= w.jump_count() && !hit; ++k) {
            const double from = k == 0 ? w.start_time : w.jump_times[k - 1];
            const double to = k < w.jump_count() ? w.jump_times[k] : h;
            const Site at = k == 0 ? w.start : w.positions[k - 1];
            hit = first_event(source, at + 1, Channel::arrow1, from, to);
            hit_site = at + 1;
        }
        LazyCoordinateEnv single(source, spec, Coordinate::lower, LazyInitial{rho, init_seed, true}, h);
        if (hit) single.inject(hit_site, *hit, 1);
        const WalkPath w_single = run_infty_zero(single, noise, h);

        Outcome& out = outcomes[i];
        out.used = hit.has_value();
        out.ordered = sandwich_check(w_single, w, w_delta).ok;
        out.gap = static_cast<double>(w_delta.at(h) - w.at(h));
        out.gap_single = static_cast<double>(w_single.at(h) - w.at(h));
    });

    LipschitzReport report;
    report.replicas = params.replicas;
    std::vector<double> gaps;
    std::vector<double> singles;
    for (const auto& o : outcomes) {
        report.ordering_violations += o.ordered ? 0 : 1;
        report.extra_events_used += o.used ? 1 : 0;
        gaps.push_back(o.gap);
        singles.push_back(o.gap_single);
    }
    report.gap = mean_stat(gaps);
    report.gap_single = mean_stat(singles);
    const double share = params.d0 / (params.d0 + params.d1);
    for (int n : {1, 2, 4}) {
        LipschitzBound b;
        b.steps = n;
        b.value = share * n * (1.0 - std::exp(-params.delta * h / n));
        b.pass = report.gap.mean + 3.0 * report.gap.std_error >= b.value;
        report.bounds.push_back(b);
    }
    report.pass = report.ordering_violations == 0 && report.bounds.front().pass;
    return report;
}

double compound_geometric_moment(double rate, double rho, double t, int order) {
    if (order < 0) throw ConfigError("order", "must be >= 0");
    // Raw moments from cumulants: kappa_k = rate t E[J^k].
    std::vector<double> cumulant(static_cast<std::size_t>(order) + 1, 0.0);
    for (int k = 1; k <= order; ++k) cumulant[static_cast<std::size_t>(k)] = rate * t * geometric_raw_moment(rho, k);
    std::vector<double> m(static_cast<std::size_t>(order) + 1, 0.0);
    m[0] = 1.0;
    for (int n = 1; n <= order; ++n) {
        double binom = 1.0;  // C(n-1, k-1)
        for (int k = 1; k <= n; ++k) {
            m[static_cast<std::size_t>(n)] += binom * cumulant[static_cast<std::size_t>(k)] * m[static_cast<std::size_t>(n - k)];
            binom = binom * (n - k) / k;
        }
    }
    return m[static_cast<std::size_t>(order)];
}

double envelope_moment_bound(const RateSpec& spec, double t, double p) {
    const int k = static_cast<int>(std::ceil(p));
    auto moment = [&](double rate, double rho) {
        const double raw = compound_geometric_moment(rate, rho, t, k);
        return std::pow(raw, p / k);
    };
    return moment(spec.c1 + spec.lambda1, spec.rho_plus()) + moment(spec.c0 + spec.lambda0, 1.0 - spec.rho_minus());
}

MomentReport ui_moments(const ReplicaSetup& setup, const MomentParams& params) {
    setup.validate();
    if (params.times.size() < 2) throw ConfigError("moments.times", "need at least two times");
    if (params.powers.empty()) throw ConfigError("moments.powers", "need at least one power");
    for (double t : params.times) {
        if (!(t > 0.0)) throw ConfigError("moments.times", "times must be positive");
    }
    for (double p : params.powers) {
        if (!(p >= 1.0)) throw ConfigError("moments.powers", "powers must be >= 1");
    }
    const double horizon = *std::max_element(params.times.begin(), params.times.end());

    std::vector<std::optional<std::vector<Site>>> samples(params.replicas);
    parallel_for(params.replicas, params.threads, [&](std::size_t i) {
        const ReplicaRun run = run_replica(setup, horizon, replica_seed(params.seed, i));
        if (run.overrun) return;
        std::vector<Site> at;
        for (double t : params.times) at.push_back(run.path.at(t));
        samples[i] = std::move(at);
    });

    MomentReport report;
    report.replicas = params.replicas;
    for (const auto& s : samples) report.overruns += s ? 0 : 1;
    for (double p : params.powers) {
        MomentSeries series;
        series.p = p;
        series.within_envelope = true;
        std::vector<double> xs;
        std::vector<double> ys;
        for (std::size_t j = 0; j < params.times.size(); ++j) {
            const double t = params.times[j];
            std::vector<double> values;
            for (const auto& s : samples) {
                if (s) values.push_back(std::pow(std::abs(static_cast<double>((*s)[j]) / t), p));
            }
            MomentRow row;
            row.t = t;
            row.moment = mean_stat(values);
            row.envelope_bound = envelope_moment_bound(setup.env, t, p) / std::pow(t, p);
            if (row.moment.mean - 3.0 * row.moment.std_error > row.envelope_bound) series.within_envelope = false;
            xs.push_back(t);
            ys.push_back(row.moment.mean);
            series.rows.push_back(row);
        }
        series.trend = linear_fit(xs, ys);
        series.no_growth = series.trend.slope_lo <= 0.0;
        report.series.push_back(std::move(series));
    }
    return report;
}

void PropertyTally::add(bool ok, std::size_t replica) {
    ++checks;
    if (ok) return;
    if (violations++ == 0) first_replica = replica;
}

namespace {

// Hands the three coupled coordinates of one replica to `body`.
template <class Body>
void with_triple(const ReplicaSetup& setup, double horizon, std::uint64_t seed, Body&& body) {
    if (setup.backend() == Backend::lazy) {
        const GraphicalSource source(ChannelRates::from_spec(setup.env), derive_seed(seed, {kEventStream}));
        const LazyInitial init = lazy_initial(setup, seed);
        const LazyCoordinateEnv lower(source, setup.env, Coordinate::lower, init, horizon);
        const LazyCoordinateEnv middle(source, setup.env, Coordinate::middle, init, horizon);
        const LazyCoordinateEnv upper(source, setup.env, Coordinate::upper, init, horizon);
        body(lower, middle, upper);
        return;
    }
    const WindowBounds w = setup.window.automatic() ? auto_window(setup.env, horizon) : setup.window;
    const SpinConfig init = sample_initial(setup.init, setup.env, w.lo, w.hi, setup.boundary, seed);
    const EventLog log = build_event_log(setup.env, w.lo, w.hi, horizon, derive_seed(seed, {kEventStream}));
    TripleTrajectory triple = coupled_triple_evolve(init, setup.env, log);
    triple.minus.set_walker_guard(setup.env.range);
    triple.mid.set_walker_guard(setup.env.range);
    triple.plus.set_walker_guard(setup.env.range);
    body(triple.minus, triple.mid, triple.plus);
}

// Runs `check(i) -> bool` over replicas; a WindowOverrun counts as an overrun.
template <class Check>
PropertyTally tally(std::size_t replicas, unsigned threads, Check&& check) {
    enum class Result : std::uint8_t { ok, violation, overrun };
    std::vector<Result> results(replicas, Result::ok);
    parallel_for(replicas, threads, [&](std::size_t i) {
        try {
            results[i] = check(i) ? Result::ok : Result::violation;
        } catch (const WindowOverrun&) {
            results[i] = Result::overrun;
        }
    });
    PropertyTally t;
    t.replicas = replicas;
    for (std::size_t i = 0; i < replicas; ++i) {
        if (results[i] == Result::overrun) {
            ++t.overruns;
            continue;
        }
        t.add(results[i] == Result::ok, i);
    }
    return t;
}

}  // namespace

PropertyTally verify_sandwich(const ReplicaSetup& setup, double horizon, std::size_t replicas, std::uint64_t seed,
                              unsigned threads) {
    setup.validate();
    return tally(replicas, threads, [&](std::size_t i) {
        const std::uint64_t s = replica_seed(seed, i);
        bool ok = true;
        with_triple(setup, horizon, s, [&](const Environment& lower, const Environment& middle,
                                           const Environment& upper) {
            const NoiseStream noise(derive_seed(s, {kNoiseStream}));
            const WalkPath z = run_infty_zero(middle, noise, horizon);
            const WalkPath h_minus = run_envelope(Side::minus, lower, horizon);
            const WalkPath h_plus = run_envelope(Side::plus, upper, horizon);
            ok = sandwich_check(z, h_minus, h_plus).ok;
        });
        return ok;
    });
}

PropertyTally verify_monotonicity(const ReplicaSetup& setup, double horizon, std::size_t replicas,
                                  std::uint64_t seed, unsigned threads) {
    setup.validate();
    return tally(replicas, threads, [&](std::size_t i) {
        const std::uint64_t s = replica_seed(seed, i);
        bool ok = true;
        with_triple(setup, horizon, s, [&](const Environment& lower, const Environment& middle,
                                           const Environment& upper) {
            const NoiseStream noise(derive_seed(s, {kNoiseStream}));
            const WalkPath a = run_infty_zero(lower, noise, horizon);
            const WalkPath b = run_infty_zero(middle, noise, horizon);
            const WalkPath c = run_infty_zero(upper, noise, horizon);
            ok = !first_order_violation(a, b) && !first_order_violation(b, c);
        });
        return ok;
    });
}

PropertyTally verify_triple_order(const RateSpec& spec, Site half_width, double horizon, std::size_t replicas,
                                  std::uint64_t seed, unsigned threads) {
    spec.validate();
    const InitialLaw law = InitialLaw::default_for(spec, false);
    return tally(replicas, threads, [&](std::size_t i) {
        const std::uint64_t s = replica_seed(seed, i);
        const SpinConfig init =
            sample_initial(law, spec, -half_width, half_width, BoundaryKind::frozen_resample, s);
        const EventLog log = build_event_log(spec, -half_width, half_width, horizon, derive_seed(s, {kEventStream}));
        const TripleTrajectory t = coupled_triple_evolve(init, spec, log);
        return trajectory_dominated(t.minus, t.mid) && trajectory_dominated(t.mid, t.plus);
    });
}

DiscrepancyTally verify_healthy_discrepancy(const RateSpec& spec, Site half_width, double horizon, double depth,
                                            std::size_t replicas, std::uint64_t seed, unsigned threads) {
    spec.validate();
    if (!(depth > 0.0) || depth > horizon) throw ConfigError("depth", "must lie in (0, horizon]");
    const InitialLaw free_law = InitialLaw::default_for(spec, false);
    const InitialLaw trap_law = InitialLaw::default_for(spec, true);
    const Site K = half_width;

    struct Outcome {
        bool plain = true;
        bool conditioned = true;
        bool dominated = true;
    };
    std::vector<Outcome> outcomes(replicas);
    parallel_for(replicas, threads, [&](std::size_t i) {
        const std::uint64_t s = replica_seed(seed, i);
        const EventLog log = build_event_log(spec, -K, K, horizon, derive_seed(s, {kEventStream}));
        const SpinConfig a = sample_initial(free_law, spec, -K, K, BoundaryKind::frozen_resample, derive_seed(s, {1}));
        const SpinConfig b = sample_initial(free_law, spec, -K, K, BoundaryKind::frozen_resample, derive_seed(s, {2}));
        outcomes[i].plain = run_tcp_with_discrepancy(log, spec, a, b).report.clean();

        EventLog conditioned = log;
        remove_trap_breaking_events(conditioned, depth);
        const SpinConfig ta = sample_initial(trap_law, spec, -K, K, BoundaryKind::frozen_resample, derive_seed(s, {3}));
        const SpinConfig tb = sample_initial(trap_law, spec, -K, K, BoundaryKind::frozen_resample, derive_seed(s, {4}));
        const ConditionedRun run = run_conditioned_pair(conditioned, spec, ta, tb, depth);
        outcomes[i].conditioned = run.report.clean();
        outcomes[i].dominated = !run.domination_violation;
    });

    DiscrepancyTally out;
    for (auto* t : {&out.plain, &out.conditioned, &out.domination}) t->replicas = replicas;
    for (std::size_t i = 0; i < replicas; ++i) {
        out.plain.add(outcomes[i].plain, i);
        out.conditioned.add(outcomes[i].conditioned, i);
        out.domination.add(outcomes[i].dominated, i);
    }
    return out;
}

namespace {

bool cone_discrepancy(const TripleTrajectory& a, const TripleTrajectory& b, double L, double duration,
                      const ConeSpec& cone) {
    const double end = L + duration;
    const double reach = cone.m * duration + cone.R;
    for (Site x = a.mid.lo(); x <= a.mid.hi(); ++x) {
        const double dist = std::abs(static_cast<double>(x));
        if (dist > reach) continue;
        const double entry = L + std::max(0.0, (dist - cone.R) / cone.m);
        if (a.mid.window_state(x, entry) != b.mid.window_state(x, entry)) return true;
        for (const auto* traj : {&a.mid, &b.mid}) {
            for (double t : traj->flip_times(x)) {
                if (t <= entry || t > end) continue;
                if (a.mid.window_state(x, t) != b.mid.window_state(x, t)) return true;
            }
        }
    }
    return false;
}

}  // namespace

MixingReport mixing_decay_experiment(const RateSpec& spec, const MixingParams& params) {
    spec.validate();
    if (params.depths.empty()) throw ConfigError("mixing.depths", "need at least one depth");
    for (double L : params.depths) {
        if (!(L > 0.0)) throw ConfigError("mixing.depths", "depths must be positive");
    }
    if (!(params.duration > 0.0)) throw ConfigError("mixing.duration", "must be positive");
    if (params.replicas == 0) throw ConfigError("mixing.replicas", "must be at least 1");

    ConeSpec cone = params.cone;
    if (cone.m <= 0.0) cone.m = default_cone_slope(spec);
    cone.validate();
    const Site K = params.half_width > 0
                       ? params.half_width
                       : static_cast<Site>(std::ceil(cone.m * params.duration + cone.R)) + 10 + 2 * spec.range;

    MixingReport report;
    report.cone_slope = cone.m;
    report.half_width = K;
    const InitialLaw law = InitialLaw::default_for(spec, true);

    for (std::size_t j = 0; j < params.depths.size(); ++j) {
        const double L = params.depths[j];
        struct Outcome {
            bool gamma = false;
            bool stuck_violation = false;
            bool discrepancy = false;
            bool stays = false;
        };
        std::vector<Outcome> outcomes(params.replicas);
        parallel_for(params.replicas, params.threads, [&](std::size_t i) {
            const std::uint64_t seed = derive_seed(params.seed, {j, i});
            const SpinConfig a = sample_initial(law, spec, -K, K, BoundaryKind::frozen_resample, derive_seed(seed, {1}));
            const SpinConfig b_raw = sample_initial(law, spec, -K, K, BoundaryKind::frozen_resample, derive_seed(seed, {2}));
            const SpinConfig b(-K, K, b_raw.states(), a.boundary());
            const EventLog log = build_event_log(spec, -K, K, L + params.duration, derive_seed(seed, {3}));
            const NoiseStream noise(derive_seed(seed, {4}));
            Outcome& out = outcomes[i];

            out.gamma = !log.any_event(0, 0.0, L, channels_leaving(1)) && !log.any_event(1, 0.0, L, channels_leaving(0));
            if (out.gamma) {
                EnvTrajectory env = evolve_from_log(a, log, spec);
                env.set_walker_guard(spec.range);
                try {
                    const WalkPath z = run_infty_zero(env, noise, L);
                    out.stuck_violation = z.start != 0 || z.jump_count() != 0;
                } catch (const WindowOverrun&) {
                    out.stuck_violation = true;
                }
            }

            EventLog conditioned = log;
            remove_trap_breaking_events(conditioned, L);
            auto pair = coupled_pair_evolve(a, b, spec, conditioned);
            out.discrepancy = cone_discrepancy(pair.first, pair.second, L, params.duration, cone);
            pair.first.mid.set_walker_guard(spec.range);
            try {
                const WalkPath z = run_infty_zero(pair.first.mid, noise, L + params.duration);
                out.stays = !first_cone_exit(z, L, z.at(L), cone, L + params.duration);
            } catch (const WindowOverrun&) {
                out.stays = false;
            }
        });

        MixingRow row;
        row.L = L;
        std::size_t disc = 0;
        std::size_t stays = 0;
        for (const auto& o : outcomes) {
            row.gamma_hits += o.gamma ? 1 : 0;
            row.stuck_violations += o.stuck_violation ? 1 : 0;
            disc += o.discrepancy ? 1 : 0;
            stays += o.stays ? 1 : 0;
        }
        const auto n = static_cast<double>(params.replicas);
        row.phi = 2.0 * static_cast<double>(disc) / n;
        const auto phi_ci = wilson_interval(disc, params.replicas);
        row.phi_ci = {2.0 * phi_ci.first, 2.0 * phi_ci.second};
        row.kappa = static_cast<double>(stays) / n;
        row.kappa_ci = wilson_interval(stays, params.replicas);
        row.gamma = static_cast<double>(row.gamma_hits) / n;
        row.gamma_ci = wilson_interval(row.gamma_hits, params.replicas);
        row.gamma_exact = std::exp(-spec.total_event_rate() * L);
        row.ratio = row.kappa > 0.0 ? row.phi / row.kappa : kNever;
        report.rows.push_back(row);
    }
    report.strictly_decreasing = true;
    for (std::size_t j = 1; j < report.rows.size(); ++j) {
        if (!(report.rows[j].ratio < report.rows[j - 1].ratio)) report.strictly_decreasing = false;
    }
    return report;
}

}  // namespace rwdre
