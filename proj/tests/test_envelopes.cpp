#include <doctest.h>

#include <cmath>

#include "rwdre/envelope.hpp"
#include "rwdre/random.hpp"

using namespace rwdre;

namespace {

SpinConfig config_from(Site lo, std::vector<std::uint8_t> states) {
    const Site hi = lo + static_cast<Site>(states.size()) - 1;
    return SpinConfig(lo, hi, std::move(states));
}

// Sites -4..9 hold 0 1 0 0 | 1 0 1 1 1 0 0 1 0 0, so the origin is a trap and
// the next trap to its right once site 1 fills is at 4.
SpinConfig trap_window() { return config_from(-4, {0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 0}); }

// Walk with Exp(1) holding times and jumps of size 1..5 in either direction.
WalkPath random_path(std::uint64_t seed, double horizon) {
    Rng rng(seed);
    WalkPath path;
    path.horizon = horizon;
    Site x = 0;
    double t = 0;
    for (;;) {
        t += rng.exponential(1.0);
        if (t > horizon) break;
        const Site step = static_cast<Site>(1 + rng.below(5));
        x += rng.bernoulli(0.5) ? step : -step;
        path.push(t, x);
    }
    return path;
}

// Range-0 rates with arrows on both sides, so the three coordinates differ.
RateSpec range0_spec() {
    RateSpec spec;
    spec.c0 = 1.0;
    spec.c1 = 1.0;
    spec.lambda0 = 0.8;
    spec.lambda1 = 1.2;
    spec.p0 = {0.0, 0.5};
    spec.p1 = {0.7, 0.0};
    return spec;
}

}  // namespace

TEST_CASE("envelopes stay put without flips") {
    const EnvTrajectory env(trap_window(), 10.0);
    for (Side side : {Side::plus, Side::minus}) {
        const auto path = run_envelope(side, env, 10.0);
        CHECK(path.start == 0);
        CHECK(path.jump_count() == 0);
    }
}

TEST_CASE("a filled hole moves H+ to the next trap") {
    EnvTrajectory env(trap_window(), 10.0);
    env.record_flip(1, 2.5);
    const auto path = run_envelope(Side::plus, env, 10.0);
    REQUIRE(path.jump_count() == 1);
    CHECK(path.jump_times[0] == 2.5);
    CHECK(path.positions[0] == 4);
    CHECK(run_envelope(Side::minus, env, 10.0).jump_count() == 0);
}

TEST_CASE("an emptied particle moves H- to the next trap on the left") {
    EnvTrajectory env(trap_window(), 10.0);
    env.record_flip(0, 1.0);
    const auto path = run_envelope(Side::minus, env, 10.0);
    REQUIRE(path.jump_count() == 1);
    CHECK(path.positions[0] == -3);
}

TEST_CASE("cone_exit on simple paths") {
    const ConeSpec cone{1.0, 0.0};
    WalkPath still;
    still.horizon = 10.0;
    const auto none = cone_exit(still, cone, 10.0);
    CHECK(none.S_censored);
    CHECK(std::isinf(none.S));
    CHECK(none.S_hat == 0.0);

    WalkPath jump;
    jump.horizon = 10.0;
    jump.push(2.0, 5);
    const auto one = cone_exit(jump, cone, 10.0);
    CHECK_FALSE(one.S_censored);
    CHECK(one.S == 2.0);
    CHECK(one.S_hat == 5.0);

    const auto far = cone_exit(jump, cone, 4.0);
    CHECK(far.S == 2.0);
    CHECK(far.S_hat_censored);
}

TEST_CASE("cone_exit agrees with a dense grid scan") {
    const double step = 1e-3;
    const double horizon = 20.0;
    const ConeSpec cone{0.5, 1.0};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto path = random_path(seed, horizon);
        std::optional<double> first, last;
        for (long i = 1; i * step <= horizon; ++i) {
            const double t = i * step;
            if (std::abs(static_cast<double>(path.at(t))) > cone.m * t + cone.R) {
                if (!first) first = t;
                last = t;
            }
        }
        const auto stats = cone_exit(path, cone, horizon);
        CHECK(first.has_value() == !stats.S_censored);
        if (first) {
            CHECK(stats.S <= *first);
            CHECK(*first - stats.S <= step + 1e-9);
        }
        if (last && !stats.S_hat_censored) {
            CHECK(stats.S_hat >= *last);
            CHECK(stats.S_hat - *last <= step + 1e-9);
        }
        if (stats.S_hat_censored) CHECK(horizon - *last < step);
    }
}

TEST_CASE("first_cone_exit looks only after the apex") {
    WalkPath path;
    path.horizon = 10.0;
    path.push(1.0, 4);
    path.push(3.0, 2);
    path.push(6.0, 9);
    const ConeSpec cone{1.0, 1.0};
    CHECK(first_cone_exit(path, 0.0, 0, cone, 10.0) == 1.0);
    CHECK(first_cone_exit(path, 2.0, 2, cone, 10.0) == 4.0);
    CHECK_FALSE(first_cone_exit(path, 2.0, 2, cone, 5.0).has_value());
}

TEST_CASE("sandwich on a frozen environment is 0 <= 0 <= 0") {
    const EnvTrajectory env(trap_window(), 5.0);
    const NoiseStream noise(3);
    const auto z = run_infty_zero(env, noise, 5.0);
    const auto lower = run_envelope(Side::minus, env, 5.0);
    const auto upper = run_envelope(Side::plus, env, 5.0);
    CHECK(z.final_position() == 0);
    CHECK(sandwich_check(z, lower, upper).ok);

    WalkPath bad = z;
    bad.push(1.0, 7);
    const auto result = sandwich_check(bad, lower, upper);
    CHECK_FALSE(result.ok);
    CHECK(result.first_violation == 1.0);
}

TEST_CASE("with only fillings the walk follows H+ exactly") {
    Rng rng(12);
    auto init = SpinConfig::filled(-5, 400, 0);
    for (Site x = -5; x <= 400; ++x) init.set(x, rng.bernoulli(0.5));
    init.set(0, 1);
    init.set(1, 0);
    EnvTrajectory env(init, 30.0);
    for (Site x = 1; x <= 380; ++x) {
        if (init.at(x) == 0) env.record_flip(x, rng.uniform() * 30.0);
    }
    const NoiseStream noise(5);
    const auto z = run_infty_zero(env, noise, 30.0);
    const auto upper = run_envelope(Side::plus, env, 30.0);
    CHECK(z.jump_count() > 0);
    CHECK(z.jump_times == upper.jump_times);
    CHECK(z.positions == upper.positions);
}

TEST_CASE("random lazy triples satisfy the sandwich") {
    const auto spec = range0_spec();
    const double horizon = 20.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const GraphicalSource source(ChannelRates::from_spec(spec), seed);
        const std::uint64_t init_seed = derive_seed(seed, {1});
        const LazyCoordinateEnv lower(source, spec, Coordinate::lower, {spec.rho_minus(), init_seed, true}, horizon);
        const LazyCoordinateEnv mid(source, spec, Coordinate::middle, {spec.default_density(), init_seed, true}, horizon);
        const LazyCoordinateEnv upper(source, spec, Coordinate::upper, {spec.rho_plus(), init_seed, true}, horizon);
        const auto z = run_infty_zero(mid, NoiseStream(derive_seed(seed, {2})), horizon);
        const auto result = sandwich_check(z, run_envelope(Side::minus, lower, horizon),
                                           run_envelope(Side::plus, upper, horizon));
        CHECK_MESSAGE(result.ok, result.detail);
    }
}

TEST_CASE("H+ ignores the environment left of site 1") {
    const auto spec = RateSpec::independent(1.0, 2.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto base = SpinConfig::filled(-100, 400, 0);
        Rng rng(seed);
        for (Site x = -100; x <= 400; ++x) base.set(x, rng.bernoulli(2.0 / 3.0));
        auto perturbed = base;
        for (Site x = -100; x <= 0; ++x) perturbed.set(x, 1 - base.at(x));

        const auto log = build_event_log(spec, -100, 400, 10.0, seed);
        EventLog other = build_event_log(spec, -100, 400, 10.0, seed + 1000);
        for (Site x = 1; x <= 400; ++x) other.site(x) = log.site(x);

        EnvTrajectory a(base, 10.0);
        EnvTrajectory b(perturbed, 10.0);
        for (Site x = -100; x <= 400; ++x) {
            for (const auto& e : log.site(x).events) {
                if (a.window_state(x, e.time) != target_of(e.channel)) a.record_flip(x, e.time);
            }
            for (const auto& e : other.site(x).events) {
                if (b.window_state(x, e.time) != target_of(e.channel)) b.record_flip(x, e.time);
            }
        }
        const auto pa = run_envelope(Side::plus, a, 10.0);
        const auto pb = run_envelope(Side::plus, b, 10.0);
        CHECK(pa == pb);
    }
}

TEST_CASE("default cone slope is twice the faster envelope drift") {
    const auto spec = RateSpec::independent(1.0, 2.0);
    // rho+ = 2/3 and lambda+ = 3: drift 3 * (2/3) / (1/3) = 6.
    CHECK(envelope_drift(spec, Side::plus) == doctest::Approx(6.0));
    // rho- = 2/3 and lambda- = 3: drift -(c0 + lambda0) / rho- = -1.5.
    CHECK(envelope_drift(spec, Side::minus) == doctest::Approx(-1.5));
    CHECK(default_cone_slope(spec) == doctest::Approx(12.0));
}
