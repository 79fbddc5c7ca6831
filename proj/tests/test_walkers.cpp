#include <doctest.h>

#include <cmath>
#include <memory>

#include "rwdre/dynamics.hpp"
#include "rwdre/random.hpp"
#include "rwdre/walk.hpp"

using namespace rwdre;

namespace {

SpinConfig config_from(Site lo, std::vector<std::uint8_t> states) {
    const Site hi = lo + static_cast<Site>(states.size()) - 1;
    return SpinConfig(lo, hi, std::move(states));
}

// Sites -3..8 hold 0 1 1 1 0 1 1 0 1 0 0 0: traps at 0, 3 and 5.
EnvTrajectory hand_built() {
    EnvTrajectory env(config_from(-3, {0, 1, 1, 1, 0, 1, 1, 0, 1, 0, 0, 0}), 5.0);
    env.record_flip(1, 0.5);  // 0 -> 1, trap at 0 becomes (1,1)
    env.record_flip(4, 1.2);  // 0 -> 1, trap at 3 becomes (1,1)
    env.record_flip(5, 2.7);  // 1 -> 0, trap at 5 becomes (0,0)
    return env;
}

struct LazyWorld {
    RateSpec spec;
    GraphicalSource source;
    LazyCoordinateEnv env;

    LazyWorld(double d0, double d1, std::uint64_t seed, bool trap, double horizon)
        : spec(RateSpec::independent(d0, d1)),
          source(ChannelRates::from_spec(spec), seed),
          env(source, spec, Coordinate::middle, LazyInitial{d1 / (d0 + d1), derive_seed(seed, {7}), trap},
              horizon) {}
};

ModelSpec model_of(auto kind) { return ModelSpec{kind}; }

// Independent replay: at each flip of the walker's trap sites, take a
// snapshot of the whole window and apply the jump functional to it.
WalkPath snapshot_replay(const EnvTrajectory& env, const NoiseStream& noise, double horizon) {
    WalkPath path;
    path.horizon = horizon;
    const bool b0 = noise.fair_bit(noise.entry_uniform(0));
    Site x = *jump_functional(env.snapshot(0.0), b0);
    path.start = x;
    std::int64_t interval = -1;
    std::int64_t k = 0;
    for (const Flip& f : env.flips()) {
        if (f.time > horizon) break;
        if (f.site != x && f.site != x + 1) continue;
        const auto n = static_cast<std::int64_t>(std::ceil(f.time));
        k = n == interval ? k + 1 : 1;
        interval = n;
        const bool b = noise.fair_bit(noise.jump_uniform(n, k));
        x += *jump_functional(env.snapshot(f.time), b, x);
        path.push(f.time, x);
    }
    return path;
}

}  // namespace

TEST_CASE("jump functional on the four local states") {
    const SpinConfig trap = config_from(-2, {0, 1, 1, 0, 1, 0});
    CHECK(jump_functional(trap, false) == 0);
    CHECK(jump_functional(trap, true) == 0);

    // origin holds (0,1): b picks the direction
    const SpinConfig mixed = config_from(-3, {1, 0, 0, 0, 1, 1, 0});
    CHECK(jump_functional(mixed, true) == tr_scan(mixed, Direction::right));
    CHECK(jump_functional(mixed, true) == 2);
    CHECK(jump_functional(mixed, false) == -3);

    // (...,0,0 | 1,1,0,...) with the origin on the first 1
    const SpinConfig ones = config_from(-2, {0, 0, 1, 1, 0});
    CHECK(jump_functional(ones, false) == 1);

    const SpinConfig all_ones = SpinConfig::filled(-5, 5, 1);
    CHECK_FALSE(jump_functional(all_ones, true).has_value());
}

TEST_CASE("trap walk on a frozen environment never moves") {
    EnvTrajectory env(config_from(-2, {1, 0, 1, 0, 1}), 10.0);
    const WalkPath w = run_infty_zero(env, NoiseStream(3), 10.0);
    CHECK(w.start == 0);
    CHECK(w.jump_count() == 0);
    CHECK(w.at(10.0) == 0);
}

TEST_CASE("trap walk follows the hand replay") {
    const EnvTrajectory env = hand_built();
    const WalkPath w = run_infty_zero(env, NoiseStream(11), 5.0);
    CHECK(w.start == 0);
    REQUIRE(w.jump_count() == 3);
    CHECK(w.jump_times == std::vector<double>{0.5, 1.2, 2.7});
    CHECK(w.positions == std::vector<Site>{3, 5, 4});
    CHECK(w.at(0.49) == 0);
    CHECK(w.at(0.5) == 3);
    CHECK(w.left_limit(0.5) == 0);
    CHECK(w.at(4.0) == 4);
}

TEST_CASE("a hole filling to the right of the trap moves the walk right") {
    EnvTrajectory env(config_from(-1, {1, 1, 0, 1, 1, 1, 0, 0}), 3.0);
    env.record_flip(1, 1.5);
    const WalkPath w = run_infty_zero(env, NoiseStream(5), 3.0);
    REQUIRE(w.jump_count() == 1);
    CHECK(w.jump_times[0] == 1.5);
    CHECK(w.positions[0] == 4);
}

TEST_CASE("trap walk agrees with a snapshot replay on simulated environments") {
    const RateSpec spec = RateSpec::independent(1.0, 1.3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SpinConfig init = sample_initial(InitialLaw::default_for(spec, false), spec, -150, 150,
                                         BoundaryKind::frozen_resample, seed);
        EnvTrajectory env = simulate_env(spec, init, 15.0, derive_seed(seed, {1}));
        const NoiseStream noise(derive_seed(seed, {2}));
        const WalkPath direct = run_infty_zero(env, noise, 15.0);
        CHECK(direct == snapshot_replay(env, noise, 15.0));
    }
}

TEST_CASE("the trap model as a pattern model gives the same path") {
    const ModelSpec pattern = model_of(infty_zero_pattern());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        LazyWorld world(1.0, 1.0, seed, seed % 2 == 0, 60.0);
        const NoiseStream noise(seed + 1000);
        const WalkPath a = run_infty_zero(world.env, noise, 60.0);
        const WalkPath b = run_generalized(world.env, pattern, noise, 60.0);
        CHECK(a == b);
        CHECK(a == run_generalized(world.env, model_of(InftyZero{}), noise, 60.0));
    }
}

TEST_CASE("structural assumptions hold for the trap walk") {
    const ModelSpec model = model_of(InftyZero{});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LazyWorld world(1.0, 1.5, seed, true, 30.0);
        const NoiseStream noise(seed + 77);
        const WalkPath w = run_infty_zero(world.env, noise, 30.0);
        CHECK(w.start == 0);
        for (std::int64_t n : {1, 7, 19}) {
            const StructuralReport r = check_structural_assumptions(w, world.env, noise, model, n, 4.0, 1.0);
            CHECK_MESSAGE(r.ok(), r.detail);
        }
    }
}

TEST_CASE("structural assumptions hold for a mixture across selector switches") {
    auto first = std::make_shared<ModelSpec>(ModelSpec{AlphaBeta{2.0, 1.0}});
    auto second = std::make_shared<ModelSpec>(ModelSpec{InftyZero{}});
    const ModelSpec mix{Mixture{first, second, 0.5}};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        LazyWorld world(1.0, 1.0, seed, true, 20.0);
        const NoiseStream noise(seed + 5);
        const WalkPath w = run_generalized(world.env, mix, noise, 20.0);
        for (std::int64_t n = 1; n < 20; n += 3) {
            const StructuralReport r = check_structural_assumptions(w, world.env, noise, mix, n, 6.0, 1.0);
            CHECK_MESSAGE(r.ok(), r.detail);
        }
    }
}

TEST_CASE("degenerate mixtures and silent internal noise") {
    LazyWorld world(1.0, 2.0, 9, true, 25.0);
    const NoiseStream noise(4);

    InternalNoise silent;
    silent.radius = 0;
    silent.offsets = {1, -1};
    silent.rates = {{0.0, 0.0}, {0.0, 0.0}};
    const WalkPath still = run_generalized(world.env, model_of(silent), noise, 25.0);
    CHECK(still.jump_count() == 0);
    CHECK(still.start == 0);

    auto first = std::make_shared<ModelSpec>(ModelSpec{AlphaBeta{3.0, 1.0}});
    auto second = std::make_shared<ModelSpec>(ModelSpec{InftyZero{}});
    const ModelSpec always_second{Mixture{first, second, 1.0}};
    CHECK(run_generalized(world.env, always_second, noise, 25.0) == run_infty_zero(world.env, noise, 25.0));

    const ModelSpec always_first{Mixture{first, second, 0.0}};
    CHECK(run_generalized(world.env, always_first, noise, 25.0) ==
          run_alpha_beta(world.env, 3.0, 1.0, noise, 25.0));
}

TEST_CASE("alpha-beta walk on an all-particle environment") {
    EnvTrajectory env(SpinConfig::filled(-2000, 2000, 1), 100.0);
    const double alpha = 2.0;
    const double beta = 0.5;
    double displacement = 0.0;
    double jumps = 0.0;
    const int replicas = 400;
    for (int i = 0; i < replicas; ++i) {
        const WalkPath w = run_alpha_beta(env, alpha, beta, NoiseStream(derive_seed(42, {static_cast<std::uint64_t>(i)})),
                                          100.0);
        displacement += static_cast<double>(w.final_position());
        jumps += static_cast<double>(w.jump_count());
    }
    // Mean drift alpha - beta; jump count Poisson((alpha + beta) t).
    const double mean_disp = displacement / replicas / 100.0;
    const double disp_se = std::sqrt((alpha + beta) / 100.0 / replicas);
    CHECK(std::abs(mean_disp - (alpha - beta)) < 4 * disp_se);
    const double mean_jumps = jumps / replicas;
    CHECK(std::abs(mean_jumps - 250.0) < 4 * std::sqrt(250.0 / replicas));
}

TEST_CASE("symmetric alpha-beta has no drift") {
    LazyWorld world(1.0, 1.0, 3, false, 50.0);
    double total = 0.0;
    double sq = 0.0;
    const int replicas = 300;
    for (int i = 0; i < replicas; ++i) {
        LazyWorld w(1.0, 1.0, derive_seed(3, {static_cast<std::uint64_t>(i)}), false, 50.0);
        const double x = static_cast<double>(run_alpha_beta(w.env, 1.0, 1.0, NoiseStream(i), 50.0).final_position());
        total += x;
        sq += x * x;
    }
    const double mean = total / replicas;
    const double se = std::sqrt((sq / replicas - mean * mean) / replicas);
    CHECK(std::abs(mean) < 4 * se);
}

TEST_CASE("walks on ordered environments stay ordered") {
    const RateSpec spec = RateSpec::independent(1.0, 1.0);
    int pairs = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GraphicalSource source(ChannelRates{{1.0, 1.0, 0.5, 0.5}}, seed);
        RateSpec coupled = spec;
        coupled.lambda0 = coupled.lambda1 = 0.5;
        const LazyInitial init{0.5, seed + 9, true};
        LazyCoordinateEnv lower(source, coupled, Coordinate::lower, init, 40.0);
        LazyCoordinateEnv upper(source, coupled, Coordinate::upper, init, 40.0);
        const auto [a, b] = monotone_pair(lower, upper, NoiseStream(seed), 40.0);
        CHECK_FALSE(first_order_violation(a, b).has_value());
        ++pairs;
    }
    CHECK(pairs == 100);
}

TEST_CASE("one extra particle right of both walks keeps the order") {
    EnvTrajectory base = hand_built();
    SpinConfig more = base.initial();
    more.set(6, 1);
    EnvTrajectory upper(more, 5.0);
    for (const Flip& f : base.flips()) upper.record_flip(f.site, f.time);
    const NoiseStream noise(1);
    const auto [a, b] = monotone_pair(base, upper, noise, 5.0);
    CHECK(b.final_position() >= a.final_position());
    CHECK(monotone_pair(base, base, noise, 5.0).first == monotone_pair(base, base, noise, 5.0).second);
}

TEST_CASE("noise stream is a pure function of its indices") {
    const NoiseStream a(99);
    const NoiseStream b(99);
    CHECK(a.jump_uniform(4, 2) == b.jump_uniform(4, 2));
    CHECK(a.jump_uniform(4, 2) != a.jump_uniform(4, 3));
    std::vector<ClockEvent> ev;
    a.clock_events(NoiseChannel::clock, 3, 5.0, ev);
    for (const auto& e : ev) {
        CHECK(e.time >= 2.0);
        CHECK(e.time < 3.0);
    }
    const auto first = a.next_clock_event(NoiseChannel::clock, 5.0, 2.0, 10.0);
    REQUIRE(first.has_value());
    if (!ev.empty()) CHECK(first->time == ev.front().time);
}

TEST_CASE("model validation") {
    const ModelSpec equal_rates = model_of(AlphaBeta{1.0, 1.0});
    const ModelSpec biased = model_of(AlphaBeta{2.0, 1.0});
    const ModelSpec short_table = model_of(PatternModel{{1, 0}, {0.5, 0.5}});
    const ModelSpec trap_pattern = model_of(infty_zero_pattern());
    CHECK_THROWS_AS(equal_rates.validate(), ConfigError);
    CHECK_NOTHROW(biased.validate());
    CHECK_THROWS_AS(short_table.validate(), ConfigError);
    CHECK_NOTHROW(trap_pattern.validate());
}
