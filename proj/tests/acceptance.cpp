// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "experiment.hpp"
#include "oracles.hpp"
#include "rwdre/analysis.hpp"
#include "rwdre/contact.hpp"
#include "rwdre/coupling_rates.hpp"
#include "rwdre/dynamics.hpp"

using namespace rwdre;
using rwdre::cli::ExperimentConfig;
using rwdre::cli::Json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(RWDRE_SOURCE_DIR) / "configs";

struct Verdict {
    bool pass = false;
    std::string detail;
};

class Detail {
public:
    template <class T>
    Detail& operator<<(const T& v) {
        out_ << v;
        return *this;
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_{[] {
        std::ostringstream s;
        s << std::setprecision(4);
        return s;
    }()};
};

ExperimentConfig shipped(const std::string& name) { return cli::load_config((kConfigs / (name + ".json")).string()); }

SpeedConfig speed_config(const ExperimentConfig& c, std::uint64_t seed) {
    SpeedConfig s;
    s.setup = c.setup;
    s.horizon = c.horizon;
    s.replicas = c.replicas;
    s.seed = seed;
    s.threads = c.threads;
    s.regeneration = c.regeneration;
    return s;
}

// Speed estimates shared by criteria 1-3 and 12. The skeleton estimate runs
// on seeds independent of the direct one so the two errors add in quadrature.
struct SpeedPair {
    std::string name;
    RateSpec spec;
    SpeedEstimate direct;
    SpeedEstimate skeleton;
};

SpeedPair estimate_both(const std::string& name, std::size_t skeleton_replicas = 0, double skeleton_horizon = 0) {
    const auto c = shipped(name);
    SpeedPair p{name, c.setup.env, {}, {}};
    p.direct = estimate_speed(speed_config(c, c.seed), SpeedMethod::direct);
    auto sk = speed_config(c, derive_seed(c.seed, {0x5C}));
    if (skeleton_replicas) sk.replicas = skeleton_replicas;
    if (skeleton_horizon > 0) sk.horizon = skeleton_horizon;
    p.skeleton = estimate_speed(sk, SpeedMethod::skeleton);
    return p;
}

Verdict bound_verdict(const SpeedPair& p, double expected_bound) {
    const auto v = check_speed_bounds(p.spec, p.direct);
    Detail d;
    d << p.name << ": w=" << p.direct.w << " se=" << p.direct.std_error << " bound=" << v.bound;
    const bool right_bound = std::abs(v.bound - expected_bound) < 1e-12;
    if (!right_bound) d << " (expected " << expected_bound << ")";
    return {v.pass && right_bound && p.direct.overruns == 0, d.str()};
}

Verdict criterion_6() {
    using Q = boost::multiprecision::cpp_rational;
    const NumericRates<Q> r{Q(3, 2), Q(2, 3), Q(5, 4), Q(7, 5)};
    // Middle rates on both ends and inside [c_j, c_j + lambda_j].
    auto middle_rates = [&](TripleState s) {
        const bool particle = coordinates(s)[1] == 1;
        const Q base = particle ? r.c0 : r.c1;
        const Q span = particle ? r.l0 : r.l1;
        return std::vector<Q>{base, base + span * Q(1, 3), base + span * Q(1, 2), base + span};
    };
    auto single = [&](int coord, int value, const Q& a) -> Q {
        if (coord == 0) return value == 1 ? r.c0 + r.l0 : r.c1;
        if (coord == 2) return value == 1 ? r.c0 : r.c1 + r.l1;
        return a;
    };
    std::size_t checks = 0;
    std::size_t mismatches = 0;
    for (TripleState s : kTripleStates) {
        for (const Q& a : middle_rates(s)) {
            std::array<Q, 3> flip{};
            for (const auto& [to, rate] : triple_rates(s, r, a)) {
                for (int i = 0; i < 3; ++i) {
                    if (coordinates(to)[i] != coordinates(s)[i]) flip[i] += rate;
                }
            }
            for (int i = 0; i < 3; ++i, ++checks) mismatches += flip[i] != single(i, coordinates(s)[i], a);
        }
    }
    for (TripleState sa : kTripleStates) {
        for (TripleState sb : kTripleStates) {
            for (const Q& a : middle_rates(sa)) {
                for (const Q& b : middle_rates(sb)) {
                    std::array<std::array<Q, 4>, 2> joint{};
                    std::array<std::array<Q, 4>, 2> alone{};
                    for (const auto& [to, rate] : pair_rates(sa, sb, r, a, b)) {
                        if (to.first != sa) joint[0][static_cast<int>(to.first)] += rate;
                        if (to.second != sb) joint[1][static_cast<int>(to.second)] += rate;
                    }
                    for (const auto& [to, rate] : triple_rates(sa, r, a)) alone[0][static_cast<int>(to)] += rate;
                    for (const auto& [to, rate] : triple_rates(sb, r, b)) alone[1][static_cast<int>(to)] += rate;
                    for (int k = 0; k < 2; ++k) {
                        for (int j = 0; j < 4; ++j, ++checks) mismatches += joint[k][j] != alone[k][j];
                    }
                }
            }
        }
    }
    return {mismatches == 0, (Detail() << checks << " exact rational identities, " << mismatches << " mismatches").str()};
}

Verdict criterion_8() {
    const auto c = shipped("dependent-range1");
    const auto tally = verify_healthy_discrepancy(c.setup.env, 100, 5.0, 2.0, 1000, 0x8A);
    std::size_t oracle_checks = 0;
    std::size_t oracle_mismatches = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const bool walled = seed % 2 == 1;
        const double horizon = 1.0 + static_cast<double>(seed % 5);
        const auto log = build_event_log(c.setup.env, -4, 4, horizon, derive_seed(0x8B, {seed}));
        auto initial = SpinConfig::filled(-4, 4, 1);
        TcpOptions options;
        options.range = c.setup.env.range;
        if (walled) {
            initial.set(0, 0);
            initial.set(1, 0);
            options.wall_until = horizon / 2;
        }
        const auto traj = run_tcp(log, initial, options);
        testing::BacktrackOracle oracle(log, initial, options.range, options.wall_until, 0);
        std::vector<double> times{0.0, horizon};
        for (const auto& e : log.schedule()) times.push_back(e.time);
        for (double t : times) {
            for (Site x = -4; x <= 4; ++x, ++oracle_checks) {
                oracle_mismatches += traj.window_state(x, t) != static_cast<int>(oracle.infected(x, t));
            }
        }
    }
    Detail d;
    d << "201 sites x 1000 replicas: " << tally.plain.violations << "/" << tally.plain.checks << " plain, "
      << tally.conditioned.violations << "/" << tally.conditioned.checks << " conditioned; oracle "
      << oracle_mismatches << "/" << oracle_checks << " mismatches";
    return {tally.plain.pass() && tally.conditioned.pass() && oracle_mismatches == 0, d.str()};
}

Verdict criterion_9() {
    const auto c = shipped("dependent-range1");
    const auto tally = verify_healthy_discrepancy(c.setup.env, 100, 5.0, 2.0, 1000, 0x9A);
    ExtinctionParams params;
    params.window = 30;
    params.box = 2;
    params.horizon = 10.0;
    params.replicas = 1000;
    params.seed = 0x9B;
    const auto ext = extinction_stats(c.setup.env, params);
    Detail d;
    d << "walled above unwalled " << tally.domination.violations << "/" << tally.domination.checks
      << ", threshold outside linear " << ext.domination_violations << "/" << ext.times.size() << " replicas";
    return {tally.domination.pass() && ext.domination_violations == 0, d.str()};
}

Verdict mixing_h_checks(const std::vector<MixingReport>& reports) {
    bool pass = true;
    Detail d;
    for (const auto& report : reports) {
        for (const auto& row : report.rows) {
            if (row.L > 8) continue;
            pass = pass && row.stuck_violations == 0 && row.gamma_ci.first > 0 && row.kappa_ci.first > 0;
            d << "L=" << row.L << " gamma in [" << row.gamma_ci.first << "," << row.gamma_ci.second << "] kappa in ["
              << row.kappa_ci.first << "," << row.kappa_ci.second << "] stuck " << row.stuck_violations << "; ";
        }
    }
    return {pass, d.str()};
}

Verdict criterion_11() {
    RateSpec spec;
    spec.c0 = 1.0;
    spec.c1 = 2.0;
    spec.lambda1 = 0.5;
    spec.p1 = {1.0, 1.0};
    const double rho = spec.rho_plus();
    const double wait_rate = spec.lambda_plus() * rho;
    std::vector<double> waits;
    std::vector<double> jump_counts(40, 0.0);
    std::size_t jumps = 0;
    for (std::uint64_t i = 0; jumps < 10000; ++i) {
        const double horizon = 40.0;
        const GraphicalSource source(ChannelRates::from_spec(spec), derive_seed(0xB1, {i}));
        const LazyCoordinateEnv env(source, spec, Coordinate::upper, LazyInitial{rho, derive_seed(0xB2, {i}), true},
                                    horizon);
        const auto path = run_envelope(Side::plus, env, horizon);
        double last_time = 0.0;
        Site last_pos = path.start;
        for (std::size_t k = 0; k < path.jump_count() && jumps < 10000; ++k, ++jumps) {
            waits.push_back(path.jump_times[k] - last_time);
            const Site size = path.positions[k] - last_pos;
            jump_counts[static_cast<std::size_t>(std::min<Site>(size, 40)) - 1] += 1;
            last_time = path.jump_times[k];
            last_pos = path.positions[k];
        }
    }
    const auto ks = ks_test(waits, [&](double t) { return 1.0 - std::exp(-wait_rate * t); });
    std::vector<double> probs;
    double mass = 0.0;
    for (int k = 1; k < 40; ++k) {
        probs.push_back((1 - rho) * std::pow(rho, k - 1));
        mass += probs.back();
    }
    probs.push_back(1.0 - mass);
    const auto chi = chi_square_test(jump_counts, probs);
    Detail d;
    d << jumps << " increments; KS Exp(" << wait_rate << ") p=" << ks.p_value << "; chi2 Geom(" << 1 - rho
      << ") p=" << chi.p_value;
    return {ks.p_value > 0.01 && chi.p_value > 0.01, d.str()};
}

Verdict criterion_12(const std::vector<SpeedPair>& pairs) {
    bool pass = true;
    Detail d;
    for (const auto& p : pairs) {
        const double joint = std::hypot(p.direct.std_error, p.skeleton.std_error);
        const double diff = std::abs(p.direct.w - p.skeleton.w);
        pass = pass && diff <= 3 * joint;
        d << p.name << ": |" << p.direct.w << " - " << p.skeleton.w << "| = " << diff << " vs 3x" << joint << "; ";
    }
    const testing::ModulatedChain chain;
    const RegenerationParams params{1.0, 0.0, 10.0, ConeSpec{3.5, 1.0}};
    std::vector<RegenerationRecord> records;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const testing::CoinReplica replica(chain.sample(derive_seed(0xC1, {i}), 2000.0), derive_seed(0xC2, {i}), 0.4);
        records.push_back(build_regeneration_times(replica, params));
    }
    const auto est = skeleton_estimate(records);
    const bool chain_ok = std::abs(est.w - chain.exact_speed()) <= 3 * est.w_stderr;
    d << "chain: " << est.w << " vs exact " << chain.exact_speed() << " (se " << est.w_stderr << ")";
    return {pass && chain_ok, d.str()};
}

Verdict criterion_13() {
    LipschitzParams params;
    params.d0 = 1.0;
    params.d1 = 1.0;
    params.delta = 0.5;
    params.horizon = 50.0;
    params.replicas = 1000;
    params.seed = 0xD1;
    const auto report = lipschitz_coupling_experiment(params);
    const double bound = 0.5 * (1.0 - std::exp(-0.5 * 50.0));
    const bool gap_ok = report.gap.mean + 3 * report.gap.std_error >= bound;
    Detail d;
    d << report.ordering_violations << " ordering violations; gap " << report.gap.mean << " (se "
      << report.gap.std_error << ") vs " << bound;
    return {report.ordering_violations == 0 && gap_ok && report.pass, d.str()};
}

Verdict mixing_trend(const std::vector<std::pair<std::string, MixingReport>>& reports) {
    bool pass = true;
    Detail d;
    for (const auto& [name, report] : reports) {
        d << name << ":";
        for (const auto& row : report.rows) d << " " << row.ratio;
        d << "; ";
        pass = pass && report.strictly_decreasing;
    }
    return {pass, d.str()};
}

Verdict criterion_15() {
    std::size_t runs = 0;
    std::vector<std::string> mismatched;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        Json doc = Json::parse(in);
        doc["replicas"] = std::min<std::size_t>(doc["replicas"].get<std::size_t>(), 40);
        doc["horizon"] = std::min(doc["horizon"].get<double>(), 100.0);
        if (doc.contains("window")) doc.erase("window");
        std::string command = "estimate";
        if (doc.contains("mixing")) command = "mixing";
        if (doc.contains("verify")) {
            command = "verify";
            doc["verify"]["replicas"] = 20;
        }
        cli::RunOptions options;
        options.write = false;
        std::string first;
        for (unsigned threads : {1u, 3u}) {
            cli::Overrides o;
            o.threads = threads;
            const auto result = cli::run_experiment(command, cli::parse_config(doc, o), options);
            if (first.empty()) {
                first = result.summary_text;
            } else if (result.summary_text != first) {
                mismatched.push_back(entry.path().filename().string());
            }
        }
        ++runs;
    }
    Detail d;
    d << runs << " shipped configs run twice (1 and 3 threads), " << mismatched.size() << " differ";
    for (const auto& m : mismatched) d << " " << m;
    return {runs > 0 && mismatched.empty(), d.str()};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const std::string& title, const std::function<Verdict()>& body) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = body();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << std::setw(2) << id << " " << title << " ["
                  << std::fixed << std::setprecision(1) << secs << "s] " << v.detail << std::endl;
        std::cout.unsetf(std::ios::fixed);
    };

    std::vector<SpeedPair> pairs;
    report(1, "zero speed for symmetric flips", [&] {
        pairs.push_back(estimate_both("symmetric-zero-speed", 2000, 400.0));
        const auto& p = pairs.back();
        Detail d;
        d << p.direct.replicas << " replicas, h=" << p.direct.horizon << ": w=" << p.direct.w
          << " se=" << p.direct.std_error;
        return Verdict{std::abs(p.direct.w) <= 3 * p.direct.std_error && p.direct.overruns == 0, d.str()};
    });
    report(2, "speed lower bounds for independent flips", [&] {
        pairs.push_back(estimate_both("independent-1-2"));
        const auto a = bound_verdict(pairs.back(), 1.0 / 3.0);
        pairs.push_back(estimate_both("independent-1-3"));
        const auto b = bound_verdict(pairs.back(), 0.5);
        return Verdict{a.pass && b.pass, a.detail + "; " + b.detail};
    });
    report(3, "speed lower bound with dependent rates", [&] {
        pairs.push_back(estimate_both("dependent-range1"));
        return bound_verdict(pairs.back(), 3.0 / 14.0);
    });
    report(4, "monotonicity under shared noise", [&] {
        const auto c = shipped("dependent-range1");
        auto setup = c.setup;
        setup.window = {-150, 300};
        const auto t = verify_monotonicity(setup, 20.0, 1000, 0x4A);
        return Verdict{t.pass() && t.overruns == 0,
                       (Detail() << t.violations << " violations in " << t.checks << " checks, " << t.replicas
                                 << " replicas")
                           .str()};
    });
    report(5, "sandwich H- <= Z <= H+", [&] {
        const auto c = shipped("dependent-range1");
        auto setup = c.setup;
        setup.window = {-150, 300};
        const auto t = verify_sandwich(setup, 20.0, 1000, 0x5A);
        return Verdict{t.pass() && t.overruns == 0,
                       (Detail() << t.violations << " violations in " << t.checks << " checks, " << t.replicas
                                 << " replicas")
                           .str()};
    });
    report(6, "coupling marginals, exact enumeration", criterion_6);
    report(7, "triple order at every event", [&] {
        const auto c = shipped("dependent-range1");
        const auto t = verify_triple_order(c.setup.env, 100, 5.0, 1000, 0x7A);
        return Verdict{t.pass(), (Detail() << t.violations << " violations in " << t.checks << " checks").str()};
    });
    report(8, "healthy sites carry no discrepancy", criterion_8);
    report(9, "contact process dominations", criterion_9);

    std::vector<std::pair<std::string, MixingReport>> mixing;
    for (const std::string name : {"mixing-independent", "mixing-range1"}) {
        const auto c = shipped(name);
        mixing.emplace_back(name, mixing_decay_experiment(c.setup.env, c.mixing));
    }
    report(10, "freezing event: walk stuck, gamma and kappa positive", [&] {
        return mixing_h_checks({mixing[0].second, mixing[1].second});
    });
    report(11, "H+ increments at equilibrium", criterion_11);
    report(12, "skeleton agrees with direct and with an exact chain", [&] { return criterion_12(pairs); });
    report(13, "Lipschitz three-walk coupling", criterion_13);
    report(14, "mixing ratio strictly decreasing", [&] { return mixing_trend(mixing); });
    report(15, "determinism of shipped configs", criterion_15);

    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
