#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rwdre/contact.hpp"
#include "rwdre/random.hpp"

namespace rwdre::cli {

namespace fs = std::filesystem;

namespace {

class Csv {
public:
    Csv(const fs::path& path, const std::string& header) : out_(path) {
        if (!out_) throw Error("cannot write " + path.string());
        out_ << header << '\n';
    }

    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((out_ << (first ? "" : ","), put(values), first = false), ...);
        out_ << '\n';
    }

private:
    template <class T>
    void put(const T& value) {
        if constexpr (std::is_floating_point_v<T>) {
            // Shortest text that reads back to the same double.
            char buf[32];
            const auto end = std::to_chars(buf, buf + sizeof buf, value).ptr;
            out_.write(buf, end - buf);
        } else {
            out_ << value;
        }
    }

    std::ofstream out_;
};

Json mean_json(const MeanStat& m) { return Json{{"mean", m.mean}, {"stderr", m.std_error}, {"n", m.n}}; }

Json tally_json(const PropertyTally& t) {
    Json j{{"pass", t.pass()}, {"replicas", t.replicas}, {"checks", t.checks}, {"violations", t.violations},
           {"overruns", t.overruns}};
    if (t.first_replica) j["first_violating_replica"] = *t.first_replica;
    return j;
}

double overrun_rate(std::size_t overruns, std::size_t replicas) {
    return replicas ? static_cast<double>(overruns) / static_cast<double>(replicas) : 0.0;
}

std::string backend_name(Backend b) { return b == Backend::lazy ? "lazy" : "window"; }

struct Artifacts {
    fs::path dir;
    bool write;
    std::vector<std::string> files;

    fs::path file(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

int run_simulate(const ExperimentConfig& c, const RunOptions& options, Json& summary, Artifacts& out) {
    const std::uint64_t seed = replica_seed(c.seed, options.replica);
    const ReplicaRun run = run_replica(c.setup, c.horizon, seed);
    summary["replica"] = options.replica;
    summary["replica_seed"] = seed;
    summary["overrun"] = run.overrun;
    if (!run.overrun) {
        summary["start_position"] = run.path.start;
        summary["final_position"] = run.path.final_position();
        summary["jumps"] = run.path.jump_count();
        summary["velocity"] = static_cast<double>(run.path.final_position()) / c.horizon;
        if (out.write && c.write_paths) {
            Csv csv(out.file("path.csv"), "jump_time,position");
            csv.row(run.path.start_time, run.path.start);
            for (std::size_t k = 0; k < run.path.jump_count(); ++k) csv.row(run.path.jump_times[k], run.path.positions[k]);
        }
    }
    return run.overrun ? kOverrunFailure : kPass;
}

Json estimate_json(const SpeedEstimate& e) {
    Json j{{"method", to_string(e.method)},
           {"w_hat", e.w},
           {"stderr", e.std_error},
           {"replicas", e.replicas},
           {"used", e.used},
           {"overruns", e.overruns},
           {"overrun_rate", e.overrun_rate()},
           {"horizon", e.horizon},
           {"backend", backend_name(e.backend)}};
    if (e.skeleton) {
        const auto& s = *e.skeleton;
        j["skeleton"] = Json{{"v", s.v},
                             {"u", s.u},
                             {"v_stderr", s.v_stderr},
                             {"u_stderr", s.u_stderr},
                             {"increments", s.increments},
                             {"contributing_replicas", s.contributing_replicas},
                             {"replicas_without_increments", s.replicas_without_increments},
                             {"censored_increments", s.censored_increments},
                             {"censored_mean_displacement", s.censored_mean_displacement},
                             {"censored_mean_duration", s.censored_mean_duration}};
    }
    return j;
}

int run_estimate(const ExperimentConfig& c, Json& summary, Artifacts& out) {
    SpeedConfig sc;
    sc.setup = c.setup;
    sc.horizon = c.horizon;
    sc.replicas = c.replicas;
    sc.seed = c.seed;
    sc.threads = c.threads;
    sc.regeneration = c.regeneration;

    int code = kPass;
    bool overrun = false;
    std::vector<SpeedEstimate> estimates;
    for (SpeedMethod m : c.methods) {
        SpeedEstimate e = estimate_speed(sc, m);
        Json j = estimate_json(e);
        if (e.skeleton && e.records.size() >= 2) {
            j["exchangeability_p_value"] = exchangeability_p_value(e.records, 199, derive_seed(c.seed, {0xEC}));
        }
        if (std::holds_alternative<InftyZero>(c.setup.model.kind)) {
            const SpeedBoundVerdict v = check_speed_bounds(c.setup.env, e);
            j["speed_bound"] = Json{{"kind", to_string(v.kind)}, {"bound", v.bound}, {"pass", v.pass}, {"detail", v.detail}};
            if (!v.pass) code = kAcceptanceFailure;
        }
        overrun = overrun || e.overrun_rate() > c.overrun_threshold;
        summary["estimates"][to_string(m)] = j;
        estimates.push_back(std::move(e));
    }
    if (estimates.size() == 2) {
        const double diff = estimates[0].w - estimates[1].w;
        const double joint = std::hypot(estimates[0].std_error, estimates[1].std_error);
        const bool agree = std::abs(diff) <= 3.0 * joint;
        summary["agreement"] = Json{{"difference", diff}, {"joint_stderr", joint}, {"pass", agree}};
        if (!agree) code = kAcceptanceFailure;
    }

    if (out.write) {
        Csv replicas(out.file("replicas.csv"), "replica_id,seed,W_horizon,overrun");
        const auto& first = estimates.front();
        for (std::size_t i = 0; i < first.finals.size(); ++i) {
            if (first.finals[i]) {
                replicas.row(i, first.seeds[i], *first.finals[i], 0);
            } else {
                replicas.row(i, first.seeds[i], "", 1);
            }
        }
        for (const auto& e : estimates) {
            if (!e.skeleton) continue;
            Csv regen(out.file("regenerations.csv"), "replica_id,k,tau_k,Z_tau_k,censored");
            std::size_t r = 0;
            for (std::size_t i = 0; i < e.finals.size(); ++i) {
                if (!e.finals[i]) continue;
                const auto& points = e.records[r++].points;
                for (std::size_t k = 0; k < points.size(); ++k) {
                    regen.row(i, k + 1, points[k].tau, points[k].z, points[k].censored ? 1 : 0);
                }
            }
        }
    }
    if (overrun) return kOverrunFailure;
    return code;
}

int run_verify(const ExperimentConfig& c, Json& summary) {
    const auto& v = c.verify;
    std::vector<std::string> suites = v.suites;
    if (suites.empty()) suites = verify_suites();
    const bool trap_walk = std::holds_alternative<InftyZero>(c.setup.model.kind);

    bool pass = true;
    bool overrun = false;
    auto record = [&](const std::string& name, Json j) {
        pass = pass && j.value("pass", true);
        summary["suites"][name] = std::move(j);
    };
    auto check_overruns = [&](const PropertyTally& t) {
        overrun = overrun || overrun_rate(t.overruns, t.replicas) > c.overrun_threshold;
    };
    const auto& known = verify_suites();
    for (const auto& name : suites) {
        const auto index = static_cast<std::uint64_t>(std::find(known.begin(), known.end(), name) - known.begin());
        const std::uint64_t seed = derive_seed(c.seed, {0x5E, index});
        if (name == "sandwich") {
            const auto t = verify_sandwich(c.setup, v.horizon, v.replicas, seed, c.threads);
            check_overruns(t);
            record(name, tally_json(t));
        } else if (name == "monotonicity") {
            const auto t = verify_monotonicity(c.setup, v.horizon, v.replicas, seed, c.threads);
            check_overruns(t);
            record(name, tally_json(t));
        } else if (name == "triple_order") {
            record(name, tally_json(verify_triple_order(c.setup.env, v.half_width, v.horizon, v.replicas, seed, c.threads)));
        } else if (name == "healthy_discrepancy") {
            const auto t = verify_healthy_discrepancy(c.setup.env, v.half_width, v.horizon, v.depth, v.replicas, seed,
                                                      c.threads);
            Json j{{"plain", tally_json(t.plain)},
                   {"conditioned", tally_json(t.conditioned)},
                   {"walled_domination", tally_json(t.domination)}};
            j["pass"] = t.plain.pass() && t.conditioned.pass() && t.domination.pass();
            record(name, j);
        } else if (name == "tcp_lcp") {
            ExtinctionParams p;
            p.window = v.half_width;
            p.horizon = v.horizon;
            p.replicas = v.replicas;
            p.seed = seed;
            const auto r = extinction_stats(c.setup.env, p);
            std::size_t censored = 0;
            for (bool b : r.censored) censored += b ? 1 : 0;
            record(name, Json{{"pass", r.domination_violations == 0},
                              {"domination_violations", r.domination_violations},
                              {"censored", censored},
                              {"tail_threshold", r.threshold},
                              {"tail_slope", r.tail_slope},
                              {"tail_slope_ci", {r.tail_slope_lo, r.tail_slope_hi}}});
        } else if (name == "lipschitz") {
            if (!c.setup.env.independent_flips()) {
                summary["suites"][name] = Json{{"skipped", "needs independent flips"}};
                continue;
            }
            LipschitzParams p;
            p.d0 = c.setup.env.c0;
            p.d1 = c.setup.env.c1;
            p.delta = v.lipschitz_delta;
            p.horizon = v.horizon;
            p.replicas = std::max<std::size_t>(v.replicas, 2);
            p.seed = seed;
            p.threads = c.threads;
            const auto r = lipschitz_coupling_experiment(p);
            Json bounds = Json::array();
            for (const auto& b : r.bounds) bounds.push_back(Json{{"steps", b.steps}, {"bound", b.value}, {"pass", b.pass}});
            record(name, Json{{"pass", r.pass},
                              {"ordering_violations", r.ordering_violations},
                              {"extra_events_used", r.extra_events_used},
                              {"gap", mean_json(r.gap)},
                              {"single_event_gap", mean_json(r.gap_single)},
                              {"bounds", bounds}});
        } else if (name == "moments") {
            MomentParams p;
            p.times = v.moment_times;
            p.powers = v.moment_powers;
            p.replicas = v.replicas;
            p.seed = seed;
            p.threads = c.threads;
            const auto r = ui_moments(c.setup, p);
            Json series = Json::array();
            bool ok = true;
            for (const auto& s : r.series) {
                Json rows = Json::array();
                for (const auto& row : s.rows) {
                    rows.push_back(Json{{"t", row.t}, {"moment", mean_json(row.moment)}, {"envelope_bound", row.envelope_bound}});
                }
                series.push_back(Json{{"p", s.p},
                                      {"rows", rows},
                                      {"slope", s.trend.slope},
                                      {"slope_ci", {s.trend.slope_lo, s.trend.slope_hi}},
                                      {"no_growth", s.no_growth},
                                      {"within_envelope", s.within_envelope}});
                ok = ok && s.no_growth && (!trap_walk || s.within_envelope);
            }
            overrun = overrun || overrun_rate(r.overruns, r.replicas) > c.overrun_threshold;
            record(name, Json{{"pass", ok}, {"overruns", r.overruns}, {"series", series}});
        } else if (name == "speed_bounds") {
            if (!trap_walk) {
                summary["suites"][name] = Json{{"skipped", "bounds apply to the infty_zero model"}};
                continue;
            }
            SpeedConfig sc;
            sc.setup = c.setup;
            sc.horizon = c.horizon;
            sc.replicas = c.replicas;
            sc.seed = seed;
            sc.threads = c.threads;
            const auto e = estimate_speed(sc, SpeedMethod::direct);
            const auto b = check_speed_bounds(c.setup.env, e);
            overrun = overrun || e.overrun_rate() > c.overrun_threshold;
            record(name, Json{{"pass", b.pass},
                              {"w_hat", e.w},
                              {"stderr", e.std_error},
                              {"kind", to_string(b.kind)},
                              {"bound", b.bound},
                              {"detail", b.detail}});
        }
    }
    summary["pass"] = pass;
    if (overrun) return kOverrunFailure;
    return pass ? kPass : kAcceptanceFailure;
}

int run_mixing(const ExperimentConfig& c, Json& summary, Artifacts& out) {
    const MixingReport r = mixing_decay_experiment(c.setup.env, c.mixing);
    Json rows = Json::array();
    std::size_t stuck = 0;
    for (const auto& row : r.rows) {
        stuck += row.stuck_violations;
        rows.push_back(Json{{"L", row.L},
                            {"phi", row.phi},
                            {"phi_ci", {row.phi_ci.first, row.phi_ci.second}},
                            {"kappa", row.kappa},
                            {"kappa_ci", {row.kappa_ci.first, row.kappa_ci.second}},
                            {"gamma", row.gamma},
                            {"gamma_ci", {row.gamma_ci.first, row.gamma_ci.second}},
                            {"gamma_exact", row.gamma_exact},
                            {"ratio", std::isfinite(row.ratio) ? Json(row.ratio) : Json(nullptr)},
                            {"stuck_violations", row.stuck_violations}});
    }
    summary["rows"] = rows;
    summary["cone_slope"] = r.cone_slope;
    summary["half_width"] = r.half_width;
    summary["strictly_decreasing"] = r.strictly_decreasing;
    summary["pass"] = r.strictly_decreasing && stuck == 0;
    if (out.write) {
        Csv csv(out.file("mixing.csv"),
                "L,phi,phi_lo,phi_hi,kappa,kappa_lo,kappa_hi,gamma,gamma_lo,gamma_hi,gamma_exact,ratio,stuck_violations");
        for (const auto& row : r.rows) {
            csv.row(row.L, row.phi, row.phi_ci.first, row.phi_ci.second, row.kappa, row.kappa_ci.first,
                    row.kappa_ci.second, row.gamma, row.gamma_ci.first, row.gamma_ci.second, row.gamma_exact,
                    row.ratio, row.stuck_violations);
        }
    }
    return summary["pass"].get<bool>() ? kPass : kAcceptanceFailure;
}

Json replica_seeds(const std::string& command, const ExperimentConfig& c, const RunOptions& options) {
    Json seeds = Json::array();
    if (command == "simulate") {
        seeds.push_back(replica_seed(c.seed, options.replica));
    } else if (command == "mixing") {
        for (std::size_t j = 0; j < c.mixing.depths.size(); ++j) {
            Json row = Json::array();
            for (std::size_t i = 0; i < c.replicas; ++i) row.push_back(derive_seed(c.seed, {j, i}));
            seeds.push_back(row);
        }
    } else {
        for (std::size_t i = 0; i < c.replicas; ++i) seeds.push_back(replica_seed(c.seed, i));
    }
    return seeds;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

}  // namespace

RunResult run_experiment(const std::string& command, const ExperimentConfig& config, const RunOptions& options) {
    Artifacts out{config.out_dir, options.write, {}};
    if (out.write) fs::create_directories(out.dir);

    Json summary;
    summary["command"] = command;
    summary["name"] = config.name;
    summary["config_hash"] = config_hash(config.document);
    summary["seed"] = config.seed;
    summary["replicas"] = config.replicas;
    summary["horizon"] = config.horizon;
    summary["model"] = config.setup.model.name();
    summary["backend"] = backend_name(config.setup.backend());

    RunResult result;
    if (command == "simulate") {
        result.exit_code = run_simulate(config, options, summary, out);
    } else if (command == "estimate") {
        result.exit_code = run_estimate(config, summary, out);
    } else if (command == "verify") {
        result.exit_code = run_verify(config, summary);
    } else if (command == "mixing") {
        result.exit_code = run_mixing(config, summary, out);
    } else {
        throw ConfigError("command", "unknown command " + command);
    }
    summary["exit_code"] = result.exit_code;

    result.summary_text = summary.dump(2) + "\n";
    result.summary_hash = hex64(fnv1a(result.summary_text));
    result.summary = std::move(summary);
    if (out.write) {
        write_text(out.file("summary.json"), result.summary_text);
        Json manifest{{"schema_version", kSchemaVersion},
                      {"command", command},
                      {"config", config.document},
                      {"config_hash", config_hash(config.document)},
                      {"seed", config.seed},
                      {"replica", options.replica},
                      {"replica_seeds", replica_seeds(command, config, options)},
                      {"summary_hash", result.summary_hash},
                      {"files", out.files}};
        write_text(out.dir / "manifest.json", manifest.dump(2) + "\n");
    }
    return result;
}

int replay(const std::string& manifest_path, const std::optional<std::string>& out_dir) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("", "cannot open manifest " + manifest_path);
    Json manifest;
    try {
        manifest = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", "malformed manifest: " + std::string(e.what()));
    }
    for (const char* key : {"command", "config", "summary_hash"}) {
        if (!manifest.contains(key)) throw ConfigError(key, "missing from manifest");
    }
    Overrides overrides;
    overrides.out = out_dir.value_or((fs::path(manifest_path).parent_path() / "replay").string());
    const ExperimentConfig config = parse_config(manifest.at("config"), overrides);
    RunOptions options;
    options.replica = manifest.value("replica", std::size_t{0});
    const RunResult result = run_experiment(manifest.at("command").get<std::string>(), config, options);
    const std::string expected = manifest.at("summary_hash").get<std::string>();
    const bool same = result.summary_hash == expected;
    std::cout << "replay " << (same ? "matches" : "differs") << ": summary hash " << result.summary_hash
              << (same ? " == " : " != ") << expected << '\n';
    return same ? kPass : kAcceptanceFailure;
}

}  // namespace rwdre::cli
