#include "rwdre/regeneration.hpp"

#include <cmath>

#include "rwdre/dynamics.hpp"
#include "rwdre/stats.hpp"

namespace rwdre {

namespace {

bool motif_frozen(const PatternModel& pattern, const GammaData& data, double T, Site z, double L) {
    for (std::size_t j = 0; j < pattern.motif.size(); ++j) {
        const Site x = z + static_cast<Site>(j);
        const int held = pattern.motif[j];
        if (data.events) {
            if (data.events->any_event(x, T, T + L, channels_leaving(held))) return false;
            continue;
        }
        const Environment* env = held == 1 ? data.lower : data.upper;
        if (!env) throw Error("freezing event needs an event source or the coupled envelopes");
        if (env->state(x, T) != held || env->next_flip(x, T) <= T + L) return false;
    }
    return true;
}

bool clock_silent(const GammaData& data, NoiseChannel channel, double rate, double T, double L) {
    if (!data.noise) throw Error("freezing event of a clock-driven walk needs its noise stream");
    return !data.noise->next_clock_event(channel, rate, T, T + L);
}

}  // namespace

bool gamma_indicator(const ModelSpec& model, const GammaData& data, double T, Site z, double L) {
    return std::visit(
        [&](const auto& m) -> bool {
            using K = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<K, InftyZero>) {
                return motif_frozen(infty_zero_pattern(), data, T, z, L);
            } else if constexpr (std::is_same_v<K, PatternModel>) {
                return motif_frozen(m, data, T, z, L);
            } else if constexpr (std::is_same_v<K, PatternExtraJumps>) {
                return motif_frozen(m.pattern, data, T, z, L) &&
                       clock_silent(data, NoiseChannel::extra, m.rate, T, L);
            } else if constexpr (std::is_same_v<K, AlphaBeta>) {
                return clock_silent(data, NoiseChannel::clock, m.alpha + m.beta, T, L);
            } else if constexpr (std::is_same_v<K, InternalNoise>) {
                return clock_silent(data, NoiseChannel::clock, m.clock_rate(), T, L);
            } else {
                if (!data.noise) throw Error("freezing event of a mixture needs its noise stream");
                const auto first = static_cast<std::int64_t>(std::floor(T)) + 1;
                const auto last = static_cast<std::int64_t>(std::ceil(T + L));
                for (auto n = first; n <= last; ++n) {
                    if (!data.noise->mixture_choice(n, m.p)) return false;
                }
                return gamma_indicator(*m.second, data, T, z, L);
            }
        },
        model.kind);
}

double curly_T(double L, bool gamma, std::optional<double> exit_after_L) {
    if (!gamma) return L;
    if (!exit_after_L) return kNever;
    return L + std::ceil(*exit_after_L);
}

void RegenerationParams::validate() const {
    if (!(L > 0.0) || L != std::floor(L)) throw ConfigError("regeneration.L", "must be a positive integer");
    if (t0 < 0.0 || t0 != std::floor(t0)) throw ConfigError("regeneration.t0", "must be a non-negative integer");
    if (lookahead < 0.0) throw ConfigError("regeneration.lookahead", "must be >= 0");
    cone.validate();
}

std::size_t RegenerationRecord::regenerations() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.censored ? 0 : 1;
    return n;
}

RegenerationRecord build_regeneration_times(const ReplicaView& replica, const RegenerationParams& params) {
    params.validate();
    const WalkPath& path = replica.path();
    const double horizon = path.horizon;
    const double L = params.L;
    const double lookahead = params.window();

    RegenerationRecord record;
    record.params = params;
    int failures = 0;
    double T = path.start_time + params.first_offset();
    while (T + L + lookahead <= horizon) {
        ProbeOutcome probe;
        probe.T = T;
        const Site z = path.at(T);
        probe.gamma = replica.gamma(T, z, L);
        std::optional<double> exit;
        if (probe.gamma) {
            exit = first_cone_exit(path, T + L, z, params.cone, T + L + lookahead);
            if (exit) probe.exit = *exit;
        }
        record.probes.push_back(probe);
        const double step = curly_T(L, probe.gamma, exit);
        if (step == kNever) {
            record.points.push_back({T, z, false});
            record.failures.push_back(failures);
            failures = 0;
            T += params.first_offset();
        } else {
            ++failures;
            T += step;
        }
    }
    record.points.push_back({horizon, path.at(horizon), true});
    return record;
}

namespace {

struct Increment {
    double dz;
    double dt;
};

std::vector<std::vector<Increment>> increments_by_replica(const std::vector<RegenerationRecord>& records) {
    std::vector<std::vector<Increment>> out;
    for (const auto& r : records) {
        std::vector<Increment> inc;
        for (std::size_t k = 1; k < r.points.size(); ++k) {
            if (r.points[k].censored) break;
            inc.push_back({static_cast<double>(r.points[k].z - r.points[k - 1].z), r.points[k].tau - r.points[k - 1].tau});
        }
        out.push_back(std::move(inc));
    }
    return out;
}

}  // namespace

SkeletonEstimate skeleton_estimate(const std::vector<RegenerationRecord>& records) {
    SkeletonEstimate est;
    const auto by_replica = increments_by_replica(records);

    std::vector<double> dz;
    std::vector<double> dt;
    std::vector<std::pair<double, double>> clusters;
    for (const auto& inc : by_replica) {
        if (inc.empty()) {
            ++est.replicas_without_increments;
            continue;
        }
        ++est.contributing_replicas;
        double a = 0.0;
        double b = 0.0;
        for (const auto& i : inc) {
            dz.push_back(i.dz);
            dt.push_back(i.dt);
            a += i.dz;
            b += i.dt;
        }
        clusters.emplace_back(a, b);
    }
    for (const auto& r : records) {
        if (r.points.size() < 2 || r.regenerations() == 0) continue;
        const auto& tail = r.points.back();
        const auto& last = r.points[r.points.size() - 2];
        ++est.censored_increments;
        est.censored_mean_displacement += static_cast<double>(tail.z - last.z);
        est.censored_mean_duration += tail.tau - last.tau;
    }
    if (est.censored_increments > 0) {
        est.censored_mean_displacement /= static_cast<double>(est.censored_increments);
        est.censored_mean_duration /= static_cast<double>(est.censored_increments);
    }
    if (dz.empty()) throw Error("no complete regeneration increment");

    est.increments = dz.size();
    const MeanStat v = mean_stat(dz);
    const MeanStat u = mean_stat(dt);
    est.v = v.mean;
    est.u = u.mean;
    est.v_stderr = v.std_error;
    est.u_stderr = u.std_error;
    est.w = est.v / est.u;

    // Delta method for a ratio of sums: residuals a - w b summed per unit.
    if (clusters.size() < 10) {
        clusters.clear();
        for (std::size_t i = 0; i < dz.size(); ++i) clusters.emplace_back(dz[i], dt[i]);
    }
    const double n = static_cast<double>(clusters.size());
    double total_b = 0.0;
    double ss = 0.0;
    for (const auto& [a, b] : clusters) total_b += b;
    for (const auto& [a, b] : clusters) ss += (a - est.w * b) * (a - est.w * b);
    est.w_stderr = n > 1 ? std::sqrt(n / (n - 1.0) * ss) / total_b : 0.0;
    return est;
}

double exchangeability_p_value(const std::vector<RegenerationRecord>& records, int permutations,
                               std::uint64_t seed) {
    auto by_replica = increments_by_replica(records);
    std::erase_if(by_replica, [](const auto& inc) { return inc.size() < 2; });
    if (by_replica.empty()) return 1.0;

    // Groups carry increment indices so that (dz, dt) pairs move together.
    std::vector<Increment> flat;
    std::vector<std::vector<double>> groups;
    for (const auto& inc : by_replica) {
        std::vector<double> idx;
        for (const auto& i : inc) {
            idx.push_back(static_cast<double>(flat.size()));
            flat.push_back(i);
        }
        groups.push_back(std::move(idx));
    }
    double mz = 0.0;
    double mt = 0.0;
    for (const auto& i : flat) {
        mz += i.dz;
        mt += i.dt;
    }
    mz /= static_cast<double>(flat.size());
    mt /= static_cast<double>(flat.size());
    double vz = 0.0;
    double vt = 0.0;
    for (const auto& i : flat) {
        vz += (i.dz - mz) * (i.dz - mz);
        vt += (i.dt - mt) * (i.dt - mt);
    }
    double weight = 0.0;
    for (const auto& g : groups) {
        const double centre = (static_cast<double>(g.size()) - 1.0) / 2.0;
        for (std::size_t k = 0; k < g.size(); ++k) weight += (k - centre) * (k - centre);
    }
    const double sz = std::sqrt(vz / static_cast<double>(flat.size()) * weight);
    const double st = std::sqrt(vt / static_cast<double>(flat.size()) * weight);

    auto statistic = [&](const std::vector<std::vector<double>>& gs) {
        double tz = 0.0;
        double tt = 0.0;
        for (const auto& g : gs) {
            const double centre = (static_cast<double>(g.size()) - 1.0) / 2.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                const auto& inc = flat[static_cast<std::size_t>(g[k])];
                tz += (k - centre) * inc.dz;
                tt += (k - centre) * inc.dt;
            }
        }
        return std::max(sz > 0 ? std::abs(tz) / sz : 0.0, st > 0 ? std::abs(tt) / st : 0.0);
    };
    return permutation_p_value(groups, statistic, permutations, seed);
}

}  // namespace rwdre
