#include "rwdre/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace rwdre {

void ConeSpec::validate() const {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("cone.m", "slope must be positive");
    if (!(R >= 0.0) || !std::isfinite(R)) throw ConfigError("cone.R", "enlargement must be >= 0");
}

WalkPath run_envelope(Side side, const Environment& env, double horizon, double start_time, Site origin) {
    const bool plus = side == Side::plus;
    const Site watched = plus ? 1 : 0;
    const int trigger = plus ? 1 : 0;
    const Direction dir = plus ? Direction::right : Direction::left;

    WalkPath path;
    path.start_time = start_time;
    path.horizon = horizon;
    path.origin = origin;

    Site x = origin;
    double t = start_time;
    auto move = [&]() {
        auto view = [&](Site y) { return env.state(x + y, t); };
        const auto offset = scan_for_trap(view, dir);
        if (!offset) throw WindowOverrun("envelope found no trap at t=" + std::to_string(t));
        x += *offset;
    };

    if (env.state(x + watched, t) == trigger) move();
    path.start = x;
    for (;;) {
        const double tau = env.next_flip(x + watched, t);
        if (tau > horizon) break;
        t = tau;
        if (env.state(x + watched, t) != trigger) continue;
        move();
        path.push(t, x);
    }
    return path;
}

double envelope_drift(const RateSpec& spec, Side side) {
    if (side == Side::plus) {
        const double rho = spec.rho_plus();
        return spec.lambda_plus() * rho / (1.0 - rho);
    }
    const double rho = spec.rho_minus();
    return -spec.lambda_minus() * (1.0 - rho) / rho;
}

double default_cone_slope(const RateSpec& spec) {
    return 2.0 * std::max(envelope_drift(spec, Side::plus), -envelope_drift(spec, Side::minus));
}

namespace {

double distance(Site a, Site b) { return std::abs(static_cast<double>(a - b)); }

}  // namespace

ConeStats cone_exit(const WalkPath& path, const ConeSpec& cone, double horizon) {
    cone.validate();
    ConeStats stats;
    stats.horizon = horizon - path.start_time;

    // Segment k holds position pos(k) on [begin(k), end(k)), elapsed times.
    const std::size_t n = path.jump_count();
    auto pos = [&](std::size_t k) { return k == 0 ? path.start : path.positions[k - 1]; };
    auto begin = [&](std::size_t k) { return k == 0 ? 0.0 : path.jump_times[k - 1] - path.start_time; };
    auto end = [&](std::size_t k) { return k == n ? stats.horizon : path.jump_times[k] - path.start_time; };

    for (std::size_t k = 0; k <= n; ++k) {
        const double b = begin(k);
        if (b > stats.horizon) break;
        const double d = distance(pos(k), path.origin);
        // Outside the cone on this segment exactly for elapsed times below `leave`.
        const double leave = (d - cone.R) / cone.m;
        if (leave <= b) continue;
        if (stats.S_censored) {
            stats.S = b;
            stats.S_censored = false;
        }
        if (k == n && leave > stats.horizon) {
            stats.S_hat = kNever;
            stats.S_hat_censored = true;
        } else {
            stats.S_hat = std::min(end(k), leave);
        }
    }
    return stats;
}

std::optional<double> first_cone_exit(const WalkPath& path, double apex_time, Site apex_site, const ConeSpec& cone,
                                      double until) {
    const auto first = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), apex_time);
    for (auto it = first; it != path.jump_times.end() && *it <= until; ++it) {
        const double s = *it - apex_time;
        const Site x = path.positions[static_cast<std::size_t>(it - path.jump_times.begin())];
        if (distance(x, apex_site) > cone.m * s + cone.R) return s;
    }
    return std::nullopt;
}

SandwichResult sandwich_check(const WalkPath& z, const WalkPath& lower, const WalkPath& upper) {
    std::vector<double> times{std::max({z.start_time, lower.start_time, upper.start_time})};
    for (const auto* p : {&z, &lower, &upper}) times.insert(times.end(), p->jump_times.begin(), p->jump_times.end());
    std::sort(times.begin(), times.end());
    SandwichResult result;
    for (double t : times) {
        const Site lo = lower.at(t);
        const Site mid = z.at(t);
        const Site hi = upper.at(t);
        if (lo <= mid && mid <= hi) continue;
        result.ok = false;
        result.first_violation = t;
        result.detail = "at t=" + std::to_string(t) + ": " + std::to_string(lo) + " <= " + std::to_string(mid) +
                        " <= " + std::to_string(hi) + " fails";
        break;
    }
    return result;
}

}  // namespace rwdre
