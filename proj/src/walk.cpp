#include "rwdre/walk.hpp"

#include <algorithm>
#include <cmath>

#include "rwdre/random.hpp"
#include "rwdre/rate_spec.hpp"

namespace rwdre {

Site WalkPath::at(double t) const {
    const auto n = std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
    return n == 0 ? start : positions[static_cast<std::size_t>(n - 1)];
}

Site WalkPath::left_limit(double t) const {
    const auto n = std::lower_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
    return n == 0 ? start : positions[static_cast<std::size_t>(n - 1)];
}

void WalkPath::push(double t, Site x) {
    if (x == final_position()) return;
    if (!jump_times.empty() && t < jump_times.back()) throw Error("walk jumps recorded out of order");
    if (!jump_times.empty() && t == jump_times.back()) {
        positions.back() = x;
        if (positions.size() >= 2 ? positions[positions.size() - 2] == x : start == x) {
            positions.pop_back();
            jump_times.pop_back();
        }
        return;
    }
    jump_times.push_back(t);
    positions.push_back(x);
}

WalkPath trap_restricted(const WalkPath& w, bool started_in_trap) {
    if (started_in_trap) return w;
    WalkPath zero;
    zero.start_time = w.start_time;
    zero.horizon = w.horizon;
    zero.origin = w.origin;
    zero.start = w.origin;
    return zero;
}

double NoiseStream::entry_uniform(std::int64_t n) const {
    return hashed_uniform(seed_, {static_cast<std::uint64_t>(NoiseChannel::entry), static_cast<std::uint64_t>(n)});
}

double NoiseStream::jump_uniform(std::int64_t n, std::int64_t k) const {
    return hashed_uniform(seed_, {static_cast<std::uint64_t>(NoiseChannel::jump), static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(k)});
}

bool NoiseStream::mixture_choice(std::int64_t n, double p) const {
    return hashed_uniform(seed_, {static_cast<std::uint64_t>(NoiseChannel::mixture), static_cast<std::uint64_t>(n)}) <
           p;
}

void NoiseStream::clock_events(NoiseChannel channel, std::int64_t n, double rate, std::vector<ClockEvent>& out) const {
    if (rate <= 0.0) return;
    Rng rng(derive_seed(seed_, {static_cast<std::uint64_t>(channel), static_cast<std::uint64_t>(n)}));
    const double end = static_cast<double>(n);
    double t = end - 1.0;
    for (;;) {
        t += rng.exponential(rate);
        if (t >= end) break;
        out.push_back({t, rng.uniform()});
    }
}

std::optional<ClockEvent> NoiseStream::next_clock_event(NoiseChannel channel, double rate, double after,
                                                        double until) const {
    if (rate <= 0.0) return std::nullopt;
    std::vector<ClockEvent> events;
    for (auto n = static_cast<std::int64_t>(std::floor(after)) + 1; static_cast<double>(n - 1) <= until; ++n) {
        events.clear();
        clock_events(channel, n, rate, events);
        for (const auto& e : events) {
            if (e.time <= after) continue;
            if (e.time > until) return std::nullopt;
            return e;
        }
    }
    return std::nullopt;
}

std::uint32_t PatternModel::motif_mask() const {
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < motif.size(); ++j) {
        if (motif[j]) mask |= 1u << j;
    }
    return mask;
}

double InternalNoise::clock_rate() const {
    double total = 0.0;
    for (const auto& table : rates) total += *std::max_element(table.begin(), table.end());
    return total;
}

PatternModel infty_zero_pattern() {
    // Window masks: bit 0 is the walker's site, bit 1 its right neighbour.
    return PatternModel{{1, 0}, {0.0, 0.0, 0.5, 1.0}};
}

namespace {

void validate_pattern(const PatternModel& m, const std::string& path) {
    if (m.motif.empty() || m.motif.size() > 16) throw ConfigError(path + ".pattern", "length must lie in [1, 16]");
    for (auto b : m.motif) {
        if (b > 1) throw ConfigError(path + ".pattern", "entries must be 0 or 1");
    }
    if (m.q.size() != (std::size_t{1} << m.motif.size())) {
        throw ConfigError(path + ".q", "needs one entry per window mask");
    }
    for (double v : m.q) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(path + ".q", "probabilities must lie in [0,1]");
    }
}

void validate_model(const ModelSpec& spec, const std::string& path) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AlphaBeta>) {
                if (!(m.beta > 0.0 && m.beta < m.alpha && std::isfinite(m.alpha))) {
                    throw ConfigError(path, "alpha-beta walk needs 0 < beta < alpha < inf");
                }
            } else if constexpr (std::is_same_v<T, PatternModel>) {
                validate_pattern(m, path);
            } else if constexpr (std::is_same_v<T, InternalNoise>) {
                if (m.radius < 0 || m.radius > 10) throw ConfigError(path + ".radius", "must lie in [0, 10]");
                if (m.offsets.size() != m.rates.size()) throw ConfigError(path + ".rates", "one table per offset");
                const std::size_t patches = std::size_t{1} << (2 * m.radius + 1);
                for (std::size_t i = 0; i < m.offsets.size(); ++i) {
                    if (m.offsets[i] == 0) throw ConfigError(path + ".offsets", "offset 0 is not a jump");
                    if (m.rates[i].size() != patches) throw ConfigError(path + ".rates", "one rate per patch");
                    for (double r : m.rates[i]) {
                        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError(path + ".rates", "rates must be >= 0");
                    }
                }
            } else if constexpr (std::is_same_v<T, PatternExtraJumps>) {
                validate_pattern(m.pattern, path);
                if (!(m.rate >= 0.0) || !std::isfinite(m.rate)) throw ConfigError(path + ".rate", "must be >= 0");
                if (!(m.right_probability >= 0.0 && m.right_probability <= 1.0)) {
                    throw ConfigError(path + ".right_probability", "must lie in [0,1]");
                }
            } else if constexpr (std::is_same_v<T, Mixture>) {
                if (!m.first || !m.second) throw ConfigError(path, "mixture needs two components");
                if (std::holds_alternative<Mixture>(m.first->kind) || std::holds_alternative<Mixture>(m.second->kind)) {
                    throw ConfigError(path, "mixture components cannot be mixtures");
                }
                if (!(m.p >= 0.0 && m.p <= 1.0)) throw ConfigError(path + ".p", "must lie in [0,1]");
                validate_model(*m.first, path + ".first");
                validate_model(*m.second, path + ".second");
            }
        },
        spec.kind);
}

}  // namespace

void ModelSpec::validate() const { validate_model(*this, "model"); }

std::string ModelSpec::name() const {
    static const char* names[] = {"infty_zero", "alpha_beta", "pattern", "internal_noise", "pattern_extra_jumps",
                                  "mixture"};
    return names[kind.index()];
}

std::optional<Site> jump_functional(const SpinConfig& config, bool b, Site origin) {
    auto get = [&](Site y) { return config.contains(origin + y) ? config.at(origin + y) : -1; };
    return jump_offset(get, b);
}

namespace {

const PatternModel* pattern_of(const ModelSpec& m, PatternModel& scratch) {
    if (std::holds_alternative<InftyZero>(m.kind)) {
        scratch = infty_zero_pattern();
        return &scratch;
    }
    if (const auto* p = std::get_if<PatternModel>(&m.kind)) return p;
    if (const auto* p = std::get_if<PatternExtraJumps>(&m.kind)) return &p->pattern;
    return nullptr;
}

class Engine {
public:
    Engine(const Environment& env, const NoiseStream& noise, double horizon, double start_time, Site origin)
        : env_(env), noise_(noise), horizon_(horizon), t_(start_time), x_(origin) {
        path.start_time = start_time;
        path.horizon = horizon;
        path.origin = origin;
        path.start = origin;
    }

    WalkPath path;

    double now() const { return t_; }
    Site position() const { return x_; }

    void initial(Site to) {
        x_ = to;
        path.start = to;
    }

    void move(double time, Site to) {
        t_ = time;
        x_ = to;
        path.push(time, to);
    }

    double jump_uniform(double tau) {
        const auto n = static_cast<std::int64_t>(std::ceil(tau));
        if (n != interval_) {
            interval_ = n;
            ordinal_ = 0;
        }
        return noise_.jump_uniform(n, ++ordinal_);
    }

    std::uint32_t window_mask(Site p, double time, std::size_t length) const {
        std::uint32_t mask = 0;
        for (std::size_t j = 0; j < length; ++j) {
            if (env_.state(p + static_cast<Site>(j), time)) mask |= 1u << j;
        }
        return mask;
    }

    Site find_motif(const PatternModel& m, Site from, bool right, bool strict, double time) const {
        const std::uint32_t target = m.motif_mask();
        const Site step = right ? 1 : -1;
        Site p = strict ? from + step : from;
        for (Site n = 0; n < kDefaultScanLimit; ++n, p += step) {
            if (window_mask(p, time, m.motif.size()) == target) return p;
        }
        throw WindowOverrun("no motif occurrence within scan limit");
    }

    Site pattern_decision(const PatternModel& m, Site x, double time, double u) const {
        const std::uint32_t mask = window_mask(x, time, m.motif.size());
        if (mask == m.motif_mask()) return x;
        return find_motif(m, x, u < m.q[mask], false, time);
    }

    void run_pattern(const PatternModel& m, const PatternExtraJumps* extra, double until) {
        for (;;) {
            double t_change = kNever;
            for (std::size_t j = 0; j < m.motif.size(); ++j) {
                t_change = std::min(t_change, env_.next_flip(x_ + static_cast<Site>(j), t_));
            }
            std::optional<ClockEvent> ev;
            if (extra) ev = noise_.next_clock_event(NoiseChannel::extra, extra->rate, t_, std::min(until, t_change));
            if (ev) {
                const Site to = find_motif(m, x_, ev->mark < extra->right_probability, true, ev->time);
                move(ev->time, to);
                continue;
            }
            if (t_change > until) break;
            const double u = jump_uniform(t_change);
            move(t_change, pattern_decision(m, x_, t_change, u));
        }
    }

    void run_internal(const InternalNoise& m, double until) {
        const double total = m.clock_rate();
        while (auto ev = noise_.next_clock_event(NoiseChannel::clock, total, t_, until)) {
            const auto get = [&](Site y) { return env_.state(y, ev->time); };
            const Patch patch = read_patch(get, x_, m.radius);
            double pick = ev->mark * total;
            Site to = x_;
            for (std::size_t i = 0; i < m.offsets.size(); ++i) {
                const double r = m.rates[i][patch];
                if (pick < r) {
                    to = x_ + m.offsets[i];
                    break;
                }
                pick -= r;
            }
            t_ = ev->time;
            move(ev->time, to);
        }
    }

    void run_alpha_beta(double alpha, double beta, double until) {
        const double total = alpha + beta;
        while (auto ev = noise_.next_clock_event(NoiseChannel::clock, total, t_, until)) {
            const int s = env_.state(x_, ev->time);
            const double right = (s == 1 ? alpha : beta) / total;
            move(ev->time, ev->mark < right ? x_ + 1 : x_ - 1);
        }
        t_ = std::max(t_, until);
    }

    void run_component(const ModelSpec& m, double until) {
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, InftyZero>) {
                    run_pattern(infty_zero_pattern(), nullptr, until);
                } else if constexpr (std::is_same_v<T, PatternModel>) {
                    run_pattern(k, nullptr, until);
                } else if constexpr (std::is_same_v<T, PatternExtraJumps>) {
                    run_pattern(k.pattern, &k, until);
                } else if constexpr (std::is_same_v<T, InternalNoise>) {
                    run_internal(k, until);
                } else if constexpr (std::is_same_v<T, AlphaBeta>) {
                    run_alpha_beta(k.alpha, k.beta, until);
                }
            },
            m.kind);
        t_ = std::max(t_, until);
    }

private:
    const Environment& env_;
    const NoiseStream& noise_;
    double horizon_;
    double t_;
    Site x_;
    std::int64_t interval_ = -1;
    std::int64_t ordinal_ = 0;
};

}  // namespace

Site entry_decision(const Environment& env, const ModelSpec& model, const NoiseStream& noise, double t, Site x) {
    if (const auto* mix = std::get_if<Mixture>(&model.kind)) {
        const auto n = static_cast<std::int64_t>(std::floor(t)) + 1;
        return entry_decision(env, noise.mixture_choice(n, mix->p) ? *mix->second : *mix->first, noise, t, x);
    }
    PatternModel scratch;
    const PatternModel* pattern = pattern_of(model, scratch);
    if (!pattern) return x;
    Engine probe(env, noise, env.horizon(), t, x);
    return probe.pattern_decision(*pattern, x, t, noise.entry_uniform(static_cast<std::int64_t>(std::ceil(t))));
}

WalkPath run_generalized(const Environment& env, const ModelSpec& model, const NoiseStream& noise, double horizon,
                         double start_time, Site origin) {
    model.validate();
    Engine engine(env, noise, horizon, start_time, origin);
    engine.initial(entry_decision(env, model, noise, start_time, origin));
    const auto* mix = std::get_if<Mixture>(&model.kind);
    if (!mix) {
        engine.run_component(model, horizon);
        return std::move(engine.path);
    }
    for (auto n = static_cast<std::int64_t>(std::floor(start_time)) + 1;; ++n) {
        const double lo = static_cast<double>(n - 1);
        if (lo > horizon) break;
        const ModelSpec& active = noise.mixture_choice(n, mix->p) ? *mix->second : *mix->first;
        if (lo > start_time) {
            PatternModel scratch;
            if (const PatternModel* pattern = pattern_of(active, scratch)) {
                Engine probe(env, noise, horizon, lo, engine.position());
                const Site to = probe.pattern_decision(*pattern, engine.position(), lo, noise.entry_uniform(n - 1));
                engine.move(lo, to);
            }
        }
        engine.run_component(active, std::min(static_cast<double>(n), horizon));
    }
    return std::move(engine.path);
}

WalkPath run_infty_zero(const Environment& env, const NoiseStream& noise, double horizon, double start_time,
                        Site origin) {
    WalkPath path;
    path.start_time = start_time;
    path.horizon = horizon;
    path.origin = origin;

    Site x = origin;
    double t = start_time;
    auto view = [&](Site y) { return env.state(x + y, t); };

    const bool b0 = noise.fair_bit(noise.entry_uniform(static_cast<std::int64_t>(std::ceil(start_time))));
    const auto first = jump_offset(view, b0);
    if (!first) throw WindowOverrun("no trap found for the initial decision");
    x += *first;
    path.start = x;

    std::int64_t interval = -1;
    std::int64_t ordinal = 0;
    for (;;) {
        const double tau = std::min(env.next_flip(x, t), env.next_flip(x + 1, t));
        if (tau > horizon) break;
        const auto n = static_cast<std::int64_t>(std::ceil(tau));
        if (n != interval) {
            interval = n;
            ordinal = 0;
        }
        const bool b = noise.fair_bit(noise.jump_uniform(n, ++ordinal));
        t = tau;
        const auto offset = jump_offset(view, b);
        if (!offset) throw WindowOverrun("no trap found at t=" + std::to_string(tau));
        x += *offset;
        path.push(tau, x);
    }
    return path;
}

WalkPath run_alpha_beta(const Environment& env, double alpha, double beta, const NoiseStream& noise, double horizon,
                        double start_time, Site origin) {
    if (!(alpha > 0.0 && beta > 0.0 && beta <= alpha)) {
        throw ConfigError("model", "alpha-beta walk needs 0 < beta <= alpha");
    }
    Engine engine(env, noise, horizon, start_time, origin);
    engine.run_alpha_beta(alpha, beta, horizon);
    return std::move(engine.path);
}

std::optional<double> first_order_violation(const WalkPath& lower, const WalkPath& upper) {
    std::vector<double> times{std::max(lower.start_time, upper.start_time)};
    times.insert(times.end(), lower.jump_times.begin(), lower.jump_times.end());
    times.insert(times.end(), upper.jump_times.begin(), upper.jump_times.end());
    std::sort(times.begin(), times.end());
    for (double t : times) {
        if (lower.at(t) > upper.at(t)) return t;
    }
    return std::nullopt;
}

std::pair<WalkPath, WalkPath> monotone_pair(const Environment& lower_env, const Environment& upper_env,
                                            const NoiseStream& noise, double horizon) {
    WalkPath low = run_infty_zero(lower_env, noise, horizon);
    WalkPath high = run_infty_zero(upper_env, noise, horizon);
    if (auto t = first_order_violation(low, high)) {
        throw OrderViolation("walks on ordered environments crossed at t=" + std::to_string(*t));
    }
    return {std::move(low), std::move(high)};
}

double ConeRestrictedEnv::entry_time(Site x) const {
    const double d = std::abs(static_cast<double>(x - apex_site_));
    return apex_time_ + std::max(0.0, (d - enlargement_) / slope_);
}

int ConeRestrictedEnv::state(Site x, double t) const {
    const double e = entry_time(x);
    if (t < e) return 1 - base_->state(x, e);
    return base_->state(x, t);
}

double ConeRestrictedEnv::next_flip(Site x, double t) const {
    const double e = entry_time(x);
    if (t < e) return e <= base_->horizon() ? e : kNever;
    return base_->next_flip(x, t);
}

namespace {

std::optional<double> first_difference(const WalkPath& a, const WalkPath& b, double from, double until) {
    std::vector<double> times{from};
    for (const auto* p : {&a, &b}) {
        for (double t : p->jump_times) {
            if (t >= from && t < until) times.push_back(t);
        }
    }
    std::sort(times.begin(), times.end());
    for (double t : times) {
        if (a.at(t) != b.at(t)) return t;
    }
    return std::nullopt;
}

void note(StructuralReport& r, const std::string& what, double t) {
    if (!r.first_divergence || t < *r.first_divergence) r.first_divergence = t;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += what + " at t=" + std::to_string(t);
}

}  // namespace

StructuralReport check_structural_assumptions(const WalkPath& path, const Environment& env, const NoiseStream& noise,
                                              const ModelSpec& model, std::int64_t n, double cone_slope,
                                              double cone_enlargement) {
    StructuralReport report;
    const double tn = static_cast<double>(n);

    if (tn >= path.start_time && tn <= path.horizon) {
        const WalkPath replay = run_generalized(env, model, noise, path.horizon, tn, path.at(tn));
        if (auto t = first_difference(path, replay, tn, kNever)) {
            report.additivity = false;
            note(report, "suffix replay diverged", *t);
        }
    }

    if (path.start == path.origin) {
        const double apex = path.start_time;
        double exit = kNever;
        for (std::size_t k = 0; k < path.jump_count(); ++k) {
            const double d = std::abs(static_cast<double>(path.positions[k] - path.origin));
            if (d > cone_slope * (path.jump_times[k] - apex)) {
                exit = path.jump_times[k];
                break;
            }
        }
        const ConeRestrictedEnv restricted(env, apex, path.origin, cone_slope, cone_enlargement);
        const WalkPath replay = run_generalized(restricted, model, noise, path.horizon, apex, path.origin);
        if (auto t = first_difference(path, replay, apex, exit)) {
            report.locality = false;
            note(report, "cone-restricted replay diverged", *t);
        }
    }

    for (auto k = static_cast<std::int64_t>(std::floor(path.start_time)) + 1; static_cast<double>(k) <= path.horizon;
         ++k) {
        const double tk = static_cast<double>(k);
        const Site before = path.left_limit(tk);
        if (entry_decision(env, model, noise, tk, before) != path.at(tk)) {
            report.jump_homogeneity = false;
            note(report, "jump at integer time differs from the entry decision", tk);
            break;
        }
    }
    return report;
}

}  // namespace rwdre
