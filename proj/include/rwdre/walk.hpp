#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rwdre/environment.hpp"
#include "rwdre/spin_config.hpp"

namespace rwdre {

// Piecewise-constant càdlàg walk: `start` at start_time, then positions[k]
// from jump_times[k] on. The walk was placed at `origin` and may have moved
// to `start` by its initial decision.
struct WalkPath {
    double start_time = 0.0;
    double horizon = 0.0;
    Site origin = 0;
    Site start = 0;
    std::vector<double> jump_times;
    std::vector<Site> positions;

    Site at(double t) const;
    Site left_limit(double t) const;
    Site final_position() const { return positions.empty() ? start : positions.back(); }
    std::size_t jump_count() const noexcept { return jump_times.size(); }
    void push(double t, Site x);

    bool operator==(const WalkPath&) const = default;
};

// The walk seen from its initial decision: identical to `w` when the initial
// configuration had a trap at the origin, and constant 0 otherwise.
WalkPath trap_restricted(const WalkPath& w, bool started_in_trap);

// Independent streams of the walk's own randomness, all counter-based so any
// entry can be read in any order and a shifted replay reads the same values.
enum class NoiseChannel : std::uint64_t { entry = 1, jump = 2, clock = 3, extra = 4, mixture = 5 };

struct ClockEvent {
    double time;
    double mark;
};

class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    // Decision uniform for a walk (re)started at integer time n.
    double entry_uniform(std::int64_t n) const;
    // Decision uniform of the k-th jump (k >= 1) inside (n-1, n].
    double jump_uniform(std::int64_t n, std::int64_t k) const;
    bool fair_bit(double u) const noexcept { return u < 0.5; }

    // Mixture selector for [n-1, n): true picks the second component.
    bool mixture_choice(std::int64_t n, double p) const;

    // Poisson clock events of `channel` at `rate` inside [n-1, n), time-ordered.
    void clock_events(NoiseChannel channel, std::int64_t n, double rate, std::vector<ClockEvent>& out) const;
    // First clock event in (after, until], if any.
    std::optional<ClockEvent> next_clock_event(NoiseChannel channel, double rate, double after, double until) const;

private:
    std::uint64_t seed_;
};

// ---- model zoo ----

struct InftyZero {};

// On a particle: right at alpha, left at beta. On a hole: reversed.
struct AlphaBeta {
    double alpha = 1.0;
    double beta = 0.5;
};

// Motif of length R read at sites p..p+R-1. q is indexed by the R-bit mask of
// that window (bit j holds site p+j) and gives the probability of heading right.
struct PatternModel {
    std::vector<std::uint8_t> motif;
    std::vector<double> q;

    std::uint32_t motif_mask() const;
};

// Jump rates pi_x(patch) for a finite set of offsets; `rates[i]` is indexed by
// the radius-`radius` patch around the walker.
struct InternalNoise {
    int radius = 0;
    std::vector<Site> offsets;
    std::vector<std::vector<double>> rates;

    double clock_rate() const;  // sum over offsets of the largest rate
};

struct PatternExtraJumps {
    PatternModel pattern;
    double rate = 0.0;               // extra-jump clock rate
    double right_probability = 0.5;  // heading of an extra jump
};

struct ModelSpec;

// Dynamics of `second` on [n-1, n) when the n-th selector fires (probability
// p), else dynamics of `first`.
struct Mixture {
    std::shared_ptr<const ModelSpec> first;
    std::shared_ptr<const ModelSpec> second;
    double p = 0.5;
};

struct ModelSpec {
    std::variant<InftyZero, AlphaBeta, PatternModel, InternalNoise, PatternExtraJumps, Mixture> kind;

    void validate() const;
    std::string name() const;
};

// The trap model as a pattern: motif (1,0), always right from (1,1), always
// left from (0,0), a fair coin from (0,1).
PatternModel infty_zero_pattern();

// ---- walk operations ----

// Offset to the trap the walker should occupy, given its view of the
// configuration: 0 on (1,0), right scan on (1,1), left scan on (0,0), and on
// (0,1) right iff b. `get(y)` reads the state at offset y, negative if unknown.
template <class Get>
std::optional<Site> jump_offset(Get&& get, bool b, Site limit = kDefaultScanLimit) {
    const int here = get(Site{0});
    const int right = get(Site{1});
    if (here < 0 || right < 0) return std::nullopt;
    if (here == 1 && right == 0) return Site{0};
    const bool go_right = (here == 1 && right == 1) || (here == 0 && right == 1 && b);
    return scan_for_trap(get, go_right ? Direction::right : Direction::left, limit);
}

std::optional<Site> jump_functional(const SpinConfig& config, bool b, Site origin = 0);

// The trap-seeking walk. Starts at (start_time, origin), takes its initial
// decision with entry_uniform(ceil(start_time)) and records jumps until horizon.
WalkPath run_infty_zero(const Environment& env, const NoiseStream& noise, double horizon,
                        double start_time = 0.0, Site origin = 0);

WalkPath run_alpha_beta(const Environment& env, double alpha, double beta, const NoiseStream& noise,
                        double horizon, double start_time = 0.0, Site origin = 0);

WalkPath run_generalized(const Environment& env, const ModelSpec& model, const NoiseStream& noise,
                         double horizon, double start_time = 0.0, Site origin = 0);

// Position the model's initial decision would move to at (t, x); pattern-type
// models look for their motif, the others stay put.
Site entry_decision(const Environment& env, const ModelSpec& model, const NoiseStream& noise, double t, Site x);

// First time at which lower > upper, scanning the union of jump times.
std::optional<double> first_order_violation(const WalkPath& lower, const WalkPath& upper);

// Trap walks on ordered environments with shared noise; throws OrderViolation
// if the walks cross.
std::pair<WalkPath, WalkPath> monotone_pair(const Environment& lower_env, const Environment& upper_env,
                                            const NoiseStream& noise, double horizon);

// Replaces the environment outside the cone |x - apex_site| <= m (t - apex_time) + R
// with the opposite of the state each site will hold when it enters the cone.
class ConeRestrictedEnv final : public Environment {
public:
    ConeRestrictedEnv(const Environment& base, double apex_time, Site apex_site, double slope, double enlargement)
        : base_(&base), apex_time_(apex_time), apex_site_(apex_site), slope_(slope), enlargement_(enlargement) {}

    int state(Site x, double t) const override;
    double next_flip(Site x, double t) const override;
    double horizon() const override { return base_->horizon(); }

private:
    double entry_time(Site x) const;
    const Environment* base_;
    double apex_time_;
    Site apex_site_;
    double slope_;
    double enlargement_;
};

struct StructuralReport {
    bool additivity = true;          // suffix replay from (n, W_n)
    bool locality = true;            // cone-restricted replay
    bool jump_homogeneity = true;    // jump at n equals the entry decision at n
    std::optional<double> first_divergence;
    std::string detail;

    bool ok() const noexcept { return additivity && locality && jump_homogeneity; }
};

// Checks additivity at integer time n, locality in the cone (slope, R), and
// homogeneity of the jump at every integer time up to the horizon.
StructuralReport check_structural_assumptions(const WalkPath& path, const Environment& env,
                                              const NoiseStream& noise, const ModelSpec& model, std::int64_t n,
                                              double cone_slope, double cone_enlargement);

}  // namespace rwdre
