#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwdre/envelope.hpp"
#include "rwdre/regeneration.hpp"
#include "rwdre/stats.hpp"
#include "rwdre/walk.hpp"

namespace rwdre {

// Sites [lo, hi] simulated by the window backend. Both zero selects a window
// sized from the envelope drifts for the requested horizon.
struct WindowBounds {
    Site lo = 0;
    Site hi = 0;

    bool automatic() const noexcept { return lo == 0 && hi == 0; }
};

enum class Backend { lazy, window };

// Everything one replica needs apart from its seed and horizon.
struct ReplicaSetup {
    RateSpec env;
    ModelSpec model;
    InitialLaw init;
    BoundaryKind boundary = BoundaryKind::frozen_resample;
    WindowBounds window;
    bool force_window = false;

    void validate() const;
    // Lazy when every site evolves on its own (independent flips or range 0),
    // unless force_window is set.
    Backend backend() const;
};

// Window that H- and H+ leave with negligible probability before `horizon`:
// mean displacement plus four standard deviations plus a margin, each side.
WindowBounds auto_window(const RateSpec& spec, double horizon);

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) noexcept;

struct ReplicaRun {
    std::uint64_t seed = 0;
    bool overrun = false;  // the walk needed sites outside the window
    WalkPath path;
    std::optional<RegenerationRecord> record;
};

// Simulates one replica up to `horizon`. With `regeneration` set, the
// regeneration times of the path are built against the same randomness.
ReplicaRun run_replica(const ReplicaSetup& setup, double horizon, std::uint64_t seed,
                       const RegenerationParams* regeneration = nullptr);

enum class SpeedMethod { direct, skeleton };
std::string to_string(SpeedMethod method);

struct SpeedConfig {
    ReplicaSetup setup;
    double horizon = 100.0;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    RegenerationParams regeneration{1.0, 0.0, 0.0, ConeSpec{0.0, 0.0}};  // cone slope 0 selects default_cone_slope

    void validate() const;
};

struct SpeedEstimate {
    SpeedMethod method = SpeedMethod::direct;
    double w = 0.0;
    double std_error = 0.0;
    std::size_t replicas = 0;  // replicas requested
    std::size_t used = 0;      // replicas entering the estimate
    std::size_t overruns = 0;
    double horizon = 0.0;
    Backend backend = Backend::lazy;
    std::vector<std::uint64_t> seeds;
    std::vector<std::optional<Site>> finals;  // W at the horizon, empty on overrun
    std::optional<SkeletonEstimate> skeleton;
    std::vector<RegenerationRecord> records;  // skeleton only, one per usable replica

    double overrun_rate() const {
        return replicas ? static_cast<double>(overruns) / static_cast<double>(replicas) : 0.0;
    }
};

// Direct: mean of W_h / h over replicas, accumulated in integers so that the
// result does not depend on replica order. Skeleton: ratio estimator over
// regeneration increments. Throws Error when every replica overran.
SpeedEstimate estimate_speed(const SpeedConfig& config, SpeedMethod method);

enum class BoundKind { none, lower, upper, zero };
std::string to_string(BoundKind kind);

struct SpeedBoundVerdict {
    BoundKind kind = BoundKind::none;
    double bound = 0.0;
    bool pass = true;
    std::string detail;
};

// Sign bounds for the trap walk:
//   c1 >= c0 + l0:  w >= (c0+l0)(c1-c0-l0)/(c1+c0+l0), checked as w + k sd >= bound
//   c0 >= c1 + l1:  w <= -(c1+l1)(c0-c1-l1)/(c0+c1+l1), checked as w - k sd <= bound
// With both holding (independent flips, d0 = d1) the check is |w| <= k sd.
SpeedBoundVerdict check_speed_bounds(const RateSpec& spec, const SpeedEstimate& estimate, double sigmas = 3.0);

struct LipschitzParams {
    double d0 = 1.0;
    double d1 = 1.0;
    double delta = 0.5;
    double horizon = 50.0;
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct LipschitzBound {
    int steps = 1;
    double value = 0.0;
    bool pass = true;
};

struct LipschitzReport {
    std::size_t replicas = 0;
    std::size_t ordering_violations = 0;
    std::size_t extra_events_used = 0;  // replicas where the extra particle was placed
    MeanStat gap;                       // W^delta_t - W_t
    MeanStat gap_single;                // W*_t - W_t
    std::vector<LipschitzBound> bounds;  // n = 1, 2, 4
    bool pass = false;                   // ordering exact and the n = 1 bound holds within 3 sd
};

// Three walks on one graphical representation of the rates (d0, d1) plus an
// extra particle stream at rate delta: W on the flips alone, W^delta on flips
// and extra particles, and W* which uses only the first extra particle that
// lands next to W.
LipschitzReport lipschitz_coupling_experiment(const LipschitzParams& params);

struct MomentRow {
    double t = 0.0;
    MeanStat moment;            // E|W_t / t|^p
    double envelope_bound = 0;  // E (H+_t/t)^p + E (-H-_t/t)^p at equilibrium
};

struct MomentSeries {
    double p = 1.0;
    std::vector<MomentRow> rows;
    LinearFit trend;
    bool no_growth = false;      // slope interval reaches zero or below
    bool within_envelope = false;  // every moment below its envelope bound + 3 sd
};

struct MomentReport {
    std::size_t replicas = 0;
    std::size_t overruns = 0;
    std::vector<MomentSeries> series;
};

// Moments of the compound Poisson process with jump rate `rate` and jumps
// Geometric on {1, 2, ...} with P(J > k) = rho^k, at time t. Integer order
// only.
double compound_geometric_moment(double rate, double rho, double t, int order);

// Upper bound for E|W_t|^p from the two envelopes started at their own
// equilibria. Non-integer p goes through the next integer moment.
double envelope_moment_bound(const RateSpec& spec, double t, double p);

struct MomentParams {
    std::vector<double> times;
    std::vector<double> powers;
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

MomentReport ui_moments(const ReplicaSetup& setup, const MomentParams& params);

struct PropertyTally {
    std::size_t replicas = 0;
    std::size_t checks = 0;
    std::size_t violations = 0;
    std::size_t overruns = 0;
    std::optional<std::size_t> first_replica;  // first replica with a violation

    bool pass() const noexcept { return violations == 0; }
    void add(bool ok, std::size_t replica);
};

// H- <= Z <= H+ for the trap walk on the coupled triple, checked at every
// jump time of the three walks.
PropertyTally verify_sandwich(const ReplicaSetup& setup, double horizon, std::size_t replicas, std::uint64_t seed,
                              unsigned threads = 1);

// Trap walks with shared noise on the ordered coordinates of the triple never
// cross: walk(lower) <= walk(middle) <= walk(upper).
PropertyTally verify_monotonicity(const ReplicaSetup& setup, double horizon, std::size_t replicas,
                                  std::uint64_t seed, unsigned threads = 1);

// Lower <= middle <= upper at every site after every event, on [-K, K].
PropertyTally verify_triple_order(const RateSpec& spec, Site half_width, double horizon, std::size_t replicas,
                                  std::uint64_t seed, unsigned threads = 1);

struct DiscrepancyTally {
    PropertyTally plain;        // healthy sites agree in both triples
    PropertyTally conditioned;  // same with a trap kept at the origin up to the depth
    PropertyTally domination;   // walled infection below the unwalled one
};

// Two independent starts on [-K, K] evolved on one log, checked against the
// threshold contact process from all infected. The conditioned variant uses
// trap-conditioned starts and a log without trap-breaking events up to depth.
DiscrepancyTally verify_healthy_discrepancy(const RateSpec& spec, Site half_width, double horizon, double depth,
                                            std::size_t replicas, std::uint64_t seed, unsigned threads = 1);

struct MixingParams {
    std::vector<double> depths{2, 4, 8, 16};
    double duration = 20.0;  // cone observed on [L, L + duration]
    ConeSpec cone{0.0, 1.0};  // slope 0 selects default_cone_slope
    Site half_width = 0;      // window [-K, K]; 0 sizes it from the cone
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct MixingRow {
    double L = 0.0;
    double phi = 0.0;  // twice the cone discrepancy probability
    std::pair<double, double> phi_ci;
    double kappa = 0.0;  // walk stays in the cone after L
    std::pair<double, double> kappa_ci;
    double gamma = 0.0;  // freezing event at the origin over [0, L]
    std::pair<double, double> gamma_ci;
    double gamma_exact = 0.0;
    double ratio = 0.0;
    std::size_t gamma_hits = 0;
    std::size_t stuck_violations = 0;  // walk moved during [0, L] although the freezing event held
};

struct MixingReport {
    std::vector<MixingRow> rows;
    double cone_slope = 0.0;
    Site half_width = 0;
    bool strictly_decreasing = false;
};

// For each depth L: two trap-conditioned starts evolve on one log whose
// trap-breaking events at sites 0 and 1 are removed up to L; the middle
// coordinates are compared inside the cone with apex (L, 0). The walk on the
// first start gives kappa, the unconditioned log gives gamma.
MixingReport mixing_decay_experiment(const RateSpec& spec, const MixingParams& params);

}  // namespace rwdre
