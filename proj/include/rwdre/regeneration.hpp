#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwdre/envelope.hpp"
#include "rwdre/event_log.hpp"
#include "rwdre/walk.hpp"

namespace rwdre {

// Data from which the freezing event of a probe is decided. With `events`
// set, the event is read off the graphical representation; otherwise from the
// lower and upper coordinates of the coupled triple. Clock-driven models only
// need `noise`.
struct GammaData {
    const EventQuery* events = nullptr;
    const Environment* lower = nullptr;
    const Environment* upper = nullptr;
    const NoiseStream* noise = nullptr;
};

// Whether the model's freezing event holds over (T, T+L] for a walker at z:
//  - trap and pattern walks: no event that could change a motif site
//    (motif 1-sites see no 0-events, 0-sites no 1-events), or on the coupled
//    backend the lower system holds the 1-sites and the upper system the
//    0-sites, unchanged through the window;
//  - clock-driven walks: the walk's clock stays silent;
//  - extra jumps: both of the above;
//  - mixtures: the second component's event, with the second component
//    selected on every unit interval of the window.
bool gamma_indicator(const ModelSpec& model, const GammaData& data, double T, Site z, double L);

// Length of one probe: L when the freezing event fails, L + ceil(exit) when it
// holds and the walk leaves the cone `exit` time units after L, and kNever
// when it holds and the walk never leaves.
double curly_T(double L, bool gamma, std::optional<double> exit_after_L);

struct RegenerationParams {
    double L = 1.0;
    double t0 = 0.0;         // offset of the first probe after a regeneration; 0 means L
    double lookahead = 0.0;  // window in which a cone exit is searched; 0 means 10 L
    ConeSpec cone;

    void validate() const;
    double first_offset() const { return t0 > 0.0 ? t0 : L; }
    double window() const { return lookahead > 0.0 ? lookahead : 10.0 * L; }
};

// One replica as the regeneration construction sees it.
class ReplicaView {
public:
    virtual ~ReplicaView() = default;
    virtual const WalkPath& path() const = 0;
    virtual bool gamma(double T, Site z, double L) const = 0;
    double horizon() const { return path().horizon; }
};

// A walk path together with the data its model's freezing event reads.
class WalkReplica final : public ReplicaView {
public:
    WalkReplica(const WalkPath& path, const ModelSpec& model, GammaData data)
        : path_(&path), model_(&model), data_(data) {}

    const WalkPath& path() const override { return *path_; }
    bool gamma(double T, Site z, double L) const override { return gamma_indicator(*model_, data_, T, z, L); }

private:
    const WalkPath* path_;
    const ModelSpec* model_;
    GammaData data_;
};

struct ProbeOutcome {
    double T = 0.0;
    bool gamma = false;
    double exit = kNever;  // elapsed after T + L, kNever when none in the lookahead
};

struct RegenerationPoint {
    double tau = 0.0;
    Site z = 0;
    bool censored = false;  // trailing point at the horizon
};

struct RegenerationRecord {
    RegenerationParams params;
    std::vector<ProbeOutcome> probes;
    std::vector<RegenerationPoint> points;  // regenerations in order, then the censored tail
    std::vector<int> failures;              // failed probes before each regeneration

    std::size_t regenerations() const;
};

// Probes at T, T + curly_T, ... starting t0 after time 0 and after every
// regeneration. A probe whose freezing event holds and whose walk stays in the
// cone for the whole lookahead declares a regeneration at T. Probing stops
// once a probe's lookahead would pass the horizon; the position there is
// appended as a censored point.
RegenerationRecord build_regeneration_times(const ReplicaView& replica, const RegenerationParams& params);

struct SkeletonEstimate {
    double v = 0.0;  // mean displacement per increment
    double u = 0.0;  // mean duration per increment
    double w = 0.0;  // v / u
    double v_stderr = 0.0;
    double u_stderr = 0.0;
    double w_stderr = 0.0;
    std::size_t increments = 0;
    std::size_t contributing_replicas = 0;
    std::size_t replicas_without_increments = 0;
    std::size_t censored_increments = 0;
    double censored_mean_displacement = 0.0;
    double censored_mean_duration = 0.0;
};

// Ratio estimator over increments between consecutive regenerations; the
// stretch before the first regeneration and the censored tail are left out.
// The standard error is clustered by replica when at least ten replicas
// contribute and taken over single increments otherwise. Throws Error when
// there is no complete increment.
SkeletonEstimate skeleton_estimate(const std::vector<RegenerationRecord>& records);

// Permutation test of exchangeability of the increments within each replica,
// using the strongest of the position trends of displacement and duration.
double exchangeability_p_value(const std::vector<RegenerationRecord>& records, int permutations,
                               std::uint64_t seed);

}  // namespace rwdre
