#pragma once

#include <optional>
#include <string>

#include "rwdre/environment.hpp"
#include "rwdre/rate_spec.hpp"
#include "rwdre/walk.hpp"

namespace rwdre {

enum class Side { plus, minus };

// Space-time cone |x - apex| <= m (t - apex_time) + R.
struct ConeSpec {
    double m = 1.0;
    double R = 0.0;

    void validate() const;
};

// Cone exits measured in elapsed time from the path's start. An infinite
// value with the matching flag set means "not observed before the horizon".
struct ConeStats {
    double S = kNever;      // first exit
    double S_hat = 0.0;     // last exit (0 when the path never leaves)
    double horizon = 0.0;   // observed duration
    bool S_censored = true;
    bool S_hat_censored = false;
};

// H+ sits on a trap of the dominating system and waits for the hole to its
// right to fill, then moves to the next trap on the right. H- mirrors this on
// the dominated system: it waits for its particle to empty and moves left.
// If the trigger already holds at start_time, the first move is the walk's
// starting position rather than a jump.
WalkPath run_envelope(Side side, const Environment& env, double horizon, double start_time = 0.0,
                      Site origin = 0);

// Mean drift of the envelope at its equilibrium: waiting rate times mean jump.
double envelope_drift(const RateSpec& spec, Side side);
// Twice the larger envelope drift, so the walk stays in the cone with
// probability bounded away from zero.
double default_cone_slope(const RateSpec& spec);

// Exits of the path from the cone with apex (start_time, origin).
ConeStats cone_exit(const WalkPath& path, const ConeSpec& cone, double horizon);

// First exit from the cone with apex (apex_time, apex_site) strictly after
// apex_time and no later than until; returns elapsed time since the apex.
std::optional<double> first_cone_exit(const WalkPath& path, double apex_time, Site apex_site,
                                      const ConeSpec& cone, double until);

struct SandwichResult {
    bool ok = true;
    std::optional<double> first_violation;
    std::string detail;
};

// Checks lower <= z <= upper at the start and at every jump time of the three.
SandwichResult sandwich_check(const WalkPath& z, const WalkPath& lower, const WalkPath& upper);

}  // namespace rwdre
