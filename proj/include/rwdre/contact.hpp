#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwdre/environment.hpp"
#include "rwdre/event_log.hpp"
#include "rwdre/rate_spec.hpp"

namespace rwdre {

// Infection states are stored as an EnvTrajectory with 1 = infected.
using InfectionTrajectory = EnvTrajectory;

// Threshold contact process on a log: a cross heals its site, an arrow at x
// infects x when some site of [x - range, x + range] is infected just before.
struct TcpOptions {
    int range = 0;
    bool exterior_infected = true;  // how sites outside the window count
    double wall_until = -1.0;       // events at wall_site, wall_site + 1 up to this time are ignored
    Site wall_site = 0;
};

InfectionTrajectory run_tcp(const EventLog& log, const SpinConfig& initial, const TcpOptions& options);

struct DiscrepancyReport {
    std::size_t checks = 0;
    std::size_t violations = 0;
    std::optional<Site> first_site;
    std::optional<double> first_time;

    bool clean() const noexcept { return violations == 0; }
};

struct TcpRun {
    InfectionTrajectory infection;
    DiscrepancyReport report;
};

// Runs two coupled triples from init_a and init_b and the contact process from
// the all-infected state on one log, and records every event after which a
// healthy site holds different states in the two triples (any coordinate).
TcpRun run_tcp_with_discrepancy(const EventLog& log, const RateSpec& spec, const SpinConfig& init_a,
                                const SpinConfig& init_b);

struct ConditionedRun {
    InfectionTrajectory conditioned;    // from all infected except the trap sites
    InfectionTrajectory unconditioned;  // from all infected, same log
    DiscrepancyReport report;
    std::optional<double> domination_violation;  // first time conditioned > unconditioned
};

// Same check for triples that keep their trap at the origin up to L: `log`
// must already have the trap-breaking events at 0 and 1 removed up to L.
// The conditioned infection treats the trap sites as a wall until L.
ConditionedRun run_conditioned_pair(const EventLog& log, const RateSpec& spec, const SpinConfig& init_a,
                                    const SpinConfig& init_b, double L);

struct ExtinctionReport {
    std::vector<double> times;     // last time the box held an infection
    std::vector<bool> censored;    // still infected at the horizon
    std::size_t domination_violations = 0;  // threshold process outside the linear one
    double tail_slope = 0.0;       // minus the fitted tail rate
    double tail_slope_lo = 0.0;
    double tail_slope_hi = 0.0;
    double threshold = 0.0;        // start of the fitted tail
};

struct ExtinctionParams {
    Site window = 50;   // infection lives on [-window, window], healthy outside
    Site box = 0;       // extinction is watched on [-box, box]
    double horizon = 20.0;
    std::size_t replicas = 1000;
    std::uint64_t seed = 0;
};

// Extinction of the threshold process started fully infected, coupled to a
// linear contact process: recoveries at rate c0 + c1 per site, and for every
// ordered neighbour pair (y, x) an infection attempt at rate lambda0 + lambda1.
// The threshold process takes an attempt only from the lowest-index infected
// neighbour of x, the linear one from any infected y.
ExtinctionReport extinction_stats(const RateSpec& spec, const ExtinctionParams& params);

}  // namespace rwdre
