#pragma once

#include <cstdint>
#include <utility>

#include "rwdre/environment.hpp"
#include "rwdre/event_log.hpp"
#include "rwdre/rate_spec.hpp"

namespace rwdre {

// Direct continuous-time chain: each site carries an exponential clock at the
// bound c_j + lambda_j for its current target j, thinned by the patch rate.
EnvTrajectory simulate_env(const RateSpec& spec, const SpinConfig& init, double horizon, std::uint64_t seed);

// Deterministic evolution through a graphical representation. A j-cross sets
// the site to j; a j-arrow sets it to j iff its mark is below p_j of the
// pre-event patch. The lower coordinate takes every 0-arrow and no 1-arrow,
// the upper coordinate the reverse.
EnvTrajectory evolve_from_log(const SpinConfig& init, const EventLog& log, const RateSpec& spec,
                              Coordinate coordinate = Coordinate::middle);

// The ordered triple started from one configuration, on a shared log.
TripleTrajectory coupled_triple_evolve(const SpinConfig& init, const RateSpec& spec, const EventLog& log);
TripleTrajectory coupled_triple_evolve(const SpinConfig& init, const RateSpec& spec, double horizon,
                                       std::uint64_t seed);
// The same coupling driven by the symbolic rate table instead of a log.
TripleTrajectory coupled_triple_evolve_direct(const SpinConfig& init, const RateSpec& spec, double horizon,
                                              std::uint64_t seed);

// Two triples on a shared log; this realises the pair coupling table.
std::pair<TripleTrajectory, TripleTrajectory> coupled_pair_evolve(const SpinConfig& init_a,
                                                                  const SpinConfig& init_b,
                                                                  const RateSpec& spec, const EventLog& log);
std::pair<TripleTrajectory, TripleTrajectory> coupled_pair_evolve(const SpinConfig& init_a,
                                                                  const SpinConfig& init_b,
                                                                  const RateSpec& spec, double horizon,
                                                                  std::uint64_t seed);
// Pair coupling driven by the completed symbolic pair table.
std::pair<TripleTrajectory, TripleTrajectory> coupled_pair_evolve_direct(const SpinConfig& init_a,
                                                                         const SpinConfig& init_b,
                                                                         const RateSpec& spec, double horizon,
                                                                         std::uint64_t seed);

// Channels whose events could move a site away from `held`.
inline constexpr std::uint8_t channels_leaving(int held) noexcept {
    return held == 1 ? static_cast<std::uint8_t>(channel_bit(Channel::cross0) | channel_bit(Channel::arrow0))
                     : static_cast<std::uint8_t>(channel_bit(Channel::cross1) | channel_bit(Channel::arrow1));
}

// Deletes the events that could break the trap at (origin, origin+1) during [0, L].
void remove_trap_breaking_events(EventLog& log, double L, Site origin = 0);

// Triple conditioned to keep its trap at the origin through [0, L]: the
// trap-breaking events at sites 0 and 1 are removed up to L.
TripleTrajectory simulate_conditioned_env(const RateSpec& spec, const SpinConfig& init, double L,
                                          const EventLog& log);
TripleTrajectory simulate_conditioned_env(const RateSpec& spec, const SpinConfig& init, double L, double horizon,
                                          std::uint64_t seed);

}  // namespace rwdre
