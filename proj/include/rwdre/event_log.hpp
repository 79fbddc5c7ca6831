#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rwdre/rate_spec.hpp"

namespace rwdre {

// The four Poisson streams of the graphical representation at one site.
// The numeric value doubles as the stream id used to break time ties.
enum class Channel : std::uint8_t { cross0 = 0, cross1 = 1, arrow0 = 2, arrow1 = 3 };

inline constexpr int target_of(Channel ch) noexcept { return static_cast<int>(ch) & 1; }
inline constexpr bool is_arrow(Channel ch) noexcept { return static_cast<int>(ch) >= 2; }
inline constexpr std::uint8_t channel_bit(Channel ch) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<int>(ch));
}

struct ChannelRates {
    std::array<double, 4> rate{};  // indexed by Channel

    static ChannelRates from_spec(const RateSpec& spec) {
        return ChannelRates{{spec.c0, spec.c1, spec.lambda0, spec.lambda1}};
    }
    double total() const noexcept { return rate[0] + rate[1] + rate[2] + rate[3]; }
};

struct SourceEvent {
    double time;
    Channel channel;
    double mark;  // uniform mark for arrows, 0 for crosses
};

// Answers "did any event on these channels hit site x during (t0, t1]?".
// Implemented by both the lazy source and the materialised log so that
// regeneration probes work with either backend.
class EventQuery {
public:
    virtual ~EventQuery() = default;
    virtual bool any_event(Site x, double t0, double t1, std::uint8_t channel_mask) const = 0;
};

// Lazily generated graphical representation on all of Z. Events of site x in
// the unit block [n, n+1) come from a stream seeded by (seed, x, n), so any
// block can be produced on demand and always comes out the same.
class GraphicalSource final : public EventQuery {
public:
    GraphicalSource(ChannelRates rates, std::uint64_t seed) : rates_(rates), seed_(seed) {}

    const ChannelRates& rates() const noexcept { return rates_; }
    std::uint64_t seed() const noexcept { return seed_; }

    // Appends the events of block n at site x in time order.
    void block(Site x, std::int64_t n, std::vector<SourceEvent>& out) const;

    bool any_event(Site x, double t0, double t1, std::uint8_t channel_mask) const override;

private:
    ChannelRates rates_;
    std::uint64_t seed_;
};

struct LogEvent {
    double time;
    Channel channel;

    bool operator==(const LogEvent&) const = default;
};

struct SiteLog {
    std::vector<LogEvent> events;  // time-ordered, all channels merged
    std::vector<double> marks;     // consumed in order by arrow events

    bool operator==(const SiteLog&) const = default;
};

// One entry of the global schedule: events of all sites ordered by time, ties
// broken by (site, channel).
struct ScheduledEvent {
    double time;
    Site site;
    Channel channel;
    std::uint32_t mark_index;  // meaningful for arrows only
};

// Materialised graphical representation on a window and time horizon.
class EventLog final : public EventQuery {
public:
    EventLog(Site lo, Site hi, double horizon);

    Site lo() const noexcept { return lo_; }
    Site hi() const noexcept { return hi_; }
    double horizon() const noexcept { return horizon_; }
    bool contains(Site x) const noexcept { return x >= lo_ && x <= hi_; }

    const SiteLog& site(Site x) const;
    SiteLog& site(Site x);

    // Removes events on the masked channels at site x with time <= until.
    // Marks of removed arrows are dropped with them.
    void remove_events(Site x, std::uint8_t channel_mask, double until);

    std::vector<ScheduledEvent> schedule() const;
    std::size_t event_count() const;

    bool any_event(Site x, double t0, double t1, std::uint8_t channel_mask) const override;

    void write(std::ostream& os) const;
    static EventLog read(std::istream& is);

    bool operator==(const EventLog& other) const {
        return lo_ == other.lo_ && hi_ == other.hi_ && horizon_ == other.horizon_ && sites_ == other.sites_;
    }

private:
    Site lo_;
    Site hi_;
    double horizon_;
    std::vector<SiteLog> sites_;
};

// Crosses at rate c_j and arrows at rate lambda_j on every site of [lo, hi],
// drawn from the same per-block streams as GraphicalSource(spec rates, seed).
EventLog build_event_log(const ChannelRates& rates, Site lo, Site hi, double horizon, std::uint64_t seed);
EventLog build_event_log(const RateSpec& spec, Site lo, Site hi, double horizon, std::uint64_t seed);

}  // namespace rwdre
