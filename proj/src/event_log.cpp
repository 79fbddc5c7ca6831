#include "rwdre/event_log.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "rwdre/random.hpp"

namespace rwdre {

void GraphicalSource::block(Site x, std::int64_t n, std::vector<SourceEvent>& out) const {
    const double total = rates_.total();
    if (total <= 0.0) return;
    Rng rng(derive_seed(seed_, {site_label(x), static_cast<std::uint64_t>(n)}));
    const double start = static_cast<double>(n);
    const double end = start + 1.0;
    double t = start;
    for (;;) {
        t += rng.exponential(total);
        if (t >= end) break;
        double pick = rng.uniform() * total;
        int ch = 0;
        while (ch < 3 && pick >= rates_.rate[ch]) {
            pick -= rates_.rate[ch];
            ++ch;
        }
        // Rounding can leave `pick` past the last non-empty channel.
        while (rates_.rate[ch] == 0.0) --ch;
        const auto channel = static_cast<Channel>(ch);
        const double mark = is_arrow(channel) ? rng.uniform() : 0.0;
        out.push_back({t, channel, mark});
    }
}

bool GraphicalSource::any_event(Site x, double t0, double t1, std::uint8_t channel_mask) const {
    if (!(t1 > t0)) return false;
    std::vector<SourceEvent> events;
    const auto first = static_cast<std::int64_t>(std::floor(std::max(t0, 0.0)));
    const auto last = static_cast<std::int64_t>(std::ceil(t1));
    for (std::int64_t n = first; n < last; ++n) {
        events.clear();
        block(x, n, events);
        for (const auto& e : events) {
            if (e.time > t0 && e.time <= t1 && (channel_mask & channel_bit(e.channel))) return true;
        }
    }
    return false;
}

EventLog::EventLog(Site lo, Site hi, double horizon)
    : lo_(lo), hi_(hi), horizon_(horizon), sites_(static_cast<std::size_t>(hi - lo + 1)) {
    if (hi < lo) throw ConfigError("window", "hi < lo");
    if (!(horizon >= 0.0)) throw ConfigError("horizon", "must be non-negative");
}

const SiteLog& EventLog::site(Site x) const {
    if (!contains(x)) throw WindowOverrun("event log has no site " + std::to_string(x));
    return sites_[static_cast<std::size_t>(x - lo_)];
}

SiteLog& EventLog::site(Site x) {
    if (!contains(x)) throw WindowOverrun("event log has no site " + std::to_string(x));
    return sites_[static_cast<std::size_t>(x - lo_)];
}

void EventLog::remove_events(Site x, std::uint8_t channel_mask, double until) {
    SiteLog& log = site(x);
    SiteLog kept;
    std::size_t mark = 0;
    for (const auto& e : log.events) {
        const bool drop = e.time <= until && (channel_mask & channel_bit(e.channel));
        if (!drop) kept.events.push_back(e);
        if (is_arrow(e.channel)) {
            if (!drop && mark < log.marks.size()) kept.marks.push_back(log.marks[mark]);
            ++mark;
        }
    }
    log = std::move(kept);
}

std::vector<ScheduledEvent> EventLog::schedule() const {
    std::vector<ScheduledEvent> out;
    out.reserve(event_count());
    for (Site x = lo_; x <= hi_; ++x) {
        std::uint32_t mark = 0;
        for (const auto& e : site(x).events) {
            out.push_back({e.time, x, e.channel, is_arrow(e.channel) ? mark++ : 0u});
        }
    }
    std::sort(out.begin(), out.end(), [](const ScheduledEvent& a, const ScheduledEvent& b) {
        if (a.time != b.time) return a.time < b.time;
        if (a.site != b.site) return a.site < b.site;
        return a.channel < b.channel;
    });
    return out;
}

std::size_t EventLog::event_count() const {
    std::size_t n = 0;
    for (const auto& s : sites_) n += s.events.size();
    return n;
}

bool EventLog::any_event(Site x, double t0, double t1, std::uint8_t channel_mask) const {
    const auto& events = site(x).events;
    auto it = std::upper_bound(events.begin(), events.end(), t0,
                               [](double t, const LogEvent& e) { return t < e.time; });
    for (; it != events.end() && it->time <= t1; ++it) {
        if (channel_mask & channel_bit(it->channel)) return true;
    }
    return false;
}

namespace {

constexpr char kMagic[8] = {'R', 'W', 'D', 'R', 'E', 'L', 'O', 'G'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T take(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw Error("truncated event log stream");
    return value;
}

}  // namespace

void EventLog::write(std::ostream& os) const {
    os.write(kMagic, sizeof kMagic);
    put(os, kFormatVersion);
    put(os, static_cast<std::int64_t>(lo_));
    put(os, static_cast<std::int64_t>(hi_));
    put(os, horizon_);
    for (const auto& s : sites_) {
        put(os, static_cast<std::uint64_t>(s.events.size()));
        for (const auto& e : s.events) {
            put(os, e.time);
            put(os, static_cast<std::uint8_t>(e.channel));
        }
        put(os, static_cast<std::uint64_t>(s.marks.size()));
        for (double m : s.marks) put(os, m);
    }
}

EventLog EventLog::read(std::istream& is) {
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not an event log stream");
    if (take<std::uint32_t>(is) != kFormatVersion) throw Error("unsupported event log version");
    const auto lo = take<std::int64_t>(is);
    const auto hi = take<std::int64_t>(is);
    const auto horizon = take<double>(is);
    EventLog log(lo, hi, horizon);
    for (auto& s : log.sites_) {
        const auto n = take<std::uint64_t>(is);
        s.events.resize(n);
        for (auto& e : s.events) {
            e.time = take<double>(is);
            const auto ch = take<std::uint8_t>(is);
            if (ch > 3) throw Error("corrupt channel id in event log");
            e.channel = static_cast<Channel>(ch);
        }
        s.marks.resize(take<std::uint64_t>(is));
        for (auto& m : s.marks) m = take<double>(is);
    }
    return log;
}

EventLog build_event_log(const ChannelRates& rates, Site lo, Site hi, double horizon, std::uint64_t seed) {
    EventLog log(lo, hi, horizon);
    const GraphicalSource source(rates, seed);
    std::vector<SourceEvent> block;
    const auto blocks = static_cast<std::int64_t>(std::ceil(horizon));
    for (Site x = lo; x <= hi; ++x) {
        SiteLog& s = log.site(x);
        for (std::int64_t n = 0; n < blocks; ++n) {
            block.clear();
            source.block(x, n, block);
            for (const auto& e : block) {
                if (e.time > horizon) break;
                s.events.push_back({e.time, e.channel});
                if (is_arrow(e.channel)) s.marks.push_back(e.mark);
            }
        }
    }
    return log;
}

EventLog build_event_log(const RateSpec& spec, Site lo, Site hi, double horizon, std::uint64_t seed) {
    spec.validate();
    return build_event_log(ChannelRates::from_spec(spec), lo, hi, horizon, seed);
}

}  // namespace rwdre
