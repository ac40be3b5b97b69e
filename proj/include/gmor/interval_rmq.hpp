// 1D range-maximum query over weighted closed intervals (interval stabbing).
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gmor {

struct WeightedInterval {
    double lo = 0.0;
    double hi = 0.0;
    double weight = 0.0;
};

namespace detail {

// Sweep event. At equal coordinates interval openings (+w) are processed
// before closings (-w) so that touching closed intervals count as overlapping;
// remaining ties fall back to the input index for determinism.
struct StabEvent {
    double x;
    double w;
    std::uint8_t closing;  // 0 = +w, 1 = -w
    std::int32_t index;

    bool operator<(const StabEvent& o) const {
        if (x != o.x) return x < o.x;
        if (closing != o.closing) return closing < o.closing;
        return index < o.index;
    }
};

inline void build_stab_events(const std::vector<WeightedInterval>& intervals,
                              std::vector<StabEvent>& events) {
    events.clear();
    events.reserve(intervals.size() * 2);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        events.push_back({iv.lo, iv.weight, 0, static_cast<std::int32_t>(i)});
        events.push_back({iv.hi, -iv.weight, 1, static_cast<std::int32_t>(i)});
    }
    std::sort(events.begin(), events.end());
}

// Core sweep over pre-sorted events: returns (max accumulated weight,
// leftmost event coordinate attaining it).
inline std::pair<double, double> stab_max_events(const std::vector<StabEvent>& events) {
    double cur = 0.0, best = 0.0, best_at = events.front().x;
    bool first = true;
    for (const auto& e : events) {
        cur += e.w;
        if (first || cur > best) {
            best = cur;
            best_at = e.x;
            first = false;
        }
    }
    return {best, best_at};
}

// Leftmost/rightmost coordinates where the accumulated weight reaches the
// threshold; empty when the profile never gets there.
inline std::optional<std::pair<double, double>> stab_range_events(
    const std::vector<StabEvent>& events, double threshold) {
    double cur = 0.0;
    bool seen = false;
    double lo = 0.0, hi = 0.0;
    for (const auto& e : events) {
        const double prev = cur;
        cur += e.w;
        if (!seen && cur >= threshold) {
            seen = true;
            lo = e.x;
        }
        if (seen && prev >= threshold && cur < threshold) hi = e.x;
    }
    if (!seen) return std::nullopt;
    // Weights are positive, so the profile always drops below any threshold
    // > 0 by the last closing event; threshold <= 0 qualifies the whole span.
    if (cur >= threshold) hi = events.back().x;
    return std::make_pair(lo, hi);
}

}  // namespace detail

/// Maximum accumulated weight over all stabbing points, and the leftmost
/// interval boundary attaining it.
inline std::pair<double, double> interval_stab_max(const std::vector<WeightedInterval>& intervals) {
    if (intervals.empty()) throw std::invalid_argument("interval_stab_max: empty input");
    std::vector<detail::StabEvent> events;
    detail::build_stab_events(intervals, events);
    return detail::stab_max_events(events);
}

/// Leftmost and rightmost boundaries where the accumulated weight is at
/// least `w_threshold`, or empty if it never reaches it.
inline std::optional<std::pair<double, double>> interval_stab_range(
    const std::vector<WeightedInterval>& intervals, double w_threshold) {
    if (intervals.empty()) throw std::invalid_argument("interval_stab_range: empty input");
    std::vector<detail::StabEvent> events;
    detail::build_stab_events(intervals, events);
    return detail::stab_range_events(events, w_threshold);
}

}  // namespace gmor
