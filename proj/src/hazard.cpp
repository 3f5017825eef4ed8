#include "crossguard/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace crossguard::hazard {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Entry/exit times for one axis: position p moving at velocity v through
// [lo, hi]. Zero velocity degenerates to the containment test.
std::pair<double, double> axis_window(double p, double v, double lo, double hi) {
    if (v == 0.0) {
        if (p >= lo && p <= hi) {
            return {-kInf, kInf};
        }
        return {kInf, -kInf};  // empty
    }
    const double t1 = (lo - p) / v;
    const double t2 = (hi - p) / v;
    return {std::min(t1, t2), std::max(t1, t2)};
}
}  // namespace

Zod::Zod(Point anchor_, double ll_, double rl_, double uw_, double lw_)
    : anchor(anchor_), ll(ll_), rl(rl_), uw(uw_), lw(lw_) {
    if (!(ll >= 0.0 && rl >= 0.0 && uw >= 0.0 && lw >= 0.0)) {
        throw std::invalid_argument("zod extents must be >= 0");
    }
    if (!(ll + rl > 0.0) || !(uw + lw > 0.0)) {
        throw std::invalid_argument("zod must have positive extent on both axes");
    }
}

TimeInterval TimeInterval::bounded(double entry, double exit) {
    if (!(entry <= exit)) {
        throw std::invalid_argument("bounded interval requires entry <= exit");
    }
    return TimeInterval(Kind::Bounded, entry, exit);
}

double TimeInterval::entry() const {
    if (kind_ != Kind::Bounded) {
        throw std::logic_error("entry() on non-bounded interval");
    }
    return entry_;
}

double TimeInterval::exit() const {
    if (kind_ != Kind::Bounded) {
        throw std::logic_error("exit() on non-bounded interval");
    }
    return exit_;
}

bool operator==(const TimeInterval& a, const TimeInterval& b) {
    if (a.kind() != b.kind()) {
        return false;
    }
    if (a.kind() != TimeInterval::Kind::Bounded) {
        return true;
    }
    return a.entry() == b.entry() && a.exit() == b.exit();
}

bool worse_than(HazardTag a, HazardTag b) {
    return static_cast<int>(a) > static_cast<int>(b);
}

bool contains(const Zod& zod, const Point& p) {
    return p.x >= zod.min_x() && p.x <= zod.max_x() && p.y >= zod.min_y() && p.y <= zod.max_y();
}

TimeInterval incursion_interval(const Zod& zod, const KinematicState& state) {
    const double vx = state.speed * std::cos(state.heading);
    const double vy = state.speed * std::sin(state.heading);

    const auto [ex, xx] = axis_window(state.pos.x, vx, zod.min_x(), zod.max_x());
    const auto [ey, xy] = axis_window(state.pos.y, vy, zod.min_y(), zod.max_y());

    const double entry = std::max(ex, ey);
    const double exit = std::min(xx, xy);

    if (entry > exit) {
        return TimeInterval::empty();
    }
    if (exit < 0.0) {  // entirely in the past
        return TimeInterval::empty();
    }
    if (entry == -kInf && exit == kInf) {
        // Both components exactly zero, i.e. speed == 0, inside the zone.
        return TimeInterval::always_inside();
    }
    return TimeInterval::bounded(entry, exit);
}

HazardDecision classify(const TimeInterval& interval, double threshold_seconds) {
    if (!(threshold_seconds > 0.0)) {
        throw std::invalid_argument("threshold must be > 0");
    }
    switch (interval.kind()) {
        case TimeInterval::Kind::Empty:
            return {HazardTag::Safe, interval};
        case TimeInterval::Kind::AlwaysInside:
            return {HazardTag::Active, interval};
        case TimeInterval::Kind::Bounded:
            break;
    }
    const double entry = interval.entry();
    const double exit = interval.exit();
    if (entry <= 0.0 && exit >= 0.0) {
        return {HazardTag::Active, interval};
    }
    if (entry > 0.0 && entry < threshold_seconds) {
        return {HazardTag::Imminent, interval};
    }
    return {HazardTag::Safe, interval};
}

}  // namespace crossguard::hazard
