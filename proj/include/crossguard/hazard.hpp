#ifndef CROSSGUARD_HAZARD_HPP_
#define CROSSGUARD_HAZARD_HPP_

#include "crossguard/core.hpp"

namespace crossguard::hazard {

using core::KinematicState;
using core::Point;

// Axis-aligned danger rectangle anchored to the robot:
//   { (x,y) : anchor.x - ll <= x <= anchor.x + rl,
//             anchor.y - lw <= y <= anchor.y + uw }
struct Zod {
    Point anchor{};
    double ll{0.0};  // left length
    double rl{0.0};  // right length
    double uw{0.0};  // upper width
    double lw{0.0};  // lower width

    Zod() = default;
    Zod(Point anchor_, double ll_, double rl_, double uw_, double lw_);

    double min_x() const { return anchor.x - ll; }
    double max_x() const { return anchor.x + rl; }
    double min_y() const { return anchor.y - lw; }
    double max_y() const { return anchor.y + uw; }
};

// The set of times at which an extrapolated trajectory lies inside the zone.
// Bounded intervals are reported pre-clip: entry may be negative when the
// vehicle is already inside.
class TimeInterval {
public:
    enum class Kind { Empty, Bounded, AlwaysInside };

    static TimeInterval empty() { return TimeInterval(Kind::Empty, 0.0, 0.0); }
    static TimeInterval bounded(double entry, double exit);
    static TimeInterval always_inside() { return TimeInterval(Kind::AlwaysInside, 0.0, 0.0); }

    Kind kind() const { return kind_; }
    bool is_empty() const { return kind_ == Kind::Empty; }
    bool is_bounded() const { return kind_ == Kind::Bounded; }
    bool is_always_inside() const { return kind_ == Kind::AlwaysInside; }

    // Valid only for Bounded intervals.
    double entry() const;
    double exit() const;

private:
    TimeInterval(Kind kind, double entry, double exit) : kind_(kind), entry_(entry), exit_(exit) {}

    Kind kind_;
    double entry_;
    double exit_;
};

bool operator==(const TimeInterval& a, const TimeInterval& b);

enum class HazardTag {
    Safe,      // no present or timely future incursion
    Imminent,  // future entry below the decision threshold
    Active,    // the vehicle is inside the zone now
};

struct HazardDecision {
    HazardTag tag{HazardTag::Safe};
    TimeInterval interval{TimeInterval::empty()};
};

/// Severity order: Safe < Imminent < Active.
bool worse_than(HazardTag a, HazardTag b);

/// Boundary-inclusive membership test.
bool contains(const Zod& zod, const Point& p);

/// Exact incursion window of a constant-velocity trajectory through the zone,
/// computed with the slab method. Per axis a zero velocity component
/// contributes (-inf, +inf) when the coordinate is inside that axis's bounds
/// and nothing otherwise; nonzero components contribute the ordered pair of
/// boundary-crossing times. Windows whose exit lies in the past collapse to
/// Empty. A stationary state inside the zone yields AlwaysInside.
TimeInterval incursion_interval(const Zod& zod, const KinematicState& state);

/// Decision rule over an incursion window. threshold must be > 0.
HazardDecision classify(const TimeInterval& interval, double threshold_seconds);

}  // namespace crossguard::hazard

#endif  // CROSSGUARD_HAZARD_HPP_
