#ifndef CROSSGUARD_CORE_HPP_
#define CROSSGUARD_CORE_HPP_

#include <cstdint>
#include <stdexcept>

namespace crossguard::core {

constexpr double kEarthRadiusMeters = 6371000.0;
constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wrap an angle into [0, 2*pi). Rejects non-finite input.
double normalize_heading(double radians);

// Local planar frame, x east / y north, meters.
struct Point {
    double x{0.0};
    double y{0.0};

    Point() = default;
    Point(double x_, double y_);

    double distance_to(const Point& other) const;
};

bool operator==(const Point& a, const Point& b);

// Position, speed and heading of a moving road user. Heading follows the
// mathematical convention: 0 is +x (east), counterclockwise positive.
struct KinematicState {
    Point pos{};
    double speed{0.0};    // m/s, >= 0
    double heading{0.0};  // rad, normalized to [0, 2*pi)

    KinematicState() = default;
    KinematicState(Point pos_, double speed_, double heading_);
};

// Discrete simulation time base: time = tick_index * tick_duration.
struct SimClock {
    std::uint64_t tick_index{0};
    double tick_duration{0.1};  // seconds, > 0

    SimClock() = default;
    SimClock(std::uint64_t tick, double duration);

    double time() const { return static_cast<double>(tick_index) * tick_duration; }
    void advance() { ++tick_index; }
};

// WGS84 anchor of the local frame.
struct GeoRef {
    double origin_lat{0.0};  // degrees, |lat| <= 90
    double origin_lon{0.0};  // degrees, |lon| <= 180

    GeoRef() = default;
    GeoRef(double lat, double lon);
};

/// Constant-speed, constant-heading extrapolation. Negative t is allowed and
/// walks the trajectory backwards.
Point predict_position(const KinematicState& state, double t_seconds);

/// Equirectangular projection of a WGS84 coordinate into the local frame.
/// Throws std::invalid_argument on out-of-bounds lat/lon.
Point geo_to_local(const GeoRef& ref, double lat_deg, double lon_deg);

/// Inverse of geo_to_local. Returns {lat, lon} in degrees.
struct GeoCoord {
    double lat{0.0};
    double lon{0.0};
};
GeoCoord local_to_geo(const GeoRef& ref, const Point& p);

}  // namespace crossguard::core

#endif  // CROSSGUARD_CORE_HPP_
