#include "crossguard/core.hpp"

#include <cmath>
#include <string>

namespace crossguard::core {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

}  // namespace

double normalize_heading(double radians) {
    require_finite(radians, "heading");
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) {  // fmod rounding can land exactly on 2*pi
        r = 0.0;
    }
    return r;
}

Point::Point(double x_, double y_) : x(x_), y(y_) {
    require_finite(x_, "point.x");
    require_finite(y_, "point.y");
}

double Point::distance_to(const Point& other) const {
    return std::hypot(x - other.x, y - other.y);
}

bool operator==(const Point& a, const Point& b) {
    return a.x == b.x && a.y == b.y;
}

KinematicState::KinematicState(Point pos_, double speed_, double heading_)
    : pos(pos_), speed(speed_), heading(normalize_heading(heading_)) {
    require_finite(speed_, "speed");
    if (speed_ < 0.0) {
        throw std::invalid_argument("speed must be >= 0");
    }
}

SimClock::SimClock(std::uint64_t tick, double duration) : tick_index(tick), tick_duration(duration) {
    require_finite(duration, "tick_duration");
    if (duration <= 0.0) {
        throw std::invalid_argument("tick_duration must be > 0");
    }
}

GeoRef::GeoRef(double lat, double lon) : origin_lat(lat), origin_lon(lon) {
    require_finite(lat, "latitude");
    require_finite(lon, "longitude");
    if (std::abs(lat) > 90.0 || std::abs(lon) > 180.0) {
        throw std::invalid_argument("geo reference outside WGS84 bounds");
    }
}

Point predict_position(const KinematicState& state, double t_seconds) {
    require_finite(t_seconds, "t");
    return Point(state.pos.x + state.speed * t_seconds * std::cos(state.heading),
                 state.pos.y + state.speed * t_seconds * std::sin(state.heading));
}

Point geo_to_local(const GeoRef& ref, double lat_deg, double lon_deg) {
    require_finite(lat_deg, "latitude");
    require_finite(lon_deg, "longitude");
    if (std::abs(lat_deg) > 90.0 || std::abs(lon_deg) > 180.0) {
        throw std::invalid_argument("lat/lon outside WGS84 bounds");
    }
    const double deg = M_PI / 180.0;
    const double x = kEarthRadiusMeters * (lon_deg - ref.origin_lon) * deg * std::cos(ref.origin_lat * deg);
    const double y = kEarthRadiusMeters * (lat_deg - ref.origin_lat) * deg;
    return Point(x, y);
}

GeoCoord local_to_geo(const GeoRef& ref, const Point& p) {
    const double deg = M_PI / 180.0;
    GeoCoord out;
    out.lat = ref.origin_lat + p.y / (kEarthRadiusMeters * deg);
    out.lon = ref.origin_lon + p.x / (kEarthRadiusMeters * deg * std::cos(ref.origin_lat * deg));
    return out;
}

}  // namespace crossguard::core
