#include "crossguard/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace crossguard::harness {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct FieldParser {
    std::size_t line;
    std::string key;

    double number(const std::string& value) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) {
                throw ParseError(line, key, "trailing characters after number");
            }
            if (!std::isfinite(v)) {
                throw ParseError(line, key, "value must be finite");
            }
            return v;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(line, key, "expected a number, got '" + value + "'");
        }
    }

    std::uint64_t unsigned_int(const std::string& value) const {
        const double v = number(value);
        if (v < 0.0 || v != std::floor(v)) {
            throw ParseError(line, key, "expected a non-negative integer");
        }
        return static_cast<std::uint64_t>(v);
    }

    bool boolean(const std::string& value) const {
        if (value == "true") return true;
        if (value == "false") return false;
        throw ParseError(line, key, "expected true or false");
    }

    std::pair<double, double> pair(const std::string& value) const {
        std::istringstream in(value);
        std::string a, b, extra;
        in >> a >> b;
        if (b.empty() || (in >> extra)) {
            throw ParseError(line, key, "expected two numbers");
        }
        return {number(a), number(b)};
    }

    std::array<double, 4> quad(const std::string& value) const {
        std::istringstream in(value);
        std::array<double, 4> out{};
        std::string tok;
        for (double& slot : out) {
            if (!(in >> tok)) {
                throw ParseError(line, key, "expected four numbers (ll rl uw lw)");
            }
            slot = number(tok);
        }
        if (in >> tok) {
            throw ParseError(line, key, "expected four numbers (ll rl uw lw)");
        }
        return out;
    }
};

enum class Section { Top, Robot, Channel, Timers, Vehicle, Pedestrian };

void fail_validation(const std::string& field, const std::string& reason) {
    throw ValidationError(field, reason);
}

}  // namespace

ParseError::ParseError(std::size_t line, std::string field, const std::string& what)
    : ScenarioError("parse error at line " + std::to_string(line) + ", field '" + field + "': " + what),
      line_(line),
      field_(std::move(field)) {}

ValidationError::ValidationError(std::string field, std::string reason)
    : ScenarioError("invalid scenario: field '" + field + "': " + reason),
      field_(std::move(field)),
      reason_(std::move(reason)) {}

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    Section section = Section::Top;
    agents::EbikeScript* vehicle = nullptr;
    agents::PedestrianScript* pedestrian = nullptr;
    // KinematicState pieces are collected raw and assembled during validation.
    struct RawVehicle {
        Point start{};
        double speed{0.0};
        double heading{0.0};
    };
    std::vector<RawVehicle> raw_vehicles;

    std::istringstream in(text);
    std::string raw_line;
    std::size_t line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string line = raw_line;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(line_no, line, "unterminated section header");
            }
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name == "robot") {
                section = Section::Robot;
            } else if (name == "channel") {
                section = Section::Channel;
            } else if (name == "timers") {
                section = Section::Timers;
            } else if (name == "vehicle") {
                section = Section::Vehicle;
                sc.vehicles.emplace_back();
                raw_vehicles.emplace_back();
                vehicle = &sc.vehicles.back();
            } else if (name == "pedestrian") {
                section = Section::Pedestrian;
                sc.pedestrians.emplace_back();
                pedestrian = &sc.pedestrians.back();
            } else {
                throw ParseError(line_no, name, "unknown section");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, line, "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError(line_no, key.empty() ? line : key, "empty key or value");
        }
        const FieldParser f{line_no, key};

        switch (section) {
            case Section::Top: {
                if (key == "name") {
                    sc.name = value;
                } else if (key == "tick_duration") {
                    sc.tick_duration = f.number(value);
                } else if (key == "duration_ticks") {
                    sc.duration_ticks = f.unsigned_int(value);
                } else if (key == "seed") {
                    sc.seed = f.unsigned_int(value);
                } else if (key == "geo_ref") {
                    const auto [lat, lon] = f.pair(value);
                    sc.geo_ref.origin_lat = lat;
                    sc.geo_ref.origin_lon = lon;
                } else {
                    throw ParseError(line_no, key, "unknown top-level field");
                }
                break;
            }
            case Section::Robot: {
                if (key == "station_id") {
                    sc.robot.station_id = messages::StationId(static_cast<std::uint32_t>(f.unsigned_int(value)));
                } else if (key == "position") {
                    const auto [x, y] = f.pair(value);
                    sc.robot.position = Point(x, y);
                } else if (key == "zod") {
                    const auto q = f.quad(value);
                    sc.robot.zod_ll = q[0];
                    sc.robot.zod_rl = q[1];
                    sc.robot.zod_uw = q[2];
                    sc.robot.zod_lw = q[3];
                } else if (key == "threshold") {
                    sc.robot.threshold = f.number(value);
                } else if (key == "detection_range") {
                    sc.robot.detection_range = f.number(value);
                } else {
                    throw ParseError(line_no, key, "unknown robot field");
                }
                break;
            }
            case Section::Channel: {
                if (key == "range") {
                    sc.channel.range = f.number(value);
                } else if (key == "loss_probability") {
                    sc.channel.loss_probability = f.number(value);
                } else if (key == "latency_ticks") {
                    sc.channel.latency_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else if (key == "jitter_ticks") {
                    sc.channel.jitter_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else {
                    throw ParseError(line_no, key, "unknown channel field");
                }
                break;
            }
            case Section::Timers: {
                if (key == "patience_ticks") {
                    sc.timers.patience_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else if (key == "crossing_timeout_ticks") {
                    sc.timers.crossing_timeout_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else if (key == "cam_cadence_ticks") {
                    sc.timers.cam_cadence_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else if (key == "denm_repeat_ticks") {
                    sc.timers.denm_repeat_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else if (key == "stale_ticks") {
                    sc.timers.stale_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else {
                    throw ParseError(line_no, key, "unknown timers field");
                }
                break;
            }
            case Section::Vehicle: {
                RawVehicle& raw = raw_vehicles.back();
                if (key == "station_id") {
                    vehicle->station_id = messages::StationId(static_cast<std::uint32_t>(f.unsigned_int(value)));
                } else if (key == "type") {
                    const auto type = messages::station_type_from_string(value);
                    if (!type || !messages::is_vehicle(*type)) {
                        throw ParseError(line_no, key, "expected a vehicle station type");
                    }
                    vehicle->station_type = *type;
                } else if (key == "start") {
                    const auto [x, y] = f.pair(value);
                    raw.start = Point(x, y);
                } else if (key == "speed") {
                    raw.speed = f.number(value);
                } else if (key == "heading") {
                    raw.heading = f.number(value);
                } else if (key == "speed_change") {
                    const auto [tick, speed] = f.pair(value);
                    if (tick < 0.0 || tick != std::floor(tick)) {
                        throw ParseError(line_no, key, "speed_change tick must be a non-negative integer");
                    }
                    vehicle->speed_changes.push_back({static_cast<std::uint64_t>(tick), speed});
                } else {
                    throw ParseError(line_no, key, "unknown vehicle field");
                }
                break;
            }
            case Section::Pedestrian: {
                if (key == "station_id") {
                    pedestrian->id = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else if (key == "spawn_tick") {
                    pedestrian->spawn_tick = f.unsigned_int(value);
                } else if (key == "start") {
                    const auto [x, y] = f.pair(value);
                    pedestrian->start = Point(x, y);
                } else if (key == "speed") {
                    pedestrian->speed = f.number(value);
                } else if (key == "facing") {
                    pedestrian->facing = f.boolean(value);
                } else if (key == "compliant") {
                    pedestrian->compliant = f.boolean(value);
                } else if (key == "delay_ticks") {
                    pedestrian->delay_ticks = static_cast<std::uint32_t>(f.unsigned_int(value));
                } else {
                    throw ParseError(line_no, key, "unknown pedestrian field");
                }
                break;
            }
        }
    }

    // Assemble kinematic states; negative speeds surface as ValidationError.
    for (std::size_t i = 0; i < sc.vehicles.size(); ++i) {
        const RawVehicle& raw = raw_vehicles[i];
        if (raw.speed < 0.0 || !std::isfinite(raw.speed)) {
            fail_validation("vehicle.speed", "speed must be >= 0");
        }
        sc.vehicles[i].initial = core::KinematicState(raw.start, raw.speed, raw.heading);
    }

    validate_scenario(sc);
    return sc;
}

void validate_scenario(const Scenario& sc) {
    if (!(sc.tick_duration > 0.0) || !std::isfinite(sc.tick_duration)) {
        fail_validation("tick_duration", "must be > 0");
    }
    if (sc.duration_ticks == 0) {
        fail_validation("duration_ticks", "must be > 0");
    }
    if (std::abs(sc.geo_ref.origin_lat) > 90.0 || std::abs(sc.geo_ref.origin_lon) > 180.0) {
        fail_validation("geo_ref", "outside WGS84 bounds");
    }
    if (!(sc.robot.threshold > 0.0)) {
        fail_validation("robot.threshold", "must be > 0");
    }
    if (!(sc.robot.detection_range > 0.0)) {
        fail_validation("robot.detection_range", "must be > 0");
    }
    try {
        (void)sc.zod();
    } catch (const std::invalid_argument& e) {
        fail_validation("robot.zod", e.what());
    }
    if (!(sc.channel.range > 0.0)) {
        fail_validation("channel.range", "must be > 0");
    }
    if (sc.channel.loss_probability < 0.0 || sc.channel.loss_probability > 1.0) {
        fail_validation("channel.loss_probability", "must be in [0, 1]");
    }

    std::set<std::uint32_t> ids;
    auto claim_id = [&ids](std::uint32_t id, const char* field) {
        if (!ids.insert(id).second) {
            fail_validation(field, "duplicate station id " + std::to_string(id));
        }
    };
    claim_id(sc.robot.station_id.value, "robot.station_id");
    for (const auto& v : sc.vehicles) {
        claim_id(v.station_id.value, "vehicle.station_id");
        if (v.initial.speed < 0.0) {
            fail_validation("vehicle.speed", "speed must be >= 0");
        }
        for (const auto& change : v.speed_changes) {
            if (change.speed < 0.0 || !std::isfinite(change.speed)) {
                fail_validation("vehicle.speed_change", "speed must be >= 0");
            }
        }
    }
    for (const auto& p : sc.pedestrians) {
        claim_id(p.id, "pedestrian.station_id");
        if (p.speed < 0.0 || !std::isfinite(p.speed)) {
            fail_validation("pedestrian.speed", "speed must be >= 0");
        }
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace crossguard::harness
