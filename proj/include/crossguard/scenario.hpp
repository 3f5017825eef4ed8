#ifndef CROSSGUARD_SCENARIO_HPP_
#define CROSSGUARD_SCENARIO_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crossguard/agents.hpp"
#include "crossguard/core.hpp"
#include "crossguard/netsim.hpp"

namespace crossguard::harness {

using core::GeoRef;
using core::Point;

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Syntactic problem in a scenario file.
class ParseError : public ScenarioError {
public:
    ParseError(std::size_t line, std::string field, const std::string& what);

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Structurally valid file with impossible values.
class ValidationError : public ScenarioError {
public:
    ValidationError(std::string field, std::string reason);

    const std::string& field() const { return field_; }
    const std::string& reason() const { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

struct RobotSetup {
    messages::StationId station_id{};
    Point position{};
    double zod_ll{30.0};
    double zod_rl{30.0};
    double zod_uw{0.0};
    double zod_lw{30.0};
    double threshold{5.0};
    double detection_range{2.0};
};

struct Timers {
    std::uint32_t patience_ticks{20};
    std::uint32_t crossing_timeout_ticks{300};
    std::uint32_t cam_cadence_ticks{10};
    std::uint32_t denm_repeat_ticks{10};
    std::uint32_t stale_ticks{20};
};

struct ChannelSetup {
    double range{400.0};
    double loss_probability{0.0};
    std::uint32_t latency_ticks{0};
    std::uint32_t jitter_ticks{0};
};

struct Scenario {
    std::string name;
    GeoRef geo_ref{};
    double tick_duration{0.1};
    std::uint64_t duration_ticks{600};
    std::uint64_t seed{0};
    RobotSetup robot;
    Timers timers;
    ChannelSetup channel;
    std::vector<agents::EbikeScript> vehicles;
    std::vector<agents::PedestrianScript> pedestrians;

    hazard::Zod zod() const {
        return hazard::Zod(robot.position, robot.zod_ll, robot.zod_rl, robot.zod_uw, robot.zod_lw);
    }
};

/// Parses scenario text. Throws ParseError / ValidationError.
Scenario parse_scenario(const std::string& text);

/// Loads and validates a scenario file.
Scenario load_scenario(const std::string& path);

/// Re-checks all invariants of an in-memory scenario. Throws ValidationError.
void validate_scenario(const Scenario& scenario);

}  // namespace crossguard::harness

#endif  // CROSSGUARD_SCENARIO_HPP_
