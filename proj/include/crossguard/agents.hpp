#ifndef CROSSGUARD_AGENTS_HPP_
#define CROSSGUARD_AGENTS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crossguard/core.hpp"
#include "crossguard/hazard.hpp"
#include "crossguard/messages.hpp"

namespace crossguard::agents {

using core::GeoRef;
using core::KinematicState;
using core::Point;
using core::SimClock;
using hazard::HazardDecision;
using hazard::Zod;
using messages::StationId;
using messages::StationType;
using messages::V2xMessage;

// ---------------------------------------------------------------------------
// Robot mediation state machine
// ---------------------------------------------------------------------------

enum class RobotPhase {
    Waiting,
    IdentifyCrossingIntent,
    IdentifyHazard,
    ReactToHazard,
    Crossing,
    PostInteraction,
};

const char* to_string(RobotPhase phase);

// Organizing interaction stage each specific phase belongs to.
enum class InteractionStage {
    PreInteraction,
    SocialInteraction,
    PostInteraction,
};

InteractionStage stage_of(RobotPhase phase);

enum class GestureKind { Stop, Cross };

struct Gesture {
    GestureKind kind{GestureKind::Stop};
};
struct Say {
    std::string text;
};
struct SendDenm {
    messages::DenmAction action{messages::DenmAction::New};
    std::uint32_t sequence{0};
};
struct SendCam {};

using RobotAction = std::variant<Gesture, Say, SendDenm, SendCam>;

bool is_gesture(const RobotAction& a, GestureKind kind);

struct VehicleTrack {
    KinematicState state;           // as of last_update_tick
    std::uint64_t last_update_tick{0};  // CAM generation tick
};

struct PedestrianSighting {
    std::uint32_t id{0};
    double distance{0.0};  // meters, >= 0
    bool facing_robot{false};
};

struct Observation {
    std::optional<PedestrianSighting> pedestrian_detected;
    std::vector<V2xMessage> delivered_messages;
    std::uint64_t tick{0};
};

// Configuration plus mutable FSM state. Timers are in ticks.
struct RobotState {
    RobotPhase phase{RobotPhase::Waiting};
    std::map<std::uint32_t, VehicleTrack> known_vehicles;
    std::optional<std::uint32_t> active_denm;  // sequence number, ReactToHazard only
    std::optional<std::uint32_t> target_pedestrian;
    Zod zod;
    double threshold{5.0};  // seconds

    double detection_range{2.0};  // meters, pedestrian pickup distance
    std::uint32_t patience_ticks{20};
    std::uint32_t crossing_timeout_ticks{300};
    std::uint32_t cam_cadence_ticks{10};
    std::uint32_t denm_repeat_ticks{10};
    std::uint32_t stale_ticks{20};

    std::uint64_t phase_since{0};      // tick the current phase was entered
    std::uint64_t denm_anchor_tick{0}; // tick the active DENM was first sent
    std::uint32_t next_denm_seq{0};
};

/// Worst hazard classification over the known-vehicle table, each track
/// extrapolated from its generation tick to the current instant.
HazardDecision evaluate_hazard(const RobotState& state, const SimClock& clock);

/// Advances the robot one tick. Ingests delivered CAMs, evicts stale tracks,
/// applies the phase transition rules and returns the actions for this tick.
/// Unknown message variants are ignored.
std::vector<RobotAction> robot_step(RobotState& state,
                                    const Observation& obs,
                                    const SimClock& clock,
                                    const GeoRef& ref);

// ---------------------------------------------------------------------------
// Scripted vehicle (e-bike) agent
// ---------------------------------------------------------------------------

struct SpeedChange {
    std::uint64_t tick{0};
    double speed{0.0};
};

struct EbikeScript {
    StationId station_id{};
    StationType station_type{StationType::Cyclist};
    KinematicState initial;
    std::vector<SpeedChange> speed_changes;
};

inline constexpr const char* kEbikeWarningText = "Pedestrian In Front";

struct EbikeState {
    KinematicState kin;
    std::string display_text;  // empty when no warning shown
    // Active human-presence warnings keyed by (sender, sequence).
    std::map<std::pair<std::uint32_t, std::uint32_t>, bool> active_warnings;
};

/// One tick of e-bike motion and display handling. The display only ever
/// warns; received messages never change the trajectory.
void ebike_step(const EbikeScript& script,
                EbikeState& state,
                std::span<const V2xMessage> delivered,
                const SimClock& clock);

// ---------------------------------------------------------------------------
// Scripted pedestrian agent
// ---------------------------------------------------------------------------

struct PedestrianScript {
    std::uint32_t id{0};
    std::uint64_t spawn_tick{0};
    Point start{};
    double speed{1.5};  // m/s, used for approach and crossing
    bool facing{true};
    bool compliant{true};
    std::uint32_t delay_ticks{0};  // non-compliant: wait this long, then cross
};

enum class PedMode {
    Pending,      // before spawn_tick
    Approaching,  // walking toward the robot
    Waiting,      // at the wait point
    Crossing,     // traversing the zone along -y
    Done,         // exited on the far side
};

const char* to_string(PedMode mode);

inline constexpr double kWaitPointDistance = 1.0;  // meters from the robot

struct PedestrianState {
    Point pos{};
    PedMode mode{PedMode::Pending};
    bool authorized{false};  // a Cross gesture has been observed
    std::uint64_t waiting_since{0};
};

/// One tick of pedestrian behavior. Compliant pedestrians cross only after a
/// Cross gesture; non-compliant ones cross after their scripted delay. Mode
/// transitions consume the tick; movement resumes on the next one.
void pedestrian_step(const PedestrianScript& script,
                     PedestrianState& state,
                     std::span<const RobotAction> robot_actions_visible,
                     const SimClock& clock,
                     const Point& robot_pos,
                     const Zod& zod);

}  // namespace crossguard::agents

#endif  // CROSSGUARD_AGENTS_HPP_
