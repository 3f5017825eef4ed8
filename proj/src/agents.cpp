#include "crossguard/agents.hpp"

#include <algorithm>
#include <cmath>

namespace crossguard::agents {

using hazard::HazardTag;
using hazard::TimeInterval;
using messages::Cam;
using messages::Denm;
using messages::DenmAction;
using messages::DenmCause;

const char* to_string(RobotPhase phase) {
    switch (phase) {
        case RobotPhase::Waiting: return "Waiting";
        case RobotPhase::IdentifyCrossingIntent: return "IdentifyCrossingIntent";
        case RobotPhase::IdentifyHazard: return "IdentifyHazard";
        case RobotPhase::ReactToHazard: return "ReactToHazard";
        case RobotPhase::Crossing: return "Crossing";
        case RobotPhase::PostInteraction: return "PostInteraction";
    }
    return "unknown";
}

InteractionStage stage_of(RobotPhase phase) {
    switch (phase) {
        case RobotPhase::Waiting:
        case RobotPhase::IdentifyCrossingIntent:
            return InteractionStage::PreInteraction;
        case RobotPhase::IdentifyHazard:
        case RobotPhase::ReactToHazard:
        case RobotPhase::Crossing:
            return InteractionStage::SocialInteraction;
        case RobotPhase::PostInteraction:
            return InteractionStage::PostInteraction;
    }
    return InteractionStage::PreInteraction;
}

bool is_gesture(const RobotAction& a, GestureKind kind) {
    const Gesture* g = std::get_if<Gesture>(&a);
    return g != nullptr && g->kind == kind;
}

namespace {

void ingest_cams(RobotState& state, const Observation& obs, const GeoRef& ref) {
    for (const V2xMessage& msg : obs.delivered_messages) {
        if (!msg.is_cam()) {
            continue;  // DENMs/CPMs/stubs carry nothing the mediation FSM consumes
        }
        const Cam& cam = msg.cam();
        if (!messages::is_vehicle(cam.station_type)) {
            continue;
        }
        const auto it = state.known_vehicles.find(cam.station_id.value);
        if (it != state.known_vehicles.end() && it->second.last_update_tick > cam.generation_tick) {
            continue;  // reordered CAM older than the current track
        }
        state.known_vehicles[cam.station_id.value] = VehicleTrack{
            KinematicState(core::geo_to_local(ref, cam.latitude, cam.longitude), cam.speed, cam.heading),
            cam.generation_tick};
    }
}

void evict_stale(RobotState& state, const SimClock& clock) {
    auto it = state.known_vehicles.begin();
    while (it != state.known_vehicles.end()) {
        const std::uint64_t age = clock.tick_index - std::min(it->second.last_update_tick, clock.tick_index);
        if (age > state.stale_ticks) {
            it = state.known_vehicles.erase(it);
        } else {
            ++it;
        }
    }
}

void enter(RobotState& state, RobotPhase phase, const SimClock& clock) {
    state.phase = phase;
    state.phase_since = clock.tick_index;
}

}  // namespace

HazardDecision evaluate_hazard(const RobotState& state, const SimClock& clock) {
    HazardDecision worst{HazardTag::Safe, TimeInterval::empty()};
    for (const auto& [id, track] : state.known_vehicles) {
        const double age_seconds =
            static_cast<double>(clock.tick_index - std::min(track.last_update_tick, clock.tick_index)) *
            clock.tick_duration;
        const KinematicState now(core::predict_position(track.state, age_seconds), track.state.speed,
                                 track.state.heading);
        const HazardDecision decision = hazard::classify(hazard::incursion_interval(state.zod, now), state.threshold);
        if (hazard::worse_than(decision.tag, worst.tag)) {
            worst = decision;
        }
    }
    return worst;
}

std::vector<RobotAction> robot_step(RobotState& state,
                                    const Observation& obs,
                                    const SimClock& clock,
                                    const GeoRef& ref) {
    std::vector<RobotAction> actions;

    ingest_cams(state, obs, ref);
    evict_stale(state, clock);

    const std::optional<PedestrianSighting>& ped = obs.pedestrian_detected;

    switch (state.phase) {
        case RobotPhase::Waiting: {
            if (ped && ped->distance <= state.detection_range) {
                state.target_pedestrian = ped->id;
                enter(state, RobotPhase::IdentifyCrossingIntent, clock);
            }
            break;
        }
        case RobotPhase::IdentifyCrossingIntent: {
            const bool target_seen = ped && state.target_pedestrian && ped->id == *state.target_pedestrian;
            if (target_seen && ped->facing_robot) {
                enter(state, RobotPhase::IdentifyHazard, clock);
            } else if (clock.tick_index - state.phase_since >= state.patience_ticks) {
                state.target_pedestrian.reset();
                enter(state, RobotPhase::Waiting, clock);
            }
            break;
        }
        case RobotPhase::IdentifyHazard: {
            const HazardDecision worst = evaluate_hazard(state, clock);
            if (worst.tag == HazardTag::Imminent || worst.tag == HazardTag::Active) {
                enter(state, RobotPhase::ReactToHazard, clock);
                const std::uint32_t seq = state.next_denm_seq++;
                state.active_denm = seq;
                state.denm_anchor_tick = clock.tick_index;
                actions.push_back(Gesture{GestureKind::Stop});
                actions.push_back(Say{"stop"});
                actions.push_back(SendDenm{DenmAction::New, seq});
            } else {
                enter(state, RobotPhase::Crossing, clock);
                actions.push_back(Gesture{GestureKind::Cross});
                actions.push_back(Say{"You can cross"});
            }
            break;
        }
        case RobotPhase::ReactToHazard: {
            const HazardDecision worst = evaluate_hazard(state, clock);
            if (worst.tag == HazardTag::Safe) {
                if (state.active_denm) {
                    actions.push_back(SendDenm{DenmAction::Terminate, *state.active_denm});
                    state.active_denm.reset();
                }
                enter(state, RobotPhase::Crossing, clock);
                actions.push_back(Gesture{GestureKind::Cross});
                actions.push_back(Say{"You can cross"});
            } else if (state.active_denm) {
                const std::uint64_t since_anchor = clock.tick_index - state.denm_anchor_tick;
                if (since_anchor > 0 && state.denm_repeat_ticks > 0 && since_anchor % state.denm_repeat_ticks == 0) {
                    // Keep the warning alive for vehicles and the stop posture
                    // toward the pedestrian until the hazard clears.
                    actions.push_back(Gesture{GestureKind::Stop});
                    actions.push_back(SendDenm{DenmAction::New, *state.active_denm});
                }
            }
            break;
        }
        case RobotPhase::Crossing: {
            const bool target_gone = !ped || !state.target_pedestrian || ped->id != *state.target_pedestrian;
            const bool target_exited = ped && state.target_pedestrian && ped->id == *state.target_pedestrian &&
                                       ped->distance > state.zod.lw;
            const bool timed_out = clock.tick_index - state.phase_since >= state.crossing_timeout_ticks;
            if (target_gone || target_exited || timed_out) {
                state.target_pedestrian.reset();
                enter(state, RobotPhase::PostInteraction, clock);
            }
            break;
        }
        case RobotPhase::PostInteraction: {
            // Outcome metrics are recorded by the harness from the trace; no
            // parameter adaptation happens here.
            state.target_pedestrian.reset();
            enter(state, RobotPhase::Waiting, clock);
            break;
        }
    }

    if (state.cam_cadence_ticks > 0 && clock.tick_index % state.cam_cadence_ticks == 0) {
        actions.push_back(SendCam{});
    }
    return actions;
}

void ebike_step(const EbikeScript& script,
                EbikeState& state,
                std::span<const V2xMessage> delivered,
                const SimClock& clock) {
    for (const SpeedChange& change : script.speed_changes) {
        if (change.tick == clock.tick_index) {
            state.kin = KinematicState(state.kin.pos, change.speed, state.kin.heading);
        }
    }
    state.kin = KinematicState(core::predict_position(state.kin, clock.tick_duration), state.kin.speed,
                               state.kin.heading);

    for (const V2xMessage& msg : delivered) {
        if (!msg.is_denm()) {
            continue;
        }
        const Denm& denm = msg.denm();
        if (denm.cause_code != DenmCause::HumanPresenceOnTheRoad) {
            continue;
        }
        const auto key = std::make_pair(denm.station_id.value, denm.sequence_number);
        if (denm.action == DenmAction::New) {
            state.active_warnings[key] = true;
        } else {
            state.active_warnings.erase(key);
        }
    }
    state.display_text = state.active_warnings.empty() ? "" : kEbikeWarningText;
}

const char* to_string(PedMode mode) {
    switch (mode) {
        case PedMode::Pending: return "Pending";
        case PedMode::Approaching: return "Approaching";
        case PedMode::Waiting: return "Waiting";
        case PedMode::Crossing: return "Crossing";
        case PedMode::Done: return "Done";
    }
    return "unknown";
}

void pedestrian_step(const PedestrianScript& script,
                     PedestrianState& state,
                     std::span<const RobotAction> robot_actions_visible,
                     const SimClock& clock,
                     const Point& robot_pos,
                     const Zod& zod) {
    if (state.mode == PedMode::Pending) {
        if (clock.tick_index >= script.spawn_tick) {
            state.pos = script.start;
            state.mode = PedMode::Approaching;
        }
        return;
    }

    for (const RobotAction& a : robot_actions_visible) {
        if (is_gesture(a, GestureKind::Cross)) {
            state.authorized = true;
        }
    }

    const double step = script.speed * clock.tick_duration;
    switch (state.mode) {
        case PedMode::Approaching: {
            const double dist = state.pos.distance_to(robot_pos);
            if (dist > kWaitPointDistance) {
                const double advance = std::min(step, dist - kWaitPointDistance);
                state.pos = Point(state.pos.x + (robot_pos.x - state.pos.x) / dist * advance,
                                  state.pos.y + (robot_pos.y - state.pos.y) / dist * advance);
            }
            if (state.pos.distance_to(robot_pos) <= kWaitPointDistance) {
                state.mode = PedMode::Waiting;
                state.waiting_since = clock.tick_index;
            }
            break;
        }
        case PedMode::Waiting: {
            const bool go = script.compliant ? state.authorized
                                             : clock.tick_index - state.waiting_since >= script.delay_ticks;
            if (go) {
                state.mode = PedMode::Crossing;  // movement starts next tick
            }
            break;
        }
        case PedMode::Crossing: {
            state.pos = Point(state.pos.x, state.pos.y - step);
            if (state.pos.y < zod.min_y()) {
                state.mode = PedMode::Done;
            }
            break;
        }
        case PedMode::Pending:
        case PedMode::Done:
            break;
    }
}

}  // namespace crossguard::agents
