#include "crossguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crossguard/netsim.hpp"

namespace crossguard::harness {

using agents::EbikeScript;
using agents::EbikeState;
using agents::Observation;
using agents::PedestrianScript;
using agents::PedestrianState;
using agents::PedMode;
using agents::RobotAction;
using agents::RobotPhase;
using agents::RobotState;
using core::KinematicState;
using core::Point;
using core::SimClock;
using messages::Cam;
using messages::Denm;
using messages::StationId;
using messages::V2xMessage;
using netsim::Channel;
using netsim::Station;

namespace {

constexpr double kViolationDistance = 2.0;  // meters, pedestrian-vehicle proximity inside the zone

RobotState make_robot(const Scenario& sc) {
    RobotState robot;
    robot.zod = sc.zod();
    robot.threshold = sc.robot.threshold;
    robot.detection_range = sc.robot.detection_range;
    robot.patience_ticks = sc.timers.patience_ticks;
    robot.crossing_timeout_ticks = sc.timers.crossing_timeout_ticks;
    robot.cam_cadence_ticks = sc.timers.cam_cadence_ticks;
    robot.denm_repeat_ticks = sc.timers.denm_repeat_ticks;
    robot.stale_ticks = sc.timers.stale_ticks;
    return robot;
}

struct SimWorld {
    const Scenario& sc;
    core::GeoRef ref;
    Channel channel;
    SimClock clock;
    RobotState robot;
    std::vector<const EbikeScript*> vehicle_scripts;  // sorted by station id
    std::vector<EbikeState> vehicles;
    std::vector<const PedestrianScript*> ped_scripts;  // sorted by id
    std::vector<PedestrianState> pedestrians;
    std::vector<TraceEvent> trace;
    std::vector<std::vector<std::uint8_t>> sent_messages;

    SimWorld(const Scenario& scenario, std::uint64_t seed)
        : sc(scenario),
          ref(scenario.geo_ref),
          channel(netsim::ChannelConfig(scenario.channel.range, scenario.channel.loss_probability,
                                        scenario.channel.latency_ticks, scenario.channel.jitter_ticks, seed)),
          clock(0, scenario.tick_duration),
          robot(make_robot(scenario)) {
        for (const EbikeScript& script : scenario.vehicles) {
            vehicle_scripts.push_back(&script);
        }
        std::sort(vehicle_scripts.begin(), vehicle_scripts.end(),
                  [](const EbikeScript* a, const EbikeScript* b) { return a->station_id < b->station_id; });
        for (const EbikeScript* script : vehicle_scripts) {
            vehicles.push_back(EbikeState{script->initial, "", {}});
        }
        for (const PedestrianScript& script : scenario.pedestrians) {
            ped_scripts.push_back(&script);
        }
        std::sort(ped_scripts.begin(), ped_scripts.end(),
                  [](const PedestrianScript* a, const PedestrianScript* b) { return a->id < b->id; });
        pedestrians.resize(ped_scripts.size());
    }

    void emit(TraceEvent event) { trace.push_back(std::move(event)); }

    std::vector<Station> station_list() const {
        std::vector<Station> out;
        out.push_back(Station{sc.robot.station_id, sc.robot.position});
        for (std::size_t i = 0; i < vehicles.size(); ++i) {
            out.push_back(Station{vehicle_scripts[i]->station_id, vehicles[i].kin.pos});
        }
        return out;
    }

    void send(StationId sender, const Point& sender_pos, const V2xMessage& msg) {
        std::vector<std::uint8_t> bytes = messages::encode(msg);
        const char* type = messages::type_name(msg);
        emit(TraceEvent{clock.tick_index, ev::MsgSent{sender.value, type, bytes.size()}});
        const std::vector<Station> stations = station_list();
        const netsim::BroadcastOutcome outcome = channel.broadcast(clock, sender, sender_pos, bytes, stations);
        for (const StationId receiver : outcome.dropped) {
            emit(TraceEvent{clock.tick_index, ev::MsgDropped{receiver.value, sender.value, type, clock.tick_index}});
        }
        sent_messages.push_back(std::move(bytes));
    }

    Cam robot_cam() const {
        Cam cam;
        cam.station_id = sc.robot.station_id;
        cam.station_type = messages::StationType::Robot;
        const core::GeoCoord geo = core::local_to_geo(ref, sc.robot.position);
        cam.latitude = geo.lat;
        cam.longitude = geo.lon;
        cam.speed = 0.0;
        cam.heading = 0.0;
        cam.generation_tick = clock.tick_index;
        return cam;
    }

    Cam vehicle_cam(std::size_t i) const {
        Cam cam;
        cam.station_id = vehicle_scripts[i]->station_id;
        cam.station_type = vehicle_scripts[i]->station_type;
        const core::GeoCoord geo = core::local_to_geo(ref, vehicles[i].kin.pos);
        cam.latitude = geo.lat;
        cam.longitude = geo.lon;
        cam.speed = vehicles[i].kin.speed;
        cam.heading = vehicles[i].kin.heading;
        cam.generation_tick = clock.tick_index;
        return cam;
    }

    Denm robot_denm(const agents::SendDenm& action) const {
        Denm denm;
        denm.station_id = sc.robot.station_id;
        denm.cause_code = messages::DenmCause::HumanPresenceOnTheRoad;
        const core::GeoCoord geo = core::local_to_geo(ref, sc.robot.position);
        denm.event_latitude = geo.lat;
        denm.event_longitude = geo.lon;
        denm.action = action.action;
        denm.sequence_number = action.sequence;
        return denm;
    }

    Observation build_observation(const std::vector<V2xMessage>& delivered) const {
        Observation obs;
        obs.tick = clock.tick_index;
        obs.delivered_messages = delivered;

        // The targeted pedestrian is tracked wherever it is; otherwise the
        // nearest active one is reported.
        const PedestrianState* chosen = nullptr;
        const PedestrianScript* chosen_script = nullptr;
        double chosen_dist = 0.0;
        for (std::size_t i = 0; i < pedestrians.size(); ++i) {
            const PedestrianState& ped = pedestrians[i];
            if (ped.mode == PedMode::Pending || ped.mode == PedMode::Done) {
                continue;
            }
            const double dist = ped.pos.distance_to(sc.robot.position);
            const bool is_target = robot.target_pedestrian && *robot.target_pedestrian == ped_scripts[i]->id;
            if (is_target) {
                chosen = &ped;
                chosen_script = ped_scripts[i];
                chosen_dist = dist;
                break;
            }
            if (!robot.target_pedestrian && (chosen == nullptr || dist < chosen_dist)) {
                chosen = &ped;
                chosen_script = ped_scripts[i];
                chosen_dist = dist;
            }
        }
        if (chosen != nullptr) {
            agents::PedestrianSighting sighting;
            sighting.id = chosen_script->id;
            sighting.distance = chosen_dist;
            sighting.facing_robot = chosen->mode != PedMode::Crossing && chosen_script->facing;
            obs.pedestrian_detected = sighting;
        }
        return obs;
    }
};

}  // namespace

const char* to_string(SweepParam param) {
    switch (param) {
        case SweepParam::LossProbability: return "loss_probability";
        case SweepParam::LatencyTicks: return "latency_ticks";
        case SweepParam::Threshold: return "threshold";
    }
    return "unknown";
}

std::optional<SweepParam> sweep_param_from_string(const std::string& name) {
    if (name == "loss_probability") return SweepParam::LossProbability;
    if (name == "latency_ticks") return SweepParam::LatencyTicks;
    if (name == "threshold") return SweepParam::Threshold;
    return std::nullopt;
}

RunResult run(const Scenario& scenario) {
    return run(scenario, scenario.seed);
}

RunResult run(const Scenario& scenario, std::uint64_t seed_override) {
    validate_scenario(scenario);
    SimWorld w(scenario, seed_override);

    for (; w.clock.tick_index < scenario.duration_ticks; w.clock.advance()) {
        const std::uint64_t tick = w.clock.tick_index;

        // Deliver everything due this tick, grouped per receiver.
        std::map<std::uint32_t, std::vector<V2xMessage>> inbox;
        for (netsim::Delivery& delivery : w.channel.poll(w.clock)) {
            messages::DecodeResult decoded = messages::decode(delivery.payload);
            if (std::holds_alternative<messages::DecodeError>(decoded)) {
                continue;  // internally produced messages always decode
            }
            V2xMessage msg = std::get<V2xMessage>(std::move(decoded));
            w.emit(TraceEvent{tick, ev::MsgDelivered{delivery.receiver.value, delivery.sender.value,
                                                     messages::type_name(msg), delivery.sent_tick}});
            inbox[delivery.receiver.value].push_back(std::move(msg));
        }

        // Robot step.
        const Observation obs = w.build_observation(inbox[w.sc.robot.station_id.value]);
        const RobotPhase prev_phase = w.robot.phase;
        const std::vector<RobotAction> actions = agents::robot_step(w.robot, obs, w.clock, w.ref);
        if (w.robot.phase != prev_phase) {
            w.emit(TraceEvent{tick, ev::PhaseChange{w.sc.robot.station_id.value, Role::Robot,
                                                    agents::to_string(prev_phase), agents::to_string(w.robot.phase)}});
        }
        for (const RobotAction& action : actions) {
            w.emit(TraceEvent{tick, ev::Action{w.sc.robot.station_id.value, action}});
            if (std::holds_alternative<agents::SendCam>(action)) {
                w.send(w.sc.robot.station_id, w.sc.robot.position, V2xMessage(w.robot_cam()));
            } else if (const auto* denm = std::get_if<agents::SendDenm>(&action)) {
                w.send(w.sc.robot.station_id, w.sc.robot.position, V2xMessage(w.robot_denm(*denm)));
            }
        }

        // Vehicles by station id.
        for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
            EbikeState& vehicle = w.vehicles[i];
            const std::string prev_display = vehicle.display_text;
            agents::ebike_step(*w.vehicle_scripts[i], vehicle, inbox[w.vehicle_scripts[i]->station_id.value],
                               w.clock);
            if (vehicle.display_text != prev_display) {
                w.emit(TraceEvent{tick,
                                  ev::DisplayChange{w.vehicle_scripts[i]->station_id.value, vehicle.display_text}});
            }
            if (w.sc.timers.cam_cadence_ticks > 0 && tick % w.sc.timers.cam_cadence_ticks == 0) {
                w.send(w.vehicle_scripts[i]->station_id, vehicle.kin.pos, V2xMessage(w.vehicle_cam(i)));
            }
        }

        // Pedestrians by id; they see this tick's robot actions.
        for (std::size_t i = 0; i < w.pedestrians.size(); ++i) {
            PedestrianState& ped = w.pedestrians[i];
            const PedMode prev_mode = ped.mode;
            agents::pedestrian_step(*w.ped_scripts[i], ped, actions, w.clock, w.sc.robot.position, w.robot.zod);
            if (ped.mode != prev_mode) {
                w.emit(TraceEvent{tick, ev::PhaseChange{w.ped_scripts[i]->id, Role::Pedestrian,
                                                        agents::to_string(prev_mode), agents::to_string(ped.mode)}});
            }
        }

        // Position samples: robot, vehicles, active pedestrians.
        w.emit(TraceEvent{tick, ev::PositionSample{w.sc.robot.station_id.value, Role::Robot, w.sc.robot.position.x,
                                                   w.sc.robot.position.y, 0.0, 0.0}});
        for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
            const KinematicState& kin = w.vehicles[i].kin;
            w.emit(TraceEvent{tick, ev::PositionSample{w.vehicle_scripts[i]->station_id.value, Role::Vehicle,
                                                       kin.pos.x, kin.pos.y, kin.speed, kin.heading}});
        }
        for (std::size_t i = 0; i < w.pedestrians.size(); ++i) {
            const PedestrianState& ped = w.pedestrians[i];
            if (ped.mode == PedMode::Pending || ped.mode == PedMode::Done) {
                continue;
            }
            w.emit(TraceEvent{tick, ev::PositionSample{w.ped_scripts[i]->id, Role::Pedestrian, ped.pos.x, ped.pos.y,
                                                       w.ped_scripts[i]->speed, 0.0}});
        }

        // Ground-truth safety check, independent of what the robot believes.
        const hazard::Zod zod = w.robot.zod;
        for (std::size_t p = 0; p < w.pedestrians.size(); ++p) {
            const PedestrianState& ped = w.pedestrians[p];
            if (ped.mode == PedMode::Pending || ped.mode == PedMode::Done) {
                continue;
            }
            if (!hazard::contains(zod, ped.pos)) {
                continue;
            }
            for (std::size_t v = 0; v < w.vehicles.size(); ++v) {
                const Point& vpos = w.vehicles[v].kin.pos;
                if (!hazard::contains(zod, vpos)) {
                    continue;
                }
                const double dist = ped.pos.distance_to(vpos);
                if (dist < kViolationDistance) {
                    w.emit(TraceEvent{tick, ev::Violation{w.ped_scripts[p]->id,
                                                          w.vehicle_scripts[v]->station_id.value, dist}});
                }
            }
        }

        // Early termination: every pedestrian crossed and the robot is idle.
        if (!w.pedestrians.empty() && w.robot.phase == RobotPhase::Waiting) {
            const bool all_done = std::all_of(w.pedestrians.begin(), w.pedestrians.end(),
                                              [](const PedestrianState& p) { return p.mode == PedMode::Done; });
            if (all_done) {
                break;
            }
        }
    }

    RunResult result;
    result.final_tick = std::min(w.clock.tick_index, scenario.duration_ticks - 1);
    result.trace = std::move(w.trace);
    result.metrics = fold_metrics(result.trace);
    result.sent_messages = std::move(w.sent_messages);
    return result;
}

std::vector<SweepRow> sweep(const Scenario& scenario, SweepParam param, std::span<const double> values) {
    for (const double v : values) {
        switch (param) {
            case SweepParam::LossProbability:
                if (v < 0.0 || v > 1.0) throw ValidationError("loss_probability", "must be in [0, 1]");
                break;
            case SweepParam::LatencyTicks:
                if (v < 0.0 || v != std::floor(v)) throw ValidationError("latency_ticks", "must be a non-negative integer");
                break;
            case SweepParam::Threshold:
                if (!(v > 0.0)) throw ValidationError("threshold", "must be > 0");
                break;
        }
    }

    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        Scenario variant = scenario;
        switch (param) {
            case SweepParam::LossProbability:
                variant.channel.loss_probability = values[i];
                break;
            case SweepParam::LatencyTicks:
                variant.channel.latency_ticks = static_cast<std::uint32_t>(values[i]);
                break;
            case SweepParam::Threshold:
                variant.robot.threshold = values[i];
                break;
        }
        const RunResult result = run(variant, scenario.seed ^ static_cast<std::uint64_t>(i));
        rows.push_back(SweepRow{values[i], result.metrics});
    }
    return rows;
}

}  // namespace crossguard::harness
