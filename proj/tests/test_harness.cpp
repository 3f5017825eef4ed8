#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "crossguard/sim.hpp"

using namespace crossguard::harness;
using crossguard::agents::GestureKind;
using crossguard::agents::is_gesture;

namespace {

std::string scenario_path(const char* name) {
    return std::string(CROSSGUARD_SCENARIO_DIR) + "/" + name;
}

std::string trace_text(const std::vector<TraceEvent>& events) {
    std::ostringstream out;
    write_trace(out, events);
    return out.str();
}

// Phase-change ticks of the robot, keyed by destination phase name.
std::uint64_t phase_entry_tick(const std::vector<TraceEvent>& trace, const std::string& to) {
    for (const TraceEvent& e : trace) {
        if (const auto* p = std::get_if<ev::PhaseChange>(&e.payload)) {
            if (p->role == Role::Robot && p->to == to) {
                return e.tick;
            }
        }
    }
    FAIL("robot never entered phase ", to);
    return 0;
}

}  // namespace

TEST_CASE("bundled golden scenario loads with the documented parameters") {
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    CHECK(sc.name == "poc_kit_campus");
    CHECK(sc.robot.zod_ll == 30.0);
    CHECK(sc.robot.zod_rl == 30.0);
    CHECK(sc.robot.zod_uw == 0.0);
    CHECK(sc.robot.zod_lw == 30.0);
    CHECK(sc.robot.threshold == 5.0);
    CHECK(sc.channel.range == 400.0);
    CHECK(sc.tick_duration == 0.1);
    REQUIRE(sc.vehicles.size() == 1);
    CHECK(sc.vehicles[0].initial.speed == 5.0);
    REQUIRE(sc.pedestrians.size() == 1);
    CHECK(sc.pedestrians[0].compliant);
}

TEST_CASE("scenario validation rejects broken files") {
    const Scenario base = load_scenario(scenario_path("poc_kit_campus.scn"));

    SUBCASE("duplicate station id") {
        Scenario sc = base;
        sc.pedestrians[0].id = 10;  // collides with the vehicle
        CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
    }

    SUBCASE("negative pedestrian speed") {
        Scenario sc = base;
        sc.pedestrians[0].speed = -1.0;
        CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
    }

    SUBCASE("negative vehicle speed in a file") {
        const std::string text =
            "name = bad\nduration_ticks = 10\n[robot]\nstation_id = 1\n"
            "[vehicle]\nstation_id = 2\nstart = 0 0\nspeed = -3\nheading = 0\n";
        CHECK_THROWS_AS(parse_scenario(text), ValidationError);
    }

    SUBCASE("zero duration") {
        Scenario sc = base;
        sc.duration_ticks = 0;
        CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
    }

    SUBCASE("loss probability out of range") {
        Scenario sc = base;
        sc.channel.loss_probability = 1.5;
        CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
    }
}

TEST_CASE("timers section and speed changes parse") {
    const std::string text =
        "name = custom\n"
        "duration_ticks = 100\n"
        "[robot]\n"
        "station_id = 1\n"
        "[timers]\n"
        "patience_ticks = 7\n"
        "cam_cadence_ticks = 5\n"
        "stale_ticks = 40\n"
        "[vehicle]\n"
        "station_id = 2\n"
        "start = -10 -5\n"
        "speed = 3\n"
        "heading = 0\n"
        "speed_change = 20 1.5\n"
        "speed_change = 50 0\n";
    const Scenario sc = parse_scenario(text);
    CHECK(sc.timers.patience_ticks == 7);
    CHECK(sc.timers.cam_cadence_ticks == 5);
    CHECK(sc.timers.stale_ticks == 40);
    CHECK(sc.timers.crossing_timeout_ticks == 300);  // untouched default
    REQUIRE(sc.vehicles.size() == 1);
    REQUIRE(sc.vehicles[0].speed_changes.size() == 2);
    CHECK(sc.vehicles[0].speed_changes[0].tick == 20);
    CHECK(sc.vehicles[0].speed_changes[1].speed == 0.0);
}

TEST_CASE("parse errors carry line and field") {
    try {
        parse_scenario("name = x\nbogus_field = 3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.field() == "bogus_field");
    }

    try {
        parse_scenario("duration_ticks = soon\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
        CHECK(e.field() == "duration_ticks");
    }
}

TEST_CASE("golden scenario run follows the hand-traced schedule") {
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    const RunResult result = run(sc);

    // Pedestrian walks from y=6 at 0.15 m/tick; the robot reads the previous
    // tick's position, so y <= 2 is first visible at tick 28.
    CHECK(phase_entry_tick(result.trace, "IdentifyCrossingIntent") == 28);
    CHECK(phase_entry_tick(result.trace, "IdentifyHazard") == 29);
    // First hazard evaluation sees the e-bike with entry time under 5 s.
    CHECK(phase_entry_tick(result.trace, "ReactToHazard") == 30);
    // The e-bike's last inside evaluation is tick 159, where its extrapolated
    // position sits exactly on the x=30 boundary; CAM geo quantization may
    // resolve that boundary either way, so the clear lands on 159 or 160.
    const std::uint64_t crossing_tick = phase_entry_tick(result.trace, "Crossing");
    CHECK(crossing_tick >= 159);
    CHECK(crossing_tick <= 160);
    CHECK(phase_entry_tick(result.trace, "PostInteraction") > crossing_tick);

    CHECK(result.metrics.crossing_completed);
    CHECK(result.metrics.violations == 0);
    CHECK(result.metrics.denm_count >= 2);  // at least one New and one Terminate
    CHECK(result.metrics.denm_delivery_ratio == 1.0);
    CHECK(result.metrics.pedestrian_wait_ticks > 100);

    // DENM ordering: New strictly before Terminate, Cross gesture not before
    // the Terminate tick.
    std::uint64_t first_new = 0, first_terminate = 0, cross_gesture = 0;
    for (const TraceEvent& e : result.trace) {
        if (const auto* a = std::get_if<ev::Action>(&e.payload)) {
            if (const auto* d = std::get_if<crossguard::agents::SendDenm>(&a->action)) {
                if (d->action == crossguard::messages::DenmAction::New && first_new == 0) first_new = e.tick;
                if (d->action == crossguard::messages::DenmAction::Terminate && first_terminate == 0)
                    first_terminate = e.tick;
            }
            if (is_gesture(a->action, GestureKind::Cross) && cross_gesture == 0) cross_gesture = e.tick;
        }
    }
    CHECK(first_new == 30);
    CHECK(first_terminate == crossing_tick);
    CHECK(cross_gesture == crossing_tick);

    // The e-bike display mirrors the DENM lifecycle.
    bool warned = false, cleared_after = false;
    for (const TraceEvent& e : result.trace) {
        if (const auto* d = std::get_if<ev::DisplayChange>(&e.payload)) {
            if (d->text == "Pedestrian In Front") warned = true;
            if (warned && d->text.empty()) cleared_after = true;
        }
    }
    CHECK(warned);
    CHECK(cleared_after);
}

TEST_CASE("no vehicles means no denm and an immediate crossing") {
    const Scenario sc = load_scenario(scenario_path("no_vehicles.scn"));
    const RunResult result = run(sc);
    CHECK(result.metrics.denm_count == 0);
    CHECK(result.metrics.crossing_completed);
    CHECK(result.metrics.violations == 0);
    CHECK(phase_entry_tick(result.trace, "Crossing") > 0);
    for (const TraceEvent& e : result.trace) {
        if (const auto* p = std::get_if<ev::PhaseChange>(&e.payload)) {
            CHECK(p->to != std::string("ReactToHazard"));
        }
    }
}

TEST_CASE("non-compliant pedestrian produces detected violations") {
    const Scenario sc = load_scenario(scenario_path("poc_noncompliant.scn"));
    const RunResult result = run(sc);
    CHECK(result.metrics.violations >= 1);
    CHECK(result.metrics.denm_count >= 1);  // the robot still warned the vehicle
}

TEST_CASE("same seed reproduces byte-identical traces") {
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    const RunResult a = run(sc);
    const RunResult b = run(sc);
    CHECK(trace_text(a.trace) == trace_text(b.trace));
}

TEST_CASE("changing the seed changes loss decisions") {
    Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    sc.channel.loss_probability = 0.3;
    const RunResult a = run(sc, 42);
    const RunResult b = run(sc, 43);

    auto dropped_set = [](const RunResult& r) {
        std::set<std::string> out;
        for (const TraceEvent& e : r.trace) {
            if (std::get_if<ev::MsgDropped>(&e.payload) != nullptr) {
                out.insert(format_event(e));
            }
        }
        return out;
    };
    CHECK(dropped_set(a) != dropped_set(b));
}

TEST_CASE("trace roundtrips through its text form") {
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    const RunResult result = run(sc);

    std::stringstream buf;
    write_trace(buf, result.trace);
    const std::vector<TraceEvent> parsed = parse_trace(buf);
    REQUIRE(parsed.size() == result.trace.size());

    std::ostringstream again;
    write_trace(again, parsed);
    CHECK(again.str() == buf.str());
}

TEST_CASE("metrics recomputed from the trace equal the reported metrics") {
    for (const char* name : {"poc_kit_campus.scn", "poc_noncompliant.scn", "no_vehicles.scn"}) {
        const Scenario sc = load_scenario(scenario_path(name));
        const RunResult result = run(sc);

        std::stringstream buf;
        write_trace(buf, result.trace);
        const MetricsSummary refolded = fold_metrics(parse_trace(buf));

        CHECK(refolded.pedestrian_wait_ticks == result.metrics.pedestrian_wait_ticks);
        CHECK(refolded.crossing_completed == result.metrics.crossing_completed);
        CHECK(refolded.denm_count == result.metrics.denm_count);
        CHECK(refolded.denm_delivery_ratio == doctest::Approx(result.metrics.denm_delivery_ratio));
        CHECK(refolded.violations == result.metrics.violations);
        if (std::isfinite(result.metrics.min_ped_vehicle_distance)) {
            // Positions are printed at 1e-6 m resolution.
            CHECK(refolded.min_ped_vehicle_distance ==
                  doctest::Approx(result.metrics.min_ped_vehicle_distance).epsilon(1e-4));
        }
    }
}

TEST_CASE("violation soundness: events iff a close pair inside the zone") {
    // Recompute the violation condition from position samples alone.
    for (const char* name : {"poc_kit_campus.scn", "poc_noncompliant.scn"}) {
        const Scenario sc = load_scenario(scenario_path(name));
        const RunResult result = run(sc);
        const auto zod = sc.zod();

        std::uint64_t recomputed = 0;
        std::uint64_t cursor_tick = 0;
        std::vector<crossguard::core::Point> peds, vehicles;
        auto flush = [&]() {
            for (const auto& p : peds) {
                if (!crossguard::hazard::contains(zod, p)) continue;
                for (const auto& v : vehicles) {
                    if (crossguard::hazard::contains(zod, v) && p.distance_to(v) < 2.0) {
                        ++recomputed;
                    }
                }
            }
            peds.clear();
            vehicles.clear();
        };
        for (const TraceEvent& e : result.trace) {
            if (e.tick != cursor_tick) {
                flush();
                cursor_tick = e.tick;
            }
            if (const auto* pos = std::get_if<ev::PositionSample>(&e.payload)) {
                if (pos->role == Role::Pedestrian) peds.emplace_back(pos->x, pos->y);
                if (pos->role == Role::Vehicle) vehicles.emplace_back(pos->x, pos->y);
            }
        }
        flush();
        CHECK(recomputed == result.metrics.violations);
    }
}

TEST_CASE("sweep endpoints and monotonicity") {
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));

    SUBCASE("loss endpoints force the delivery ratio") {
        const double values[] = {0.0, 1.0};
        const auto rows = sweep(sc, SweepParam::LossProbability, values);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].metrics.denm_delivery_ratio == 1.0);
        CHECK(rows[1].metrics.denm_delivery_ratio == 0.0);
        CHECK(rows[1].metrics.violations == 0);  // gating does not need the channel
    }

    SUBCASE("wait ticks never shrink as the threshold grows") {
        const double values[] = {0.5, 1.0, 5.0, 10.0};
        const auto rows = sweep(sc, SweepParam::Threshold, values);
        REQUIRE(rows.size() == 4);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].metrics.pedestrian_wait_ticks >= rows[i - 1].metrics.pedestrian_wait_ticks);
        }
        for (const auto& row : rows) {
            CHECK(row.metrics.violations == 0);
        }
    }

    SUBCASE("latency does not break local gating") {
        const double values[] = {0.0, 1.0, 5.0, 10.0};
        const auto rows = sweep(sc, SweepParam::LatencyTicks, values);
        for (const auto& row : rows) {
            CHECK(row.metrics.violations == 0);
            CHECK(row.metrics.crossing_completed);
        }
    }

    SUBCASE("empty value list yields an empty table") {
        CHECK(sweep(sc, SweepParam::Threshold, {}).empty());
    }

    SUBCASE("out-of-bounds values are rejected") {
        const double bad[] = {-0.5};
        CHECK_THROWS_AS(sweep(sc, SweepParam::LossProbability, bad), ValidationError);
    }
}

TEST_CASE("two pedestrians are mediated one after the other") {
    // First pedestrian meets the first e-bike, second pedestrian arrives
    // later and meets the second; the robot must run the full cycle twice
    // with distinct warning sequence numbers.
    Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    sc.duration_ticks = 1200;
    crossguard::agents::EbikeScript second_bike;
    second_bike.station_id = crossguard::messages::StationId(11);
    second_bike.initial = crossguard::core::KinematicState(crossguard::core::Point(-195, -15), 5.0, 0.0);
    sc.vehicles.push_back(second_bike);
    crossguard::agents::PedestrianScript second_ped;
    second_ped.id = 21;
    second_ped.spawn_tick = 250;
    second_ped.start = crossguard::core::Point(0, 6);
    second_ped.speed = 1.5;
    sc.pedestrians.push_back(second_ped);

    const RunResult result = run(sc);
    CHECK(result.metrics.crossing_completed);
    CHECK(result.metrics.violations == 0);

    std::set<std::uint32_t> new_seqs;
    std::set<std::uint32_t> terminated_seqs;
    int post_interactions = 0;
    for (const TraceEvent& e : result.trace) {
        if (const auto* a = std::get_if<ev::Action>(&e.payload)) {
            if (const auto* d = std::get_if<crossguard::agents::SendDenm>(&a->action)) {
                if (d->action == crossguard::messages::DenmAction::New) new_seqs.insert(d->sequence);
                if (d->action == crossguard::messages::DenmAction::Terminate) terminated_seqs.insert(d->sequence);
            }
        }
        if (const auto* p = std::get_if<ev::PhaseChange>(&e.payload)) {
            if (p->role == Role::Robot && p->to == "PostInteraction") ++post_interactions;
        }
    }
    CHECK(new_seqs == std::set<std::uint32_t>{0, 1});
    CHECK(terminated_seqs == new_seqs);
    CHECK(post_interactions == 2);
}

TEST_CASE("trace ticks are non-decreasing") {
    const Scenario sc = load_scenario(scenario_path("poc_noncompliant.scn"));
    const RunResult result = run(sc);
    std::uint64_t last = 0;
    for (const TraceEvent& e : result.trace) {
        CHECK(e.tick >= last);
        last = e.tick;
    }
}

TEST_CASE("react-to-hazard only ever exits into crossing") {
    for (const char* name : {"poc_kit_campus.scn", "poc_noncompliant.scn"}) {
        const Scenario sc = load_scenario(scenario_path(name));
        const RunResult result = run(sc);
        for (const TraceEvent& e : result.trace) {
            if (const auto* p = std::get_if<ev::PhaseChange>(&e.payload)) {
                if (p->role == Role::Robot && p->from == "ReactToHazard") {
                    CHECK(p->to == std::string("Crossing"));
                }
            }
        }
    }
}

TEST_CASE("run records every sent message as a decodable log") {
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    const RunResult result = run(sc);
    REQUIRE_FALSE(result.sent_messages.empty());

    std::stringstream buf;
    for (const auto& record : result.sent_messages) {
        crossguard::messages::write_message_record(buf, record);
    }
    const auto records = crossguard::messages::read_message_records(buf);
    REQUIRE(records.size() == result.sent_messages.size());

    std::size_t cams = 0, denms = 0;
    for (const auto& record : records) {
        const auto decoded = crossguard::messages::decode(record);
        REQUIRE(std::holds_alternative<crossguard::messages::V2xMessage>(decoded));
        const auto& msg = std::get<crossguard::messages::V2xMessage>(decoded);
        if (msg.is_cam()) ++cams;
        if (msg.is_denm()) ++denms;
    }
    CHECK(cams > 0);
    CHECK(denms == result.metrics.denm_count);
}

TEST_CASE("golden structural trace regression") {
    // The frozen file holds the discrete schedule (phases, actions, display
    // and message events); float-valued lines are excluded so the golden is
    // robust to libm differences.
    const Scenario sc = load_scenario(scenario_path("poc_kit_campus.scn"));
    const RunResult result = run(sc);

    std::ostringstream got;
    for (const TraceEvent& e : result.trace) {
        const bool structural = !std::holds_alternative<ev::PositionSample>(e.payload) &&
                                !std::holds_alternative<ev::Violation>(e.payload);
        if (structural) {
            got << format_event(e) << '\n';
        }
    }

    std::ifstream golden(std::string(CROSSGUARD_TEST_DATA_DIR) + "/poc_kit_campus_structural.trace");
    REQUIRE(golden.good());
    std::ostringstream want;
    want << golden.rdbuf();
    CHECK(got.str() == want.str());
}
