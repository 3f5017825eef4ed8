// Command-line front end: run scenarios, sweep parameters, validate scenario
// files and recompute metrics from recorded traces.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "crossguard/sim.hpp"

namespace {

using crossguard::harness::MetricsSummary;

nlohmann::json metrics_json(const MetricsSummary& m) {
    nlohmann::json j;
    j["pedestrian_wait_ticks"] = m.pedestrian_wait_ticks;
    j["crossing_completed"] = m.crossing_completed;
    j["denm_count"] = m.denm_count;
    j["denm_delivery_ratio"] = m.denm_delivery_ratio;
    if (std::isfinite(m.min_ped_vehicle_distance)) {
        j["min_ped_vehicle_distance"] = m.min_ped_vehicle_distance;
    } else {
        j["min_ped_vehicle_distance"] = nullptr;
    }
    j["violations"] = m.violations;
    return j;
}

int exit_code_for(const MetricsSummary& m) {
    return m.violations == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crossguard - robot-mediated pedestrian crossing simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string trace_path;
    std::string metrics_path;
    std::string msglog_path;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and report metrics");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    run_cmd->add_option("--seed", seed, "Override the scenario seed")->each([&](const std::string&) { seed_set = true; });
    run_cmd->add_option("--trace", trace_path, "Write the event trace to this file");
    run_cmd->add_option("--metrics", metrics_path, "Write metrics as JSON to this file");
    run_cmd->add_option("--msglog", msglog_path, "Record every sent message, length-prefixed");

    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario once per parameter value");
    sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep_cmd->add_option("--param", sweep_param, "loss_probability | latency_ticks | threshold")->required();
    sweep_cmd->add_option("--values", sweep_values, "Parameter values")->required()->expected(-1);

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
    validate_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

    std::string replay_path;
    auto* replay_cmd = app.add_subcommand("replay", "Recompute metrics from a trace file");
    replay_cmd->add_option("trace", replay_path, "Trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto scenario = crossguard::harness::load_scenario(scenario_path);
            const auto result = seed_set ? crossguard::harness::run(scenario, seed)
                                         : crossguard::harness::run(scenario);
            if (!trace_path.empty()) {
                std::ofstream out(trace_path);
                if (!out) {
                    std::cerr << "cannot write trace file: " << trace_path << "\n";
                    return 1;
                }
                crossguard::harness::write_trace(out, result.trace);
            }
            if (!metrics_path.empty()) {
                std::ofstream out(metrics_path);
                if (!out) {
                    std::cerr << "cannot write metrics file: " << metrics_path << "\n";
                    return 1;
                }
                out << metrics_json(result.metrics).dump(2) << "\n";
            }
            if (!msglog_path.empty()) {
                std::ofstream out(msglog_path, std::ios::binary);
                if (!out) {
                    std::cerr << "cannot write message log: " << msglog_path << "\n";
                    return 1;
                }
                for (const auto& record : result.sent_messages) {
                    crossguard::messages::write_message_record(out, record);
                }
            }
            std::cout << crossguard::harness::format_metrics(result.metrics);
            return exit_code_for(result.metrics);
        }

        if (sweep_cmd->parsed()) {
            const auto scenario = crossguard::harness::load_scenario(scenario_path);
            const auto param = crossguard::harness::sweep_param_from_string(sweep_param);
            if (!param) {
                std::cerr << "unknown sweep parameter: " << sweep_param << "\n";
                return 1;
            }
            const auto rows = crossguard::harness::sweep(scenario, *param, sweep_values);
            std::cout << sweep_param
                      << "\twait_ticks\tcompleted\tdenm_count\tdenm_delivery_ratio\tmin_distance\tviolations\n";
            for (const auto& row : rows) {
                const auto& m = row.metrics;
                std::ostringstream line;
                line << row.value << '\t' << m.pedestrian_wait_ticks << '\t' << (m.crossing_completed ? "yes" : "no")
                     << '\t' << m.denm_count << '\t' << m.denm_delivery_ratio << '\t';
                if (std::isfinite(m.min_ped_vehicle_distance)) {
                    line << m.min_ped_vehicle_distance;
                } else {
                    line << "inf";
                }
                line << '\t' << m.violations;
                std::cout << line.str() << "\n";
            }
            return 0;
        }

        if (validate_cmd->parsed()) {
            crossguard::harness::load_scenario(scenario_path);
            std::cout << "ok\n";
            return 0;
        }

        if (replay_cmd->parsed()) {
            std::ifstream in(replay_path);
            if (!in) {
                std::cerr << "cannot open trace file: " << replay_path << "\n";
                return 1;
            }
            const auto events = crossguard::harness::parse_trace(in);
            const auto metrics = crossguard::harness::fold_metrics(events);
            std::cout << crossguard::harness::format_metrics(metrics);
            return exit_code_for(metrics);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
