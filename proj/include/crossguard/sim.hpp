#ifndef CROSSGUARD_SIM_HPP_
#define CROSSGUARD_SIM_HPP_

#include <optional>
#include <vector>

#include "crossguard/scenario.hpp"
#include "crossguard/trace.hpp"

namespace crossguard::harness {

struct RunResult {
    std::vector<TraceEvent> trace;
    MetricsSummary metrics;
    std::uint64_t final_tick{0};
    // Every message handed to the channel, encoded, in send order.
    std::vector<std::vector<std::uint8_t>> sent_messages;
};

/// Deterministic tick loop: poll channel, build observations, step the robot,
/// then vehicles by id, then pedestrians by id, broadcast emitted messages,
/// sample positions, check violations. Stops at duration_ticks or once every
/// pedestrian is done and the robot has returned to Waiting.
RunResult run(const Scenario& scenario);
RunResult run(const Scenario& scenario, std::uint64_t seed_override);

enum class SweepParam { LossProbability, LatencyTicks, Threshold };

const char* to_string(SweepParam param);
std::optional<SweepParam> sweep_param_from_string(const std::string& name);

struct SweepRow {
    double value{0.0};
    MetricsSummary metrics;
};

/// One run per value with derived seeds (scenario seed XOR value index).
std::vector<SweepRow> sweep(const Scenario& scenario, SweepParam param, std::span<const double> values);

}  // namespace crossguard::harness

#endif  // CROSSGUARD_SIM_HPP_
