#ifndef CROSSGUARD_TRACE_HPP_
#define CROSSGUARD_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crossguard/agents.hpp"

namespace crossguard::harness {

enum class Role { Robot, Vehicle, Pedestrian };

const char* to_string(Role role);

// One event per line, stable field order, diffable. Ticks are non-decreasing
// within a trace.
namespace ev {

struct PhaseChange {
    std::uint32_t station{0};
    Role role{Role::Robot};
    std::string from;
    std::string to;
};

struct Action {
    std::uint32_t station{0};
    agents::RobotAction action;
};

struct MsgSent {
    std::uint32_t sender{0};
    std::string type;
    std::uint64_t bytes{0};
};

struct MsgDelivered {
    std::uint32_t receiver{0};
    std::uint32_t sender{0};
    std::string type;
    std::uint64_t sent_tick{0};
};

struct MsgDropped {
    std::uint32_t receiver{0};
    std::uint32_t sender{0};
    std::string type;
    std::uint64_t sent_tick{0};
};

struct DisplayChange {
    std::uint32_t station{0};
    std::string text;
};

struct PositionSample {
    std::uint32_t station{0};
    Role role{Role::Vehicle};
    double x{0.0};
    double y{0.0};
    double speed{0.0};
    double heading{0.0};
};

struct Violation {
    std::uint32_t pedestrian{0};
    std::uint32_t vehicle{0};
    double distance{0.0};
};

}  // namespace ev

struct TraceEvent {
    std::uint64_t tick{0};
    std::variant<ev::PhaseChange, ev::Action, ev::MsgSent, ev::MsgDelivered, ev::MsgDropped, ev::DisplayChange,
                 ev::PositionSample, ev::Violation>
        payload;
};

std::string format_event(const TraceEvent& event);

void write_trace(std::ostream& out, std::span<const TraceEvent> events);

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

TraceEvent parse_event(const std::string& line_text, std::size_t line_no);
std::vector<TraceEvent> parse_trace(std::istream& in);

// Interaction outcomes, a pure fold over the trace.
struct MetricsSummary {
    std::uint64_t pedestrian_wait_ticks{0};
    bool crossing_completed{false};
    std::uint64_t denm_count{0};
    double denm_delivery_ratio{0.0};  // 0 when no DENM reached any receiver
    double min_ped_vehicle_distance{std::numeric_limits<double>::infinity()};
    std::uint64_t violations{0};
};

MetricsSummary fold_metrics(std::span<const TraceEvent> events);

std::string format_metrics(const MetricsSummary& m);

}  // namespace crossguard::harness

#endif  // CROSSGUARD_TRACE_HPP_
