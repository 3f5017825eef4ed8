#include "crossguard/trace.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace crossguard::harness {

using agents::Gesture;
using agents::GestureKind;
using agents::RobotAction;
using agents::Say;
using agents::SendCam;
using agents::SendDenm;
using messages::DenmAction;

namespace {

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

std::string quoted(const std::string& s) {
    return "\"" + s + "\"";
}

// key=value tokenizer; values may be double-quoted (no escapes).
std::map<std::string, std::string> split_fields(const std::string& line, std::size_t line_no) {
    std::map<std::string, std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        if (i >= line.size()) break;
        const std::size_t eq = line.find('=', i);
        if (eq == std::string::npos) {
            throw TraceParseError(line_no, "expected key=value");
        }
        const std::string key = line.substr(i, eq - i);
        std::size_t value_start = eq + 1;
        std::string value;
        if (value_start < line.size() && line[value_start] == '"') {
            const std::size_t close = line.find('"', value_start + 1);
            if (close == std::string::npos) {
                throw TraceParseError(line_no, "unterminated quoted value");
            }
            value = line.substr(value_start + 1, close - value_start - 1);
            i = close + 1;
        } else {
            std::size_t end = line.find(' ', value_start);
            if (end == std::string::npos) end = line.size();
            value = line.substr(value_start, end - value_start);
            i = end;
        }
        out[key] = value;
    }
    return out;
}

const std::string& field(const std::map<std::string, std::string>& fields, const char* key, std::size_t line_no) {
    const auto it = fields.find(key);
    if (it == fields.end()) {
        throw TraceParseError(line_no, std::string("missing field '") + key + "'");
    }
    return it->second;
}

std::uint64_t to_u64(const std::string& v, std::size_t line_no) {
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw TraceParseError(line_no, "expected an unsigned integer, got '" + v + "'");
    }
}

double to_double(const std::string& v, std::size_t line_no) {
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw TraceParseError(line_no, "expected a number, got '" + v + "'");
    }
}

Role role_from(const std::string& v, std::size_t line_no) {
    if (v == "robot") return Role::Robot;
    if (v == "vehicle") return Role::Vehicle;
    if (v == "pedestrian") return Role::Pedestrian;
    throw TraceParseError(line_no, "unknown role '" + v + "'");
}

}  // namespace

const char* to_string(Role role) {
    switch (role) {
        case Role::Robot: return "robot";
        case Role::Vehicle: return "vehicle";
        case Role::Pedestrian: return "pedestrian";
    }
    return "unknown";
}

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : std::runtime_error("trace parse error at line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format_event(const TraceEvent& event) {
    std::string head = fmt("t=%" PRIu64 " ", event.tick);
    struct Visitor {
        std::string operator()(const ev::PhaseChange& e) const {
            return fmt("ev=phase station=%u role=%s from=%s to=%s", e.station, to_string(e.role), e.from.c_str(),
                       e.to.c_str());
        }
        std::string operator()(const ev::Action& e) const {
            std::string out = fmt("ev=action station=%u ", e.station);
            if (const auto* g = std::get_if<Gesture>(&e.action)) {
                out += fmt("act=gesture value=%s", g->kind == GestureKind::Stop ? "stop" : "cross");
            } else if (const auto* s = std::get_if<Say>(&e.action)) {
                out += "act=say text=" + quoted(s->text);
            } else if (const auto* d = std::get_if<SendDenm>(&e.action)) {
                out += fmt("act=denm action=%s seq=%u cause=HumanPresenceOnTheRoad",
                           d->action == DenmAction::New ? "new" : "terminate", d->sequence);
            } else {
                out += "act=cam";
            }
            return out;
        }
        std::string operator()(const ev::MsgSent& e) const {
            return fmt("ev=sent sender=%u type=%s bytes=%" PRIu64, e.sender, e.type.c_str(), e.bytes);
        }
        std::string operator()(const ev::MsgDelivered& e) const {
            return fmt("ev=delivered receiver=%u sender=%u type=%s sent=%" PRIu64, e.receiver, e.sender,
                       e.type.c_str(), e.sent_tick);
        }
        std::string operator()(const ev::MsgDropped& e) const {
            return fmt("ev=dropped receiver=%u sender=%u type=%s sent=%" PRIu64, e.receiver, e.sender, e.type.c_str(),
                       e.sent_tick);
        }
        std::string operator()(const ev::DisplayChange& e) const {
            return fmt("ev=display station=%u ", e.station) + "text=" + quoted(e.text);
        }
        std::string operator()(const ev::PositionSample& e) const {
            return fmt("ev=pos station=%u role=%s x=%.6f y=%.6f speed=%.6f heading=%.6f", e.station,
                       to_string(e.role), e.x, e.y, e.speed, e.heading);
        }
        std::string operator()(const ev::Violation& e) const {
            return fmt("ev=violation pedestrian=%u vehicle=%u distance=%.6f", e.pedestrian, e.vehicle, e.distance);
        }
    };
    return head + std::visit(Visitor{}, event.payload);
}

void write_trace(std::ostream& out, std::span<const TraceEvent> events) {
    for (const TraceEvent& e : events) {
        out << format_event(e) << '\n';
    }
}

TraceEvent parse_event(const std::string& line_text, std::size_t line_no) {
    const auto fields = split_fields(line_text, line_no);
    TraceEvent out;
    out.tick = to_u64(field(fields, "t", line_no), line_no);
    const std::string& kind = field(fields, "ev", line_no);

    auto station32 = [&](const char* key) {
        return static_cast<std::uint32_t>(to_u64(field(fields, key, line_no), line_no));
    };

    if (kind == "phase") {
        ev::PhaseChange e;
        e.station = station32("station");
        e.role = role_from(field(fields, "role", line_no), line_no);
        e.from = field(fields, "from", line_no);
        e.to = field(fields, "to", line_no);
        out.payload = e;
    } else if (kind == "action") {
        ev::Action e;
        e.station = station32("station");
        const std::string& act = field(fields, "act", line_no);
        if (act == "gesture") {
            const std::string& value = field(fields, "value", line_no);
            if (value != "stop" && value != "cross") {
                throw TraceParseError(line_no, "unknown gesture '" + value + "'");
            }
            e.action = Gesture{value == "stop" ? GestureKind::Stop : GestureKind::Cross};
        } else if (act == "say") {
            e.action = Say{field(fields, "text", line_no)};
        } else if (act == "denm") {
            SendDenm d;
            const std::string& action = field(fields, "action", line_no);
            if (action != "new" && action != "terminate") {
                throw TraceParseError(line_no, "unknown denm action '" + action + "'");
            }
            d.action = action == "new" ? DenmAction::New : DenmAction::Terminate;
            d.sequence = station32("seq");
            e.action = d;
        } else if (act == "cam") {
            e.action = SendCam{};
        } else {
            throw TraceParseError(line_no, "unknown action '" + act + "'");
        }
        out.payload = e;
    } else if (kind == "sent") {
        ev::MsgSent e;
        e.sender = station32("sender");
        e.type = field(fields, "type", line_no);
        e.bytes = to_u64(field(fields, "bytes", line_no), line_no);
        out.payload = e;
    } else if (kind == "delivered" || kind == "dropped") {
        const std::uint32_t receiver = station32("receiver");
        const std::uint32_t sender = station32("sender");
        const std::string& type = field(fields, "type", line_no);
        const std::uint64_t sent = to_u64(field(fields, "sent", line_no), line_no);
        if (kind == "delivered") {
            out.payload = ev::MsgDelivered{receiver, sender, type, sent};
        } else {
            out.payload = ev::MsgDropped{receiver, sender, type, sent};
        }
    } else if (kind == "display") {
        ev::DisplayChange e;
        e.station = station32("station");
        e.text = field(fields, "text", line_no);
        out.payload = e;
    } else if (kind == "pos") {
        ev::PositionSample e;
        e.station = station32("station");
        e.role = role_from(field(fields, "role", line_no), line_no);
        e.x = to_double(field(fields, "x", line_no), line_no);
        e.y = to_double(field(fields, "y", line_no), line_no);
        e.speed = to_double(field(fields, "speed", line_no), line_no);
        e.heading = to_double(field(fields, "heading", line_no), line_no);
        out.payload = e;
    } else if (kind == "violation") {
        ev::Violation e;
        e.pedestrian = station32("pedestrian");
        e.vehicle = station32("vehicle");
        e.distance = to_double(field(fields, "distance", line_no), line_no);
        out.payload = e;
    } else {
        throw TraceParseError(line_no, "unknown event kind '" + kind + "'");
    }
    return out;
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::vector<TraceEvent> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        out.push_back(parse_event(line, line_no));
    }
    return out;
}

MetricsSummary fold_metrics(std::span<const TraceEvent> events) {
    MetricsSummary m;

    std::uint64_t last_tick = 0;
    std::map<std::uint32_t, std::uint64_t> waiting_since;  // pedestrians currently waiting
    std::set<std::uint32_t> pedestrians;
    std::set<std::uint32_t> done;
    std::uint64_t denm_delivered = 0;
    std::uint64_t denm_dropped = 0;

    // Per-tick position buffers for the pairwise distance scan.
    std::uint64_t pos_tick = 0;
    std::vector<std::pair<double, double>> ped_pos;
    std::vector<std::pair<double, double>> veh_pos;
    auto flush_positions = [&]() {
        for (const auto& [px, py] : ped_pos) {
            for (const auto& [vx, vy] : veh_pos) {
                const double d = std::hypot(px - vx, py - vy);
                m.min_ped_vehicle_distance = std::min(m.min_ped_vehicle_distance, d);
            }
        }
        ped_pos.clear();
        veh_pos.clear();
    };

    for (const TraceEvent& event : events) {
        last_tick = std::max(last_tick, event.tick);
        if (event.tick != pos_tick) {
            flush_positions();
            pos_tick = event.tick;
        }

        if (const auto* phase = std::get_if<ev::PhaseChange>(&event.payload)) {
            if (phase->role == Role::Pedestrian) {
                pedestrians.insert(phase->station);
                if (phase->to == "Waiting") {
                    waiting_since[phase->station] = event.tick;
                }
                if (phase->from == "Waiting") {
                    const auto it = waiting_since.find(phase->station);
                    if (it != waiting_since.end()) {
                        m.pedestrian_wait_ticks += event.tick - it->second;
                        waiting_since.erase(it);
                    }
                }
                if (phase->to == "Done") {
                    done.insert(phase->station);
                }
            }
        } else if (const auto* sent = std::get_if<ev::MsgSent>(&event.payload)) {
            if (sent->type == "denm") {
                ++m.denm_count;
            }
        } else if (const auto* delivered = std::get_if<ev::MsgDelivered>(&event.payload)) {
            if (delivered->type == "denm") {
                ++denm_delivered;
            }
        } else if (const auto* dropped = std::get_if<ev::MsgDropped>(&event.payload)) {
            if (dropped->type == "denm") {
                ++denm_dropped;
            }
        } else if (const auto* pos = std::get_if<ev::PositionSample>(&event.payload)) {
            if (pos->role == Role::Pedestrian) {
                pedestrians.insert(pos->station);
                ped_pos.emplace_back(pos->x, pos->y);
            } else if (pos->role == Role::Vehicle) {
                veh_pos.emplace_back(pos->x, pos->y);
            }
        } else if (std::get_if<ev::Violation>(&event.payload) != nullptr) {
            ++m.violations;
        }
    }
    flush_positions();

    for (const auto& [station, since] : waiting_since) {
        m.pedestrian_wait_ticks += last_tick - since;  // still waiting at trace end
    }
    m.crossing_completed = !pedestrians.empty() && done == pedestrians;
    const std::uint64_t denm_attempts = denm_delivered + denm_dropped;
    m.denm_delivery_ratio =
        denm_attempts == 0 ? 0.0 : static_cast<double>(denm_delivered) / static_cast<double>(denm_attempts);
    return m;
}

std::string format_metrics(const MetricsSummary& m) {
    std::string out;
    out += fmt("pedestrian_wait_ticks: %" PRIu64 "\n", m.pedestrian_wait_ticks);
    out += fmt("crossing_completed: %s\n", m.crossing_completed ? "true" : "false");
    out += fmt("denm_count: %" PRIu64 "\n", m.denm_count);
    out += fmt("denm_delivery_ratio: %.6f\n", m.denm_delivery_ratio);
    if (std::isfinite(m.min_ped_vehicle_distance)) {
        out += fmt("min_ped_vehicle_distance: %.6f\n", m.min_ped_vehicle_distance);
    } else {
        out += "min_ped_vehicle_distance: inf\n";
    }
    out += fmt("violations: %" PRIu64 "\n", m.violations);
    return out;
}

}  // namespace crossguard::harness
