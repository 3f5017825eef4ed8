#ifndef CROSSGUARD_MESSAGES_HPP_
#define CROSSGUARD_MESSAGES_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crossguard/core.hpp"

namespace crossguard::messages {

using core::GeoRef;
using core::Point;

inline constexpr std::uint16_t kSchemaVersion = 1;

struct StationId {
    std::uint32_t value{0};

    StationId() = default;
    explicit StationId(std::uint32_t v) : value(v) {}

    friend bool operator==(StationId a, StationId b) { return a.value == b.value; }
    friend bool operator!=(StationId a, StationId b) { return a.value != b.value; }
    friend bool operator<(StationId a, StationId b) { return a.value < b.value; }
};

enum class StationType : std::uint8_t {
    Pedestrian = 0,
    Cyclist = 1,
    Moped = 2,
    PassengerCar = 3,
    Bus = 4,
    RoadSideUnit = 5,
    Robot = 6,
};

/// Station types the robot tracks as potential zone hazards.
bool is_vehicle(StationType type);

const char* to_string(StationType type);
std::optional<StationType> station_type_from_string(const std::string& name);

// Periodic awareness heartbeat: who and where a station is.
struct Cam {
    StationId station_id{};
    StationType station_type{StationType::Pedestrian};
    double latitude{0.0};   // degrees
    double longitude{0.0};  // degrees
    double speed{0.0};      // m/s
    double heading{0.0};    // rad, [0, 2*pi)
    std::uint64_t generation_tick{0};
};

enum class DenmCause : std::uint8_t {
    HumanPresenceOnTheRoad = 12,
    StationaryVehicle = 94,
    CollisionRisk = 97,
};

enum class DenmAction : std::uint8_t {
    New = 0,
    Terminate = 1,
};

// Event-triggered warning. A Terminate refers to the (station_id,
// sequence_number) of an earlier New.
struct Denm {
    StationId station_id{};
    DenmCause cause_code{DenmCause::HumanPresenceOnTheRoad};
    double event_latitude{0.0};
    double event_longitude{0.0};
    DenmAction action{DenmAction::New};
    std::uint32_t sequence_number{0};
};

struct PerceivedObject {
    Point rel_position{};  // meters, relative to the originating station
    double speed{0.0};
    double heading{0.0};
    StationType object_type{StationType::Pedestrian};
    double confidence{1.0};  // [0, 1]
};

// Broadcast of locally perceived objects.
struct Cpm {
    StationId station_id{};
    double origin_latitude{0.0};
    double origin_longitude{0.0};
    std::vector<PerceivedObject> objects;
};

enum class StubKind : std::uint8_t {
    Spatem = 0,
    Mapem = 1,
    Ivim = 2,
    Srem = 3,
    Ssem = 4,
    Rum = 5,
};

// Declared message kinds without semantics; payload is opaque.
struct StubMessage {
    StubKind kind{StubKind::Spatem};
    std::vector<std::uint8_t> payload;
};

struct V2xMessage {
    std::variant<Cam, Denm, Cpm, StubMessage> payload;

    V2xMessage() = default;
    V2xMessage(Cam m) : payload(std::move(m)) {}
    V2xMessage(Denm m) : payload(std::move(m)) {}
    V2xMessage(Cpm m) : payload(std::move(m)) {}
    V2xMessage(StubMessage m) : payload(std::move(m)) {}

    bool is_cam() const { return std::holds_alternative<Cam>(payload); }
    bool is_denm() const { return std::holds_alternative<Denm>(payload); }
    bool is_cpm() const { return std::holds_alternative<Cpm>(payload); }
    bool is_stub() const { return std::holds_alternative<StubMessage>(payload); }

    const Cam& cam() const { return std::get<Cam>(payload); }
    const Denm& denm() const { return std::get<Denm>(payload); }
    const Cpm& cpm() const { return std::get<Cpm>(payload); }
    const StubMessage& stub() const { return std::get<StubMessage>(payload); }
};

/// Station identity of the payload; stubs carry none.
std::optional<StationId> station_id_of(const V2xMessage& msg);

const char* type_name(const V2xMessage& msg);

bool operator==(const Cam& a, const Cam& b);
bool operator==(const Denm& a, const Denm& b);
bool operator==(const PerceivedObject& a, const PerceivedObject& b);
bool operator==(const Cpm& a, const Cpm& b);
bool operator==(const StubMessage& a, const StubMessage& b);
bool operator==(const V2xMessage& a, const V2xMessage& b);

// ---------------------------------------------------------------------------
// Codec: fixed-layout self-describing binary format.
//
//   byte 0      message-type tag (Cam=1, Denm=2, Cpm=3, stubs 4..9)
//   bytes 1..2  schema version, big-endian u16
//   then fields in declaration order: integers big-endian fixed width,
//   floating point as IEEE-754 binary64 big-endian, lists prefixed with a
//   big-endian u32 element count.
// ---------------------------------------------------------------------------

enum class DecodeErrorKind {
    UnknownTag,
    VersionMismatch,
    Truncated,
    InvariantViolation,
    TrailingBytes,
};

struct DecodeError {
    DecodeErrorKind kind{DecodeErrorKind::Truncated};
    std::size_t offset{0};  // byte offset the error was detected at
    std::string detail;
};

const char* to_string(DecodeErrorKind kind);

using DecodeResult = std::variant<V2xMessage, DecodeError>;

/// Validates message invariants; returns a description of the first violation.
std::optional<std::string> validate(const V2xMessage& msg);

/// Deterministic serialization. Throws std::invalid_argument when the
/// message violates its invariants.
std::vector<std::uint8_t> encode(const V2xMessage& msg);

/// Total inverse of encode: any byte string yields either a message or a
/// typed error, never aborts.
DecodeResult decode(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Message logs: one length-prefixed record per message (big-endian u32
// length, then the encoded bytes). The on-disk companion of the wire format.
// ---------------------------------------------------------------------------

void write_message_record(std::ostream& out, std::span<const std::uint8_t> encoded);

/// Reads records until end of stream. Throws std::runtime_error when the
/// stream ends inside a record.
std::vector<std::vector<std::uint8_t>> read_message_records(std::istream& in);

// ---------------------------------------------------------------------------
// Perception fusion
// ---------------------------------------------------------------------------

inline constexpr double kFusionMergeRadius = 2.0;  // meters

/// Merges own-sensor objects with objects carried by received CPMs. All
/// positions in the result are absolute local-frame coordinates; own objects
/// are interpreted relative to self_pos, CPM objects relative to their
/// origin station. Objects of the same type within the merge radius collapse
/// into one with confidence-weighted mean position/speed and the maximum
/// confidence; own-sensor objects win ties.
std::vector<PerceivedObject> fuse_perception(const std::vector<PerceivedObject>& own,
                                             const std::vector<Cpm>& received,
                                             const Point& self_pos,
                                             const GeoRef& ref);

}  // namespace crossguard::messages

#endif  // CROSSGUARD_MESSAGES_HPP_
