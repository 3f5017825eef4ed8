#include "crossguard/messages.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace crossguard::messages {

namespace {

enum : std::uint8_t {
    kTagCam = 1,
    kTagDenm = 2,
    kTagCpm = 3,
    kTagStubBase = 4,  // stubs occupy 4..9 in StubKind order
};

constexpr std::size_t kPerceivedObjectBytes = 8 * 4 + 1 + 8;  // pos, speed, heading, type, confidence

bool valid_station_type(std::uint8_t v) {
    return v <= static_cast<std::uint8_t>(StationType::Robot);
}

bool valid_cause(std::uint8_t v) {
    return v == static_cast<std::uint8_t>(DenmCause::HumanPresenceOnTheRoad) ||
           v == static_cast<std::uint8_t>(DenmCause::StationaryVehicle) ||
           v == static_cast<std::uint8_t>(DenmCause::CollisionRisk);
}

bool valid_heading(double h) {
    return std::isfinite(h) && h >= 0.0 && h < core::kTwoPi;
}

bool valid_lat_lon(double lat, double lon) {
    return std::isfinite(lat) && std::isfinite(lon) && std::abs(lat) <= 90.0 && std::abs(lon) <= 180.0;
}

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(v >> shift));
        }
    }
    void u64(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(v >> shift));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

// Bounds-checked big-endian reader. Every read reports the offset the field
// started at so errors can name it.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    bool u8(std::uint8_t& v) {
        if (remaining() < 1) return false;
        v = data_[pos_++];
        return true;
    }
    bool u16(std::uint16_t& v) {
        if (remaining() < 2) return false;
        v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return true;
    }
    bool u32(std::uint32_t& v) {
        if (remaining() < 4) return false;
        v = 0;
        for (int i = 0; i < 4; ++i) {
            v = (v << 8) | data_[pos_ + i];
        }
        pos_ += 4;
        return true;
    }
    bool u64(std::uint64_t& v) {
        if (remaining() < 8) return false;
        v = 0;
        for (int i = 0; i < 8; ++i) {
            v = (v << 8) | data_[pos_ + i];
        }
        pos_ += 8;
        return true;
    }
    bool f64(double& v) {
        std::uint64_t raw = 0;
        if (!u64(raw)) return false;
        v = std::bit_cast<double>(raw);
        return true;
    }
    bool bytes(std::size_t n, std::vector<std::uint8_t>& v) {
        if (remaining() < n) return false;
        v.assign(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                 data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return true;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_{0};
};

DecodeError err(DecodeErrorKind kind, std::size_t offset, std::string detail) {
    return DecodeError{kind, offset, std::move(detail)};
}

}  // namespace

bool is_vehicle(StationType type) {
    switch (type) {
        case StationType::Cyclist:
        case StationType::Moped:
        case StationType::PassengerCar:
        case StationType::Bus:
            return true;
        case StationType::Pedestrian:
        case StationType::RoadSideUnit:
        case StationType::Robot:
            return false;
    }
    return false;
}

const char* to_string(StationType type) {
    switch (type) {
        case StationType::Pedestrian: return "pedestrian";
        case StationType::Cyclist: return "cyclist";
        case StationType::Moped: return "moped";
        case StationType::PassengerCar: return "passenger_car";
        case StationType::Bus: return "bus";
        case StationType::RoadSideUnit: return "roadside_unit";
        case StationType::Robot: return "robot";
    }
    return "unknown";
}

std::optional<StationType> station_type_from_string(const std::string& name) {
    for (std::uint8_t v = 0; v <= static_cast<std::uint8_t>(StationType::Robot); ++v) {
        const auto type = static_cast<StationType>(v);
        if (name == to_string(type)) {
            return type;
        }
    }
    return std::nullopt;
}

std::optional<StationId> station_id_of(const V2xMessage& msg) {
    if (msg.is_cam()) return msg.cam().station_id;
    if (msg.is_denm()) return msg.denm().station_id;
    if (msg.is_cpm()) return msg.cpm().station_id;
    return std::nullopt;
}

const char* type_name(const V2xMessage& msg) {
    if (msg.is_cam()) return "cam";
    if (msg.is_denm()) return "denm";
    if (msg.is_cpm()) return "cpm";
    switch (msg.stub().kind) {
        case StubKind::Spatem: return "spatem";
        case StubKind::Mapem: return "mapem";
        case StubKind::Ivim: return "ivim";
        case StubKind::Srem: return "srem";
        case StubKind::Ssem: return "ssem";
        case StubKind::Rum: return "rum";
    }
    return "unknown";
}

bool operator==(const Cam& a, const Cam& b) {
    return a.station_id == b.station_id && a.station_type == b.station_type && a.latitude == b.latitude &&
           a.longitude == b.longitude && a.speed == b.speed && a.heading == b.heading &&
           a.generation_tick == b.generation_tick;
}

bool operator==(const Denm& a, const Denm& b) {
    return a.station_id == b.station_id && a.cause_code == b.cause_code && a.event_latitude == b.event_latitude &&
           a.event_longitude == b.event_longitude && a.action == b.action && a.sequence_number == b.sequence_number;
}

bool operator==(const PerceivedObject& a, const PerceivedObject& b) {
    return a.rel_position == b.rel_position && a.speed == b.speed && a.heading == b.heading &&
           a.object_type == b.object_type && a.confidence == b.confidence;
}

bool operator==(const Cpm& a, const Cpm& b) {
    return a.station_id == b.station_id && a.origin_latitude == b.origin_latitude &&
           a.origin_longitude == b.origin_longitude && a.objects == b.objects;
}

bool operator==(const StubMessage& a, const StubMessage& b) {
    return a.kind == b.kind && a.payload == b.payload;
}

bool operator==(const V2xMessage& a, const V2xMessage& b) {
    return a.payload == b.payload;
}

const char* to_string(DecodeErrorKind kind) {
    switch (kind) {
        case DecodeErrorKind::UnknownTag: return "UnknownTag";
        case DecodeErrorKind::VersionMismatch: return "VersionMismatch";
        case DecodeErrorKind::Truncated: return "Truncated";
        case DecodeErrorKind::InvariantViolation: return "InvariantViolation";
        case DecodeErrorKind::TrailingBytes: return "TrailingBytes";
    }
    return "unknown";
}

std::optional<std::string> validate(const V2xMessage& msg) {
    if (msg.is_cam()) {
        const Cam& c = msg.cam();
        if (!valid_lat_lon(c.latitude, c.longitude)) return "cam lat/lon outside WGS84 bounds";
        if (!std::isfinite(c.speed) || c.speed < 0.0) return "cam speed must be >= 0";
        if (!valid_heading(c.heading)) return "cam heading must be normalized to [0, 2*pi)";
        return std::nullopt;
    }
    if (msg.is_denm()) {
        const Denm& d = msg.denm();
        if (!valid_cause(static_cast<std::uint8_t>(d.cause_code))) return "denm cause code unknown";
        if (!valid_lat_lon(d.event_latitude, d.event_longitude)) return "denm event position outside WGS84 bounds";
        return std::nullopt;
    }
    if (msg.is_cpm()) {
        const Cpm& c = msg.cpm();
        if (!valid_lat_lon(c.origin_latitude, c.origin_longitude)) return "cpm origin outside WGS84 bounds";
        for (const PerceivedObject& o : c.objects) {
            if (!std::isfinite(o.rel_position.x) || !std::isfinite(o.rel_position.y)) return "cpm object position not finite";
            if (!std::isfinite(o.speed) || o.speed < 0.0) return "cpm object speed must be >= 0";
            if (!valid_heading(o.heading)) return "cpm object heading must be normalized to [0, 2*pi)";
            if (!std::isfinite(o.confidence) || o.confidence < 0.0 || o.confidence > 1.0)
                return "cpm object confidence must be in [0, 1]";
        }
        return std::nullopt;
    }
    return std::nullopt;  // stub payloads are opaque
}

std::vector<std::uint8_t> encode(const V2xMessage& msg) {
    if (auto violation = validate(msg)) {
        throw std::invalid_argument("encode: " + *violation);
    }
    Writer w;
    if (msg.is_cam()) {
        const Cam& c = msg.cam();
        w.u8(kTagCam);
        w.u16(kSchemaVersion);
        w.u32(c.station_id.value);
        w.u8(static_cast<std::uint8_t>(c.station_type));
        w.f64(c.latitude);
        w.f64(c.longitude);
        w.f64(c.speed);
        w.f64(c.heading);
        w.u64(c.generation_tick);
    } else if (msg.is_denm()) {
        const Denm& d = msg.denm();
        w.u8(kTagDenm);
        w.u16(kSchemaVersion);
        w.u32(d.station_id.value);
        w.u8(static_cast<std::uint8_t>(d.cause_code));
        w.f64(d.event_latitude);
        w.f64(d.event_longitude);
        w.u8(static_cast<std::uint8_t>(d.action));
        w.u32(d.sequence_number);
    } else if (msg.is_cpm()) {
        const Cpm& c = msg.cpm();
        w.u8(kTagCpm);
        w.u16(kSchemaVersion);
        w.u32(c.station_id.value);
        w.f64(c.origin_latitude);
        w.f64(c.origin_longitude);
        w.u32(static_cast<std::uint32_t>(c.objects.size()));
        for (const PerceivedObject& o : c.objects) {
            w.f64(o.rel_position.x);
            w.f64(o.rel_position.y);
            w.f64(o.speed);
            w.f64(o.heading);
            w.u8(static_cast<std::uint8_t>(o.object_type));
            w.f64(o.confidence);
        }
    } else {
        const StubMessage& s = msg.stub();
        w.u8(static_cast<std::uint8_t>(kTagStubBase + static_cast<std::uint8_t>(s.kind)));
        w.u16(kSchemaVersion);
        w.u32(static_cast<std::uint32_t>(s.payload.size()));
        w.bytes(s.payload);
    }
    return w.take();
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);

    std::uint8_t tag = 0;
    if (!r.u8(tag)) {
        return err(DecodeErrorKind::Truncated, 0, "missing message-type tag");
    }
    if (tag < kTagCam || tag > kTagStubBase + static_cast<std::uint8_t>(StubKind::Rum)) {
        return err(DecodeErrorKind::UnknownTag, 0, "unknown message-type tag");
    }

    const std::size_t version_at = r.offset();
    std::uint16_t version = 0;
    if (!r.u16(version)) {
        return err(DecodeErrorKind::Truncated, version_at, "missing schema version");
    }
    if (version != kSchemaVersion) {
        return err(DecodeErrorKind::VersionMismatch, version_at, "unsupported schema version");
    }

    V2xMessage msg;
    if (tag == kTagCam) {
        Cam c;
        std::size_t at = r.offset();
        if (!r.u32(c.station_id.value)) return err(DecodeErrorKind::Truncated, at, "cam station id");
        at = r.offset();
        std::uint8_t type_raw = 0;
        if (!r.u8(type_raw)) return err(DecodeErrorKind::Truncated, at, "cam station type");
        if (!valid_station_type(type_raw)) return err(DecodeErrorKind::InvariantViolation, at, "cam station type");
        c.station_type = static_cast<StationType>(type_raw);
        at = r.offset();
        if (!r.f64(c.latitude)) return err(DecodeErrorKind::Truncated, at, "cam latitude");
        if (!r.f64(c.longitude)) return err(DecodeErrorKind::Truncated, r.offset(), "cam longitude");
        if (!valid_lat_lon(c.latitude, c.longitude)) return err(DecodeErrorKind::InvariantViolation, at, "cam lat/lon");
        at = r.offset();
        if (!r.f64(c.speed)) return err(DecodeErrorKind::Truncated, at, "cam speed");
        if (!std::isfinite(c.speed) || c.speed < 0.0) return err(DecodeErrorKind::InvariantViolation, at, "cam speed");
        at = r.offset();
        if (!r.f64(c.heading)) return err(DecodeErrorKind::Truncated, at, "cam heading");
        if (!valid_heading(c.heading)) return err(DecodeErrorKind::InvariantViolation, at, "cam heading");
        at = r.offset();
        if (!r.u64(c.generation_tick)) return err(DecodeErrorKind::Truncated, at, "cam generation tick");
        msg = V2xMessage(std::move(c));
    } else if (tag == kTagDenm) {
        Denm d;
        std::size_t at = r.offset();
        if (!r.u32(d.station_id.value)) return err(DecodeErrorKind::Truncated, at, "denm station id");
        at = r.offset();
        std::uint8_t cause_raw = 0;
        if (!r.u8(cause_raw)) return err(DecodeErrorKind::Truncated, at, "denm cause code");
        if (!valid_cause(cause_raw)) return err(DecodeErrorKind::InvariantViolation, at, "denm cause code");
        d.cause_code = static_cast<DenmCause>(cause_raw);
        at = r.offset();
        if (!r.f64(d.event_latitude)) return err(DecodeErrorKind::Truncated, at, "denm event latitude");
        if (!r.f64(d.event_longitude)) return err(DecodeErrorKind::Truncated, r.offset(), "denm event longitude");
        if (!valid_lat_lon(d.event_latitude, d.event_longitude))
            return err(DecodeErrorKind::InvariantViolation, at, "denm event position");
        at = r.offset();
        std::uint8_t action_raw = 0;
        if (!r.u8(action_raw)) return err(DecodeErrorKind::Truncated, at, "denm action");
        if (action_raw > static_cast<std::uint8_t>(DenmAction::Terminate))
            return err(DecodeErrorKind::InvariantViolation, at, "denm action");
        d.action = static_cast<DenmAction>(action_raw);
        at = r.offset();
        if (!r.u32(d.sequence_number)) return err(DecodeErrorKind::Truncated, at, "denm sequence number");
        msg = V2xMessage(std::move(d));
    } else if (tag == kTagCpm) {
        Cpm c;
        std::size_t at = r.offset();
        if (!r.u32(c.station_id.value)) return err(DecodeErrorKind::Truncated, at, "cpm station id");
        at = r.offset();
        if (!r.f64(c.origin_latitude)) return err(DecodeErrorKind::Truncated, at, "cpm origin latitude");
        if (!r.f64(c.origin_longitude)) return err(DecodeErrorKind::Truncated, r.offset(), "cpm origin longitude");
        if (!valid_lat_lon(c.origin_latitude, c.origin_longitude))
            return err(DecodeErrorKind::InvariantViolation, at, "cpm origin");
        const std::size_t count_at = r.offset();
        std::uint32_t count = 0;
        if (!r.u32(count)) return err(DecodeErrorKind::Truncated, count_at, "cpm object count");
        if (static_cast<std::size_t>(count) * kPerceivedObjectBytes > r.remaining()) {
            return err(DecodeErrorKind::Truncated, count_at, "cpm object list exceeds available bytes");
        }
        c.objects.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            PerceivedObject o;
            at = r.offset();
            double x = 0.0, y = 0.0;
            r.f64(x);  // sizes pre-checked against the count
            r.f64(y);
            if (!std::isfinite(x) || !std::isfinite(y))
                return err(DecodeErrorKind::InvariantViolation, at, "cpm object position");
            o.rel_position = Point(x, y);
            at = r.offset();
            r.f64(o.speed);
            if (!std::isfinite(o.speed) || o.speed < 0.0)
                return err(DecodeErrorKind::InvariantViolation, at, "cpm object speed");
            at = r.offset();
            r.f64(o.heading);
            if (!valid_heading(o.heading)) return err(DecodeErrorKind::InvariantViolation, at, "cpm object heading");
            at = r.offset();
            std::uint8_t type_raw = 0;
            r.u8(type_raw);
            if (!valid_station_type(type_raw))
                return err(DecodeErrorKind::InvariantViolation, at, "cpm object type");
            o.object_type = static_cast<StationType>(type_raw);
            at = r.offset();
            r.f64(o.confidence);
            if (!std::isfinite(o.confidence) || o.confidence < 0.0 || o.confidence > 1.0)
                return err(DecodeErrorKind::InvariantViolation, at, "cpm object confidence");
            c.objects.push_back(o);
        }
        msg = V2xMessage(std::move(c));
    } else {
        StubMessage s;
        s.kind = static_cast<StubKind>(tag - kTagStubBase);
        const std::size_t len_at = r.offset();
        std::uint32_t len = 0;
        if (!r.u32(len)) return err(DecodeErrorKind::Truncated, len_at, "stub payload length");
        if (!r.bytes(len, s.payload)) {
            return err(DecodeErrorKind::Truncated, len_at, "stub payload exceeds available bytes");
        }
        msg = V2xMessage(std::move(s));
    }

    if (r.remaining() != 0) {
        return err(DecodeErrorKind::TrailingBytes, r.offset(), "bytes past end of message");
    }
    return msg;
}

void write_message_record(std::ostream& out, std::span<const std::uint8_t> encoded) {
    const auto len = static_cast<std::uint32_t>(encoded.size());
    char prefix[4];
    for (int i = 0; i < 4; ++i) {
        prefix[i] = static_cast<char>(len >> (24 - 8 * i));
    }
    out.write(prefix, 4);
    out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(encoded.size()));
}

std::vector<std::vector<std::uint8_t>> read_message_records(std::istream& in) {
    std::vector<std::vector<std::uint8_t>> records;
    while (true) {
        char prefix[4];
        in.read(prefix, 4);
        if (in.gcount() == 0 && in.eof()) {
            break;
        }
        if (in.gcount() != 4) {
            throw std::runtime_error("message log: truncated record length");
        }
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i) {
            len = (len << 8) | static_cast<std::uint8_t>(prefix[i]);
        }
        std::vector<std::uint8_t> record(len);
        in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(len));
        if (static_cast<std::uint32_t>(in.gcount()) != len) {
            throw std::runtime_error("message log: truncated record body");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<PerceivedObject> fuse_perception(const std::vector<PerceivedObject>& own,
                                             const std::vector<Cpm>& received,
                                             const Point& self_pos,
                                             const GeoRef& ref) {
    struct Cluster {
        StationType type;
        double heading;
        double rep_confidence;
        double max_confidence;
        double weight{0.0};
        double wx{0.0}, wy{0.0}, wspeed{0.0};
        double sx{0.0}, sy{0.0}, sspeed{0.0};  // unweighted fallback sums
        std::size_t count{0};

        Point mean() const {
            if (weight > 0.0) return Point(wx / weight, wy / weight);
            return Point(sx / static_cast<double>(count), sy / static_cast<double>(count));
        }
        double mean_speed() const {
            if (weight > 0.0) return wspeed / weight;
            return sspeed / static_cast<double>(count);
        }
    };

    std::vector<Cluster> clusters;

    auto absorb = [](Cluster& c, const Point& pos, const PerceivedObject& o) {
        c.weight += o.confidence;
        c.wx += o.confidence * pos.x;
        c.wy += o.confidence * pos.y;
        c.wspeed += o.confidence * o.speed;
        c.sx += pos.x;
        c.sy += pos.y;
        c.sspeed += o.speed;
        c.count += 1;
        if (o.confidence > c.rep_confidence) {  // strict: earlier (own) objects win ties
            c.rep_confidence = o.confidence;
            c.heading = o.heading;
        }
        c.max_confidence = std::max(c.max_confidence, o.confidence);
    };

    auto place = [&](const Point& pos, const PerceivedObject& o) {
        Cluster* best = nullptr;
        double best_dist = 0.0;
        for (Cluster& c : clusters) {
            if (c.type != o.object_type) continue;
            const double d = c.mean().distance_to(pos);
            if (d > kFusionMergeRadius) continue;
            if (best == nullptr || d < best_dist) {  // first-seen cluster wins distance ties
                best = &c;
                best_dist = d;
            }
        }
        if (best != nullptr) {
            absorb(*best, pos, o);
            return;
        }
        Cluster c{o.object_type, o.heading, -1.0, 0.0};
        absorb(c, pos, o);
        clusters.push_back(c);
    };

    for (const PerceivedObject& o : own) {
        place(Point(self_pos.x + o.rel_position.x, self_pos.y + o.rel_position.y), o);
    }
    for (const Cpm& cpm : received) {
        const Point origin = core::geo_to_local(ref, cpm.origin_latitude, cpm.origin_longitude);
        for (const PerceivedObject& o : cpm.objects) {
            place(Point(origin.x + o.rel_position.x, origin.y + o.rel_position.y), o);
        }
    }

    std::vector<PerceivedObject> out;
    out.reserve(clusters.size());
    for (const Cluster& c : clusters) {
        PerceivedObject o;
        o.rel_position = c.mean();
        o.speed = c.mean_speed();
        o.heading = c.heading;
        o.object_type = c.type;
        o.confidence = c.max_confidence;
        out.push_back(o);
    }
    return out;
}

}  // namespace crossguard::messages
