#include "crossguard/netsim.hpp"

#include <algorithm>
#include <stdexcept>

namespace crossguard::netsim {

namespace {

// Distinct stream tags for the per-receiver loss and jitter draws.
constexpr std::uint64_t kLossStream = 0x1b873593a4093822ULL;
constexpr std::uint64_t kJitterStream = 0x6a09e667f3bcc909ULL;

std::uint64_t stream_key(std::uint64_t seed, StationId sender, std::uint64_t tick, StationId receiver) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ sender.value);
    h = mix64(h ^ tick);
    h = mix64(h ^ receiver.value);
    return h;
}

double unit_interval(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

ChannelConfig::ChannelConfig(double range_, double loss, std::uint32_t latency, std::uint32_t jitter,
                             std::uint64_t seed_)
    : range(range_), loss_probability(loss), latency_ticks(latency), jitter_ticks(jitter), seed(seed_) {
    if (!(range > 0.0)) {
        throw std::invalid_argument("channel range must be > 0");
    }
    if (!(loss >= 0.0 && loss <= 1.0)) {
        throw std::invalid_argument("loss probability must be in [0, 1]");
    }
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

BroadcastOutcome broadcast(const ChannelConfig& config,
                           const SimClock& clock,
                           StationId sender,
                           const Point& sender_pos,
                           std::span<const std::uint8_t> msg_bytes,
                           std::span<const Station> stations) {
    BroadcastOutcome outcome;
    for (const Station& station : stations) {
        if (station.id == sender) {
            continue;  // no self-delivery
        }
        if (sender_pos.distance_to(station.pos) > config.range) {
            continue;
        }
        const std::uint64_t key = stream_key(config.seed, sender, clock.tick_index, station.id);
        const double roll = unit_interval(mix64(key ^ kLossStream));
        if (roll < config.loss_probability) {
            outcome.dropped.push_back(station.id);
            continue;
        }
        std::uint64_t jitter = 0;
        if (config.jitter_ticks > 0) {
            jitter = mix64(key ^ kJitterStream) % (static_cast<std::uint64_t>(config.jitter_ticks) + 1);
        }
        InFlightMessage m;
        m.payload.assign(msg_bytes.begin(), msg_bytes.end());
        m.sender = sender;
        m.sender_pos = sender_pos;
        m.sent_tick = clock.tick_index;
        m.deliver_at = clock.tick_index + config.latency_ticks + jitter;
        m.receiver = station.id;
        outcome.scheduled.push_back(std::move(m));
    }
    return outcome;
}

BroadcastOutcome Channel::broadcast(const SimClock& clock,
                                    StationId sender,
                                    const Point& sender_pos,
                                    std::span<const std::uint8_t> msg_bytes,
                                    std::span<const Station> stations) {
    BroadcastOutcome outcome = netsim::broadcast(config_, clock, sender, sender_pos, msg_bytes, stations);
    for (InFlightMessage& m : outcome.scheduled) {
        m.insert_seq = next_seq_++;
        mailbox_.push_back(m);
    }
    return outcome;
}

std::vector<Delivery> Channel::poll(const SimClock& clock) {
    std::vector<InFlightMessage> due;
    auto it = mailbox_.begin();
    while (it != mailbox_.end()) {
        if (it->deliver_at <= clock.tick_index) {
            due.push_back(std::move(*it));
            it = mailbox_.erase(it);
        } else {
            ++it;
        }
    }
    std::sort(due.begin(), due.end(), [](const InFlightMessage& a, const InFlightMessage& b) {
        if (a.deliver_at != b.deliver_at) return a.deliver_at < b.deliver_at;
        if (a.sender.value != b.sender.value) return a.sender.value < b.sender.value;
        return a.insert_seq < b.insert_seq;
    });
    std::vector<Delivery> out;
    out.reserve(due.size());
    for (InFlightMessage& m : due) {
        out.push_back(Delivery{m.receiver, m.sender, m.sent_tick, std::move(m.payload)});
    }
    return out;
}

}  // namespace crossguard::netsim
