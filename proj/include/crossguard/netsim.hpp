#ifndef CROSSGUARD_NETSIM_HPP_
#define CROSSGUARD_NETSIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "crossguard/core.hpp"
#include "crossguard/messages.hpp"

namespace crossguard::netsim {

using core::Point;
using core::SimClock;
using messages::StationId;

// Broadcast channel model: hard range disc, independent per-receiver packet
// loss, fixed base latency plus uniform jitter. All randomness is drawn from
// a counter-based stream keyed by (seed, sender, tick, receiver) so delivery
// schedules never depend on iteration order.
struct ChannelConfig {
    double range{400.0};          // meters
    double loss_probability{0.0}; // per receiver per message, [0, 1]
    std::uint32_t latency_ticks{0};
    std::uint32_t jitter_ticks{0};
    std::uint64_t seed{0};

    ChannelConfig() = default;
    ChannelConfig(double range_, double loss, std::uint32_t latency, std::uint32_t jitter, std::uint64_t seed_);
};

struct Station {
    StationId id{};
    Point pos{};
};

struct InFlightMessage {
    std::vector<std::uint8_t> payload;
    StationId sender{};
    Point sender_pos{};        // at send time
    std::uint64_t sent_tick{0};
    std::uint64_t deliver_at{0};
    StationId receiver{};
    std::uint64_t insert_seq{0};  // assigned by the mailbox, breaks same-tick ties
};

struct BroadcastOutcome {
    std::vector<InFlightMessage> scheduled;  // survive loss, one per receiver
    std::vector<StationId> dropped;          // in range but lost
};

/// SplitMix64-style avalanche, the basis of the loss/jitter stream.
std::uint64_t mix64(std::uint64_t x);

/// Schedules one broadcast. Receivers beyond the range disc are skipped
/// silently; in-range receivers are independently dropped with
/// loss_probability or scheduled at tick + latency + uniform(0..jitter).
/// The sender never delivers to itself.
BroadcastOutcome broadcast(const ChannelConfig& config,
                           const SimClock& clock,
                           StationId sender,
                           const Point& sender_pos,
                           std::span<const std::uint8_t> msg_bytes,
                           std::span<const Station> stations);

struct Delivery {
    StationId receiver{};
    StationId sender{};
    std::uint64_t sent_tick{0};
    std::vector<std::uint8_t> payload;
};

// Mailbox holding scheduled messages until their delivery tick.
class Channel {
public:
    explicit Channel(ChannelConfig config) : config_(config) {}

    const ChannelConfig& config() const { return config_; }

    /// Broadcasts via the free function and retains the scheduled messages.
    /// Returns the outcome for tracing.
    BroadcastOutcome broadcast(const SimClock& clock,
                               StationId sender,
                               const Point& sender_pos,
                               std::span<const std::uint8_t> msg_bytes,
                               std::span<const Station> stations);

    /// Returns and removes all messages due at or before the current tick,
    /// ordered by (deliver_at, sender id, insertion sequence).
    std::vector<Delivery> poll(const SimClock& clock);

    std::size_t in_flight() const { return mailbox_.size(); }

private:
    ChannelConfig config_;
    std::vector<InFlightMessage> mailbox_;
    std::uint64_t next_seq_{0};
};

}  // namespace crossguard::netsim

#endif  // CROSSGUARD_NETSIM_HPP_
