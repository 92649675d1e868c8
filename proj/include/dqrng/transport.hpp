#pragma once

#include "dqrng/quantum_sim.hpp"
#include "dqrng/transcript.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dqrng {

enum class MsgType : std::uint8_t { Hello = 0, RevealC = 1, RevealQ = 2, Verdict = 3, Output = 4 };

const char* msg_type_name(MsgType type);
MsgType msg_type_from_name(const std::string& name);

struct Envelope {
    MsgType type = MsgType::Hello;
    ParticipantId sender = 0;
    std::uint64_t seq = 0;
    std::string payload; // canonical JSON text

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

Envelope make_envelope(MsgType type, ParticipantId sender, std::uint64_t seq, const Json& payload);

/// Throws ParseError unless the payload parses as the schema of its type.
void validate_payload(const Envelope& envelope);

inline constexpr std::size_t kMaxFrameBytes = std::size_t{64} << 20;

/// 4-byte big-endian length prefix followed by the canonical JSON body.
std::string encode(const Envelope& envelope);

/// Inverse of encode. Throws FramingError on truncated, empty or oversize
/// frames and ParseError on a malformed body.
Envelope decode(std::span<const std::uint8_t> frame);
Envelope decode(std::string_view frame);

struct DeliveryReceipt {
    ParticipantId sender = 0;
    std::uint64_t seq = 0;
    std::size_t recipients = 0;
};

// Broadcast bus with a fixed delivery order: envelopes are held until
// flush(), then handed to every participant sorted by (type, sender, seq).
// The bus does not know about protocol phases.
class Bus {
public:
    using Receiver = std::function<void(const Envelope&)>;

    explicit Bus(std::uint32_t participants);
    virtual ~Bus();
    Bus(const Bus&) = delete;
    Bus& operator=(const Bus&) = delete;

    std::uint32_t participants() const { return participants_; }
    void subscribe(ParticipantId who, Receiver receiver);

    /// Queues an envelope for every participant, sender included. Rejects
    /// malformed payloads and repeated (sender, seq) pairs.
    DeliveryReceipt broadcast(const Envelope& envelope);

    /// Delivers everything queued so far; returns the number of envelopes
    /// each participant received.
    std::size_t flush();

    /// Forgets (sender, seq) pairs seen so far.
    void new_round();

protected:
    // Moves one validated envelope to every participant's inbox.
    virtual void transmit(const Envelope& envelope) = 0;
    // Blocks until every transmitted envelope has reached its inbox.
    virtual void settle() {}

    void deliver_to(ParticipantId who, Envelope envelope);

private:
    std::uint32_t participants_;
    std::vector<Receiver> receivers_;
    std::set<std::pair<ParticipantId, std::uint64_t>> seen_;
    std::vector<std::vector<Envelope>> inbox_;
    std::mutex inbox_mutex_;
    std::mutex broadcast_mutex_;
};

std::unique_ptr<Bus> make_loopback_bus(std::uint32_t participants);

/// Every ordered pair of participants is joined by an AF_UNIX socket pair;
/// envelopes cross it as encoded frames.
std::unique_ptr<Bus> make_socketpair_bus(std::uint32_t participants);

/// Participant i listens on 127.0.0.1:ports[i] (0 picks a free port) and
/// every node connects to every other. Frames as for the socket pair bus.
std::unique_ptr<Bus> make_tcp_bus(std::span<const std::uint16_t> ports);

} // namespace dqrng
