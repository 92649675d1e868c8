#pragma once

#include "dqrng/adversary.hpp"
#include "dqrng/protocol.hpp"
#include "dqrng/quantum_sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dqrng {

enum class TransportKind {
    Direct,     // reveals go straight into the session, no encoding
    Loopback,   // in-process bus, envelopes copied
    SocketPair, // AF_UNIX socket pairs with full framing
    Tcp,        // 127.0.0.1 sockets
};

const char* transport_name(TransportKind kind);
TransportKind transport_from_name(const std::string& name);

struct RoundConfig {
    SessionParams session;
    SourceConfig source;              // n_nodes, n_pulses and bin count follow session
    std::vector<Strategy> strategies; // empty means everyone is honest
    TransportKind transport = TransportKind::Loopback;
    std::vector<std::uint16_t> tcp_ports; // empty means ephemeral ports
    bool allow_full_collusion = false;
    bool hash_transcript = true;

    /// Copies n, n_pulses and the period binning from the session into the source.
    void sync_source();
    void validate() const;
};

enum class RoundStatus { Accepted, VerificationFailed, EmptySelection, InsufficientEntropy };

const char* status_name(RoundStatus status);

struct RoundOutcome {
    RoundStatus status = RoundStatus::Accepted;
    RoundTranscript transcript;
    std::vector<std::optional<std::uint64_t>> predictions; // as declared in HELLO
    std::string hash;    // transcript hash
    std::string message; // reason for a rejected round
    std::uint64_t pairs_emitted = 0;

    bool accepted() const { return status == RoundStatus::Accepted; }
};

/// One full round: predictions, classical reveals, source, quantum reveals,
/// verification, selection and output. All randomness comes from
/// (root_seed, trial).
RoundOutcome run_round(const RoundConfig& config, std::uint64_t root_seed, std::uint64_t trial);

} // namespace dqrng
