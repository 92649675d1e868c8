#pragma once

#include "dqrng/protocol.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace dqrng {

using Json = nlohmann::ordered_json;

// Canonical JSON: fixed key order, no whitespace, unsigned values of 2^53
// or more written as decimal strings.
Json u64_json(std::uint64_t v);
std::uint64_t u64_from_json(const Json& j);

Json to_json(const PumpShape& shape);
PumpShape pump_from_json(const Json& j);

Json to_json(const SessionParams& params);
SessionParams params_from_json(const Json& j);

Json to_json(const ClassicalReveal& reveal);
ClassicalReveal classical_from_json(const Json& j);

// Indices are delta-encoded: the first absolute, the rest as gaps.
Json to_json(const QuantumReveal& reveal);
QuantumReveal quantum_from_json(const Json& j);

Json to_json(const PairVerdict& verdict);
PairVerdict verdict_from_json(const Json& j);

Json to_json(const RoundTranscript& transcript);
RoundTranscript transcript_from_json(const Json& j);

/// Canonical bytes; identical to to_json(x).dump().
std::string canonical_json(const RoundTranscript& transcript);
std::string canonical_json(const ClassicalReveal& reveal);
std::string canonical_json(const QuantumReveal& reveal);
RoundTranscript parse_transcript(std::string_view text);

std::string sha256_hex(std::string_view bytes);

/// SHA-256 of the canonical transcript bytes.
std::string transcript_hash(const RoundTranscript& transcript);

} // namespace dqrng
