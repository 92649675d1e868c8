#pragma once

#include "dqrng/protocol.hpp"
#include "dqrng/quantum_sim.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dqrng {

enum class StrategyKind {
    Honest,
    NaiveFabricator,      // reveals independent random records
    ColludingFabricators, // coalition sharing fabricated records and classical lists
    LastRevealerBias,     // picks its classical list after seeing everyone else's
    DigitalEmulator,      // no quantum access; copies what others revealed
    MitmTakeover,         // controls a victim node's reveals
};

struct Strategy {
    StrategyKind kind = StrategyKind::Honest;
    std::vector<ParticipantId> members; // coalition, for ColludingFabricators
    std::uint64_t target = 0;           // LastRevealerBias
    ParticipantId victim = 0;           // MitmTakeover
    bool alter = false;                 // MitmTakeover: tamper with bins instead of replaying
    std::optional<std::uint64_t> prediction; // declared before the round

    static Strategy of(StrategyKind kind) {
        Strategy s;
        s.kind = kind;
        return s;
    }
    static Strategy honest() { return {}; }
    static Strategy naive_fabricator() { return of(StrategyKind::NaiveFabricator); }
    static Strategy colluding(std::vector<ParticipantId> members, std::optional<std::uint64_t> prediction = {});
    static Strategy last_revealer(std::uint64_t target);
    static Strategy digital_emulator() { return of(StrategyKind::DigitalEmulator); }
    static Strategy mitm(ParticipantId victim, bool alter = false);
};

std::string strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

/// Checks a per-participant strategy list. Coalitions must agree on their
/// membership and leave at least one participant outside, unless
/// `allow_full_collusion` is set.
void validate_pool(std::span<const Strategy> strategies, std::uint32_t n, bool allow_full_collusion = false);

// Fabricated data a coalition agrees on before the round.
struct CoalitionPlan {
    std::vector<std::uint64_t> classical_values; // shared classical list (length m)
    NodeRecords fabricated;                      // index-sorted, identical for every member
};

/// Draws the coalition's shared list and records. When a prediction is set,
/// one fabricated bin is steered so that the coalition-only selection would
/// produce it.
CoalitionPlan plan_coalition(const SessionParams& params, const Strategy& strategy, std::uint64_t seed);

// What a participant has observed when it acts.
struct PoolView {
    const SessionParams& params;
    std::span<const std::optional<ClassicalReveal>> classical;
    std::span<const std::optional<QuantumReveal>> quantum;
};

struct Agent {
    ParticipantId id = 0;
    Strategy strategy;
    Rng rng;
    std::shared_ptr<const CoalitionPlan> plan;

    bool honest() const { return strategy.kind == StrategyKind::Honest; }
};

ClassicalReveal act_classical(Agent& agent, const PoolView& view);
QuantumReveal act_quantum(Agent& agent, const PoolView& view, const NodeRecords& true_records);

} // namespace dqrng
