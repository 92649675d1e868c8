#include "dqrng/runner.hpp"

#include "dqrng/errors.hpp"
#include "dqrng/seed.hpp"
#include "dqrng/transcript.hpp"
#include "dqrng/transport.hpp"

#include <algorithm>
#include <map>

namespace dqrng {

const char* transport_name(TransportKind kind) {
    switch (kind) {
    case TransportKind::Direct: return "direct";
    case TransportKind::Loopback: return "loopback";
    case TransportKind::SocketPair: return "socketpair";
    case TransportKind::Tcp: return "tcp";
    }
    return "unknown";
}

TransportKind transport_from_name(const std::string& name) {
    for (auto k : {TransportKind::Direct, TransportKind::Loopback, TransportKind::SocketPair, TransportKind::Tcp})
        if (name == transport_name(k))
            return k;
    throw ConfigError("unknown transport " + name);
}

const char* status_name(RoundStatus status) {
    switch (status) {
    case RoundStatus::Accepted: return "accepted";
    case RoundStatus::VerificationFailed: return "verification_failed";
    case RoundStatus::EmptySelection: return "empty_selection";
    case RoundStatus::InsufficientEntropy: return "insufficient_entropy";
    }
    return "unknown";
}

void RoundConfig::sync_source() {
    source.n_nodes = session.n;
    source.n_pulses = session.n_pulses;
    source.pump_shape = session.pump_shape;
    source.bin_width_ps = source.period_ps / session.bins_per_period;
}

void RoundConfig::validate() const {
    session.validate();
    source.validate();
    if (source.n_nodes != session.n)
        throw ConfigError("source node count differs from participant count");
    if (source.n_pulses != session.n_pulses)
        throw ConfigError("source pulse count differs from the index domain");
    if (source.bins_per_period() != session.bins_per_period)
        throw ConfigError("source binning differs from session binning");
    if (!strategies.empty())
        validate_pool(strategies, session.n, allow_full_collusion);
    if (transport == TransportKind::Tcp && !tcp_ports.empty() && tcp_ports.size() != session.n)
        throw ConfigError("one tcp port per participant is required");
}

namespace {

// Honest participants act first; a participant watching the wire can always
// wait for everyone else.
std::vector<ParticipantId> acting_order(const std::vector<Agent>& agents) {
    std::vector<ParticipantId> order;
    for (const auto& a : agents)
        if (a.honest())
            order.push_back(a.id);
    for (const auto& a : agents)
        if (!a.honest())
            order.push_back(a.id);
    return order;
}

std::unique_ptr<Bus> make_bus(const RoundConfig& config) {
    switch (config.transport) {
    case TransportKind::Loopback: return make_loopback_bus(config.session.n);
    case TransportKind::SocketPair: return make_socketpair_bus(config.session.n);
    case TransportKind::Tcp: {
        std::vector<std::uint16_t> ports = config.tcp_ports;
        if (ports.empty())
            ports.assign(config.session.n, 0);
        return make_tcp_bus(ports);
    }
    case TransportKind::Direct: break;
    }
    return nullptr;
}

} // namespace

RoundOutcome run_round(const RoundConfig& config, std::uint64_t root_seed, std::uint64_t trial) {
    config.validate();
    const auto& params = config.session;
    const std::uint32_t n = params.n;

    std::vector<Agent> agents(n);
    std::map<ParticipantId, std::shared_ptr<const CoalitionPlan>> plans;
    for (ParticipantId id = 0; id < n; ++id) {
        auto& a = agents[id];
        a.id = id;
        if (!config.strategies.empty())
            a.strategy = config.strategies[id];
        // A node under takeover still sends the victim's own classical list.
        const bool own_stream = a.honest() || a.strategy.kind == StrategyKind::MitmTakeover;
        a.rng.seed(derive_seed(root_seed, trial, own_stream ? Stream::Classical : Stream::Adversary, id));
        if (a.strategy.kind == StrategyKind::ColludingFabricators) {
            const ParticipantId leader = a.strategy.members.front();
            auto& plan = plans[leader];
            if (!plan)
                plan = std::make_shared<const CoalitionPlan>(
                    plan_coalition(params, a.strategy, derive_seed(root_seed, trial, Stream::Coalition, leader)));
            a.plan = plan;
        }
    }
    const auto order = acting_order(agents);

    Session session(params);
    RoundOutcome outcome;
    outcome.predictions.assign(n, std::nullopt);

    auto bus = make_bus(config);
    if (bus) {
        // Participant 0's view drives the public session; every participant
        // still receives and decodes each envelope.
        for (ParticipantId id = 0; id < n; ++id) {
            bus->subscribe(id, [&, id](const Envelope& e) {
                if (id != 0)
                    return;
                const Json j = Json::parse(e.payload);
                switch (e.type) {
                case MsgType::Hello:
                    if (!j.at("prediction").is_null())
                        outcome.predictions.at(e.sender) = u64_from_json(j.at("prediction"));
                    break;
                case MsgType::RevealC: {
                    auto r = classical_from_json(j);
                    if (r.participant != e.sender)
                        throw ProtocolViolation("reveal sender mismatch");
                    session.submit_classical(std::move(r));
                    break;
                }
                case MsgType::RevealQ: {
                    auto r = quantum_from_json(j);
                    if (r.participant != e.sender)
                        throw ProtocolViolation("reveal sender mismatch");
                    session.submit_quantum(std::move(r));
                    break;
                }
                default: break;
                }
            });
        }
    }

    // Predictions are declared before anything random is revealed.
    for (auto id : order) {
        const auto& prediction = agents[id].strategy.prediction;
        if (bus) {
            Json hello;
            hello["participant"] = id;
            hello["prediction"] = prediction ? u64_json(*prediction) : Json(nullptr);
            bus->broadcast(make_envelope(MsgType::Hello, id, 0, hello));
        } else {
            outcome.predictions[id] = prediction;
        }
    }
    if (bus)
        bus->flush();

    std::vector<std::optional<ClassicalReveal>> seen_classical(n);
    std::vector<std::optional<QuantumReveal>> seen_quantum(n);
    const PoolView view{params, seen_classical, seen_quantum};

    for (auto id : order) {
        auto reveal = act_classical(agents[id], view);
        seen_classical[id] = reveal;
        if (bus)
            bus->broadcast(Envelope{MsgType::RevealC, id, 1, canonical_json(reveal)});
    }
    if (bus)
        bus->flush();
    else
        for (ParticipantId id = 0; id < n; ++id)
            session.submit_classical(*seen_classical[id]);

    SourceConfig source = config.source;
    source.seed = derive_seed(root_seed, trial, Stream::Source);
    auto sim = simulate_round(source);
    outcome.pairs_emitted = sim.pairs.size();

    for (auto id : order) {
        auto reveal = act_quantum(agents[id], view, sim.nodes[id]);
        seen_quantum[id] = reveal;
        if (bus)
            bus->broadcast(Envelope{MsgType::RevealQ, id, 2, canonical_json(reveal)});
    }
    if (bus)
        bus->flush();
    else
        for (ParticipantId id = 0; id < n; ++id)
            session.submit_quantum(std::move(*seen_quantum[id]));

    if (!session.verify()) {
        outcome.status = RoundStatus::VerificationFailed;
        for (const auto& v : session.transcript().verdicts)
            if (!v.passed) {
                outcome.message = "pair (" + std::to_string(v.i) + "," + std::to_string(v.j) + ") rejected";
                break;
            }
    } else {
        try {
            session.consensus2();
            session.compute_output();
        } catch (const EmptySelection& e) {
            outcome.status = RoundStatus::EmptySelection;
            outcome.message = e.what();
        } catch (const InsufficientEntropy& e) {
            outcome.status = RoundStatus::InsufficientEntropy;
            outcome.message = e.what();
        }
    }
    outcome.transcript = session.transcript();
    if (config.hash_transcript)
        outcome.hash = transcript_hash(outcome.transcript);
    return outcome;
}

} // namespace dqrng
