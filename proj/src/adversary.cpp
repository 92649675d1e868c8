#include "dqrng/adversary.hpp"

#include "dqrng/errors.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace dqrng {

Strategy Strategy::colluding(std::vector<ParticipantId> members, std::optional<std::uint64_t> prediction) {
    Strategy s;
    s.kind = StrategyKind::ColludingFabricators;
    std::sort(members.begin(), members.end());
    s.members = std::move(members);
    s.prediction = prediction;
    return s;
}

Strategy Strategy::last_revealer(std::uint64_t target) {
    Strategy s;
    s.kind = StrategyKind::LastRevealerBias;
    s.target = target;
    s.prediction = target;
    return s;
}

Strategy Strategy::mitm(ParticipantId victim, bool alter) {
    Strategy s;
    s.kind = StrategyKind::MitmTakeover;
    s.victim = victim;
    s.alter = alter;
    return s;
}

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
    case StrategyKind::Honest: return "honest";
    case StrategyKind::NaiveFabricator: return "naive";
    case StrategyKind::ColludingFabricators: return "collude";
    case StrategyKind::LastRevealerBias: return "last-revealer";
    case StrategyKind::DigitalEmulator: return "emulator";
    case StrategyKind::MitmTakeover: return "mitm";
    }
    return "unknown";
}

StrategyKind strategy_from_name(const std::string& name) {
    for (auto k : {StrategyKind::Honest, StrategyKind::NaiveFabricator, StrategyKind::ColludingFabricators,
                   StrategyKind::LastRevealerBias, StrategyKind::DigitalEmulator, StrategyKind::MitmTakeover})
        if (name == strategy_name(k))
            return k;
    throw ConfigError("unknown strategy " + name);
}

void validate_pool(std::span<const Strategy> strategies, std::uint32_t n, bool allow_full_collusion) {
    if (strategies.size() != n)
        throw ConfigError("one strategy per participant is required");
    for (ParticipantId id = 0; id < n; ++id) {
        const auto& s = strategies[id];
        if (s.kind == StrategyKind::ColludingFabricators) {
            if (!std::binary_search(s.members.begin(), s.members.end(), id))
                throw ConfigError("colluder " + std::to_string(id) + " is not in its own coalition");
            for (auto m : s.members) {
                if (m >= n)
                    throw ConfigError("coalition member out of range");
                const auto& other = strategies[m];
                if (other.kind != StrategyKind::ColludingFabricators || other.members != s.members)
                    throw ConfigError("coalition members disagree on membership");
                if (other.prediction != s.prediction)
                    throw ConfigError("coalition members disagree on the prediction");
            }
            if (s.members.size() >= n && !allow_full_collusion)
                throw ConfigError("a coalition must leave at least one participant outside");
        }
        if (s.kind == StrategyKind::MitmTakeover && s.victim != id)
            throw ConfigError("mitm strategy must sit in its victim's slot");
    }
}

namespace {

std::vector<std::uint64_t> random_values(Rng& rng, std::uint64_t count, std::uint64_t domain) {
    std::uniform_int_distribution<std::uint64_t> pick(0, domain - 1);
    std::vector<std::uint64_t> out(count);
    for (auto& v : out)
        v = pick(rng);
    return out;
}

// Distinct sorted indices; at most `count`, fewer when the domain is small.
std::vector<std::uint64_t> random_distinct(Rng& rng, std::uint64_t count, std::uint64_t domain,
                                           const std::unordered_set<std::uint64_t>& excluded = {}) {
    std::unordered_set<std::uint64_t> chosen;
    std::uniform_int_distribution<std::uint64_t> pick(0, domain - 1);
    const std::uint64_t room = domain - std::min<std::uint64_t>(domain, excluded.size());
    count = std::min(count, room);
    while (chosen.size() < count) {
        const auto v = pick(rng);
        if (!excluded.count(v))
            chosen.insert(v);
    }
    std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

NodeRecords records_at(ParticipantId node, const std::vector<std::uint64_t>& indices, const BinSampler& sampler,
                       Rng& rng) {
    NodeRecords out;
    out.reserve(indices.size());
    for (auto idx : indices)
        out.push_back({node, idx, sampler(rng)});
    return out;
}

NodeRecords merge_sorted(NodeRecords a, const NodeRecords& b) {
    NodeRecords out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
               [](const DetectionRecord& x, const DetectionRecord& y) { return x.index < y.index; });
    return out;
}

NodeRecords with_owner(NodeRecords records, ParticipantId owner) {
    for (auto& r : records)
        r.node = owner;
    return records;
}

} // namespace

CoalitionPlan plan_coalition(const SessionParams& params, const Strategy& strategy, std::uint64_t seed) {
    Rng rng(seed);
    CoalitionPlan plan;
    plan.classical_values = random_values(rng, params.m, params.n_pulses);

    std::vector<std::uint64_t> indices = plan.classical_values;
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    const BinSampler sampler(params.pump_shape, params.bins_per_period);
    plan.fabricated = records_at(0, indices, sampler, rng);

    if (strategy.prediction && !plan.fabricated.empty() && plan.fabricated.size() >= params.l) {
        // Steer the first chunk: with no outside data selected, output[0]
        // would equal the prediction.
        const std::size_t chunk = plan.fabricated.size() / params.l;
        std::vector<std::uint32_t> bins;
        for (std::size_t k = 0; k < chunk; ++k)
            bins.push_back(plan.fabricated[k].bin);
        SessionParams single = params;
        single.l = 1;
        single.m = std::max<std::uint64_t>(single.m, 1);
        for (std::uint32_t b = 0; b < params.bins_per_period; ++b) {
            bins[0] = b;
            if (aggregate_output(bins, single).front() == *strategy.prediction) {
                plan.fabricated[0].bin = b;
                break;
            }
        }
    }
    return plan;
}

ClassicalReveal act_classical(Agent& agent, const PoolView& view) {
    const auto& p = view.params;
    ClassicalReveal r;
    r.participant = agent.id;
    if (p.weights)
        r.weight = (*p.weights)[agent.id];

    switch (agent.strategy.kind) {
    case StrategyKind::ColludingFabricators:
        if (!agent.plan)
            throw ConfigError("colluder without a coalition plan");
        r.values = agent.plan->classical_values;
        break;
    case StrategyKind::LastRevealerBias: {
        std::vector<std::uint64_t> seen;
        for (const auto& other : view.classical)
            if (other && other->participant != agent.id)
                seen.insert(seen.end(), other->values.begin(), other->values.end());
        if (seen.empty()) {
            r.values = random_values(agent.rng, p.m, p.n_pulses);
        } else {
            // Re-use only values others already chose, adding nothing fresh.
            std::uniform_int_distribution<std::size_t> pick(0, seen.size() - 1);
            r.values.resize(p.m);
            for (auto& v : r.values)
                v = seen[pick(agent.rng)];
        }
        break;
    }
    default:
        r.values = random_values(agent.rng, p.m, p.n_pulses);
        break;
    }
    return r;
}

QuantumReveal act_quantum(Agent& agent, const PoolView& view, const NodeRecords& true_records) {
    const auto& p = view.params;
    QuantumReveal r;
    r.participant = agent.id;
    const BinSampler sampler(p.pump_shape, p.bins_per_period);

    switch (agent.strategy.kind) {
    case StrategyKind::Honest:
    case StrategyKind::LastRevealerBias:
        r.records = true_records;
        break;

    case StrategyKind::NaiveFabricator:
        r.records = records_at(agent.id, random_distinct(agent.rng, true_records.size(), p.n_pulses), sampler,
                               agent.rng);
        break;

    case StrategyKind::ColludingFabricators: {
        if (!agent.plan)
            throw ConfigError("colluder without a coalition plan");
        const auto& members = agent.strategy.members;
        const bool outsiders_exist = members.size() < p.n;
        std::unordered_map<std::uint64_t, std::uint32_t> outside;
        bool outsider_seen = false;
        for (const auto& q : view.quantum) {
            if (!q || std::binary_search(members.begin(), members.end(), q->participant))
                continue;
            outsider_seen = true;
            for (const auto& rec : q->records)
                outside.emplace(rec.index, rec.bin);
        }
        NodeRecords retained;
        if (outsiders_exist) {
            for (const auto& rec : true_records) {
                if (!outsider_seen) {
                    retained.push_back(rec);
                    continue;
                }
                const auto it = outside.find(rec.index);
                if (it != outside.end() && it->second == rec.bin)
                    retained.push_back(rec);
            }
        }
        std::unordered_set<std::uint64_t> taken;
        for (const auto& rec : retained)
            taken.insert(rec.index);
        NodeRecords fabricated;
        for (const auto& rec : agent.plan->fabricated)
            if (!taken.count(rec.index))
                fabricated.push_back(rec);
        r.records = merge_sorted(std::move(retained), fabricated);
        break;
    }

    case StrategyKind::DigitalEmulator: {
        std::unordered_map<std::uint64_t, std::uint32_t> copied;
        for (const auto& q : view.quantum)
            if (q && q->participant != agent.id)
                for (const auto& rec : q->records)
                    copied.emplace(rec.index, rec.bin);
        std::unordered_set<std::uint64_t> taken;
        for (const auto& [idx, bin] : copied)
            taken.insert(idx);
        const auto invented = random_distinct(agent.rng, std::max<std::size_t>(1, copied.size() / 100), p.n_pulses, taken);
        for (auto idx : invented)
            copied.emplace(idx, sampler(agent.rng));
        for (const auto& [idx, bin] : copied)
            r.records.push_back({agent.id, idx, bin});
        std::sort(r.records.begin(), r.records.end(),
                  [](const DetectionRecord& x, const DetectionRecord& y) { return x.index < y.index; });
        break;
    }

    case StrategyKind::MitmTakeover:
        r.records = true_records;
        if (agent.strategy.alter)
            for (std::size_t k = 1; k < r.records.size(); k += 2)
                r.records[k].bin = sampler(agent.rng);
        break;
    }
    r.records = with_owner(std::move(r.records), agent.id);
    return r;
}

} // namespace dqrng
