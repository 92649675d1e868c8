#include "dqrng/protocol.hpp"

#include "dqrng/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dqrng {

const char* phase_name(Phase phase) {
    switch (phase) {
    case Phase::RevealClassical: return "REVEAL_CLASSICAL";
    case Phase::QuantumMeasure: return "QUANTUM_MEASURE";
    case Phase::QuantumReveal: return "QUANTUM_REVEAL";
    case Phase::Verify: return "VERIFY";
    case Phase::Output: return "OUTPUT";
    case Phase::Aborted: return "ABORTED";
    }
    return "UNKNOWN";
}

void SessionParams::validate() const {
    if (n < 2)
        throw ConfigError("a pool needs at least two participants");
    if (l < 1 || m < l)
        throw ConfigError("need m >= l >= 1");
    if (b_hi < b_lo)
        throw ConfigError("need b_hi >= b_lo");
    if (b_hi - b_lo == std::numeric_limits<std::uint64_t>::max())
        throw ConfigError("output range too large");
    if (weights) {
        if (weights->size() != n)
            throw ConfigError("one weight per participant is required");
        double sum = 0.0;
        for (double w : *weights) {
            if (!(w >= 0.0))
                throw ConfigError("weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("weights must sum to 1");
        if (range() != n)
            throw ConfigError("weighted selection needs an output range of exactly n values");
    }
    if (!(car_threshold > 0.0))
        throw ConfigError("car_threshold must be positive");
    if (!(gof_alpha > 0.0 && gof_alpha < 1.0))
        throw ConfigError("gof_alpha must lie in (0, 1)");
    if (n_pulses < 1)
        throw ConfigError("n_pulses must be positive");
    if (bins_per_period < 2)
        throw ConfigError("bins_per_period must be at least 2");
    validate_pump(pump_shape);
    if (max_offset < 1)
        throw ConfigError("max_offset must be at least 1");
    if (window_bins < 0)
        throw ConfigError("window_bins must be non-negative");
}

VerificationSettings SessionParams::verification() const {
    VerificationSettings s;
    s.car_threshold = car_threshold;
    s.gof_alpha = gof_alpha;
    s.max_offset = max_offset;
    s.window_bins = window_bins;
    s.min_coincidences = min_coincidences;
    s.bins_per_period = bins_per_period;
    s.pump_shape = pump_shape;
    return s;
}

std::vector<double> SessionParams::selection_pdf() const {
    if (weights)
        return *weights;
    return std::vector<double>(static_cast<std::size_t>(range()), 1.0 / static_cast<double>(range()));
}

std::uint64_t aggregate_chunk(std::span<const std::uint32_t> chunk, Aggregation fn, std::uint64_t domain) {
    if (domain <= 1)
        return 0;
    if (fn == Aggregation::SumMod) {
        std::uint64_t acc = 0;
        for (auto v : chunk)
            acc = (acc + v % domain) % domain;
        return acc;
    }
    std::uint64_t x = 0;
    for (auto v : chunk)
        x ^= v;
    unsigned width = 0;
    while (width < 64 && (std::uint64_t{1} << width) < domain)
        ++width;
    if (width < 64) {
        const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
        while (x >> width)
            x = (x & mask) ^ (x >> width);
    }
    // Modulo reduction; bias at most domain / 2^width.
    return x % domain;
}

std::uint32_t inverse_cdf_pick(std::span<const double> pdf, std::uint64_t aggregate, std::uint64_t resolution) {
    double cum = 0.0;
    std::uint32_t last_positive = 0;
    for (std::size_t i = 0; i < pdf.size(); ++i) {
        cum += pdf[i];
        if (pdf[i] > 0.0)
            last_positive = static_cast<std::uint32_t>(i);
        if (cum * static_cast<double>(resolution) > static_cast<double>(aggregate) && pdf[i] > 0.0)
            return static_cast<std::uint32_t>(i);
    }
    return last_positive;
}

std::vector<std::uint64_t> aggregate_output(std::span<const std::uint32_t> r_qc, const SessionParams& params) {
    const std::uint64_t n = r_qc.size();
    if (n < params.l)
        throw InsufficientEntropy("R^qc holds " + std::to_string(n) + " values, need " + std::to_string(params.l));
    std::vector<std::uint64_t> out;
    out.reserve(params.l);
    const auto pdf = params.weights ? *params.weights : std::vector<double>{};
    for (std::uint64_t c = 0; c < params.l; ++c) {
        const std::uint64_t begin = c * n / params.l;
        const std::uint64_t end = (c + 1) * n / params.l;
        const auto chunk = r_qc.subspan(begin, end - begin);
        if (params.weights) {
            const auto agg = aggregate_chunk(chunk, params.agg_fn, kWeightResolution);
            out.push_back(params.b_lo + inverse_cdf_pick(pdf, agg, kWeightResolution));
        } else {
            out.push_back(params.b_lo + aggregate_chunk(chunk, params.agg_fn, params.range()));
        }
    }
    return out;
}

Session::Session(SessionParams params) {
    params.validate();
    transcript_.params = std::move(params);
    classical_.resize(transcript_.params.n);
    quantum_.resize(transcript_.params.n);
}

void Session::advance(Phase to, std::string reason) {
    transcript_.phase_log.push_back({phase_, to, std::move(reason)});
    phase_ = to;
}

std::size_t Session::classical_received() const {
    return static_cast<std::size_t>(std::count_if(classical_.begin(), classical_.end(), [](auto& r) { return r.has_value(); }));
}

std::size_t Session::quantum_received() const {
    return static_cast<std::size_t>(std::count_if(quantum_.begin(), quantum_.end(), [](auto& r) { return r.has_value(); }));
}

void Session::submit_classical(ClassicalReveal reveal) {
    const auto& p = transcript_.params;
    if (phase_ != Phase::RevealClassical)
        throw PhaseViolation(std::string("classical reveal during ") + phase_name(phase_));
    if (reveal.participant >= p.n)
        throw MalformedReveal("unknown participant " + std::to_string(reveal.participant));
    if (classical_[reveal.participant])
        throw ProtocolViolation("participant " + std::to_string(reveal.participant) + " already revealed");
    if (reveal.values.size() != p.m)
        throw MalformedReveal("classical list must hold exactly m values");
    for (auto v : reveal.values)
        if (v >= p.n_pulses)
            throw MalformedReveal("classical value outside the index domain");
    if (reveal.weight) {
        if (!p.weights || std::abs(*reveal.weight - (*p.weights)[reveal.participant]) > 1e-12)
            throw MalformedReveal("declared weight differs from the agreed weight");
    }
    classical_[reveal.participant] = std::move(reveal);

    if (classical_received() == p.n) {
        std::vector<std::vector<std::uint64_t>> lists;
        lists.reserve(p.n);
        transcript_.classical.clear();
        for (auto& r : classical_) {
            lists.push_back(r->values);
            transcript_.classical.push_back(*r);
        }
        transcript_.combined_classical = combine_classical(lists);
        advance(Phase::QuantumMeasure, "all classical reveals received");
    }
}

void Session::submit_quantum(QuantumReveal reveal) {
    const auto& p = transcript_.params;
    if (phase_ != Phase::QuantumMeasure && phase_ != Phase::QuantumReveal)
        throw PhaseViolation(std::string("quantum reveal during ") + phase_name(phase_));
    if (reveal.participant >= p.n)
        throw MalformedReveal("unknown participant " + std::to_string(reveal.participant));
    if (quantum_[reveal.participant])
        throw ProtocolViolation("participant " + std::to_string(reveal.participant) + " already revealed");
    for (std::size_t k = 0; k < reveal.records.size(); ++k) {
        auto& r = reveal.records[k];
        if (r.index >= p.n_pulses)
            throw MalformedReveal("record index outside the pulse range");
        if (r.bin >= p.bins_per_period)
            throw MalformedReveal("record bin outside the period");
        if (k > 0 && reveal.records[k - 1].index >= r.index)
            throw MalformedReveal("record indices must be strictly ascending");
        r.node = reveal.participant;
    }
    if (phase_ == Phase::QuantumMeasure)
        advance(Phase::QuantumReveal, "first quantum reveal");
    quantum_[reveal.participant] = std::move(reveal);

    if (quantum_received() == p.n) {
        transcript_.quantum.clear();
        for (auto& r : quantum_)
            transcript_.quantum.push_back(*r);
        advance(Phase::Verify, "all quantum reveals received");
    }
}

bool Session::verify() {
    if (phase_ != Phase::Verify || verified_ || !transcript_.verdicts.empty())
        throw PhaseViolation(std::string("verification during ") + phase_name(phase_));
    const auto& p = transcript_.params;
    const auto settings = p.verification();
    matches_.clear();
    for (ParticipantId i = 0; i < p.n; ++i) {
        for (ParticipantId j = i + 1; j < p.n; ++j) {
            const auto& a = transcript_.quantum[i].records;
            const auto& b = transcript_.quantum[j].records;
            matches_.push_back(pairwise_intersect(a, b));
            transcript_.verdicts.push_back(verify_pair(i, a, j, b, matches_.back(), settings));
        }
    }
    verified_ = std::all_of(transcript_.verdicts.begin(), transcript_.verdicts.end(),
                            [](const PairVerdict& v) { return v.passed; });
    if (!verified_)
        advance(Phase::Aborted, "pair verification failed");
    return verified_;
}

const RoundTranscript& Session::consensus2() {
    if (phase_ != Phase::Verify || !verified_)
        throw PhaseViolation(std::string("consensus 2 before verification passed (phase ") + phase_name(phase_) + ")");
    auto merged = merge_matches(matches_);
    transcript_.merged = std::move(merged.merged);
    transcript_.merge_conflicts = merged.conflicts;
    auto selected = select_final(transcript_.merged, transcript_.combined_classical);
    if (selected.empty()) {
        advance(Phase::Aborted, "empty selection");
        throw EmptySelection("I_final is empty");
    }
    transcript_.i_final = std::move(selected.indices);
    transcript_.r_qc = std::move(selected.bins);
    advance(Phase::Output, "selection complete");
    return transcript_;
}

const std::vector<std::uint64_t>& Session::compute_output() {
    if (phase_ != Phase::Output)
        throw PhaseViolation(std::string("output requested during ") + phase_name(phase_));
    if (transcript_.output.empty()) {
        try {
            transcript_.output = aggregate_output(transcript_.r_qc, transcript_.params);
        } catch (const InsufficientEntropy&) {
            advance(Phase::Aborted, "insufficient entropy");
            throw;
        }
    }
    return transcript_.output;
}

RoundTranscript replay(const SessionParams& params, std::span<const ClassicalReveal> classical,
                       std::span<const QuantumReveal> quantum) {
    Session s(params);
    for (const auto& r : classical)
        s.submit_classical(r);
    for (const auto& r : quantum)
        s.submit_quantum(r);
    if (s.phase() == Phase::Verify && s.verify()) {
        try {
            s.consensus2();
            s.compute_output();
        } catch (const EmptySelection&) {
        } catch (const InsufficientEntropy&) {
        }
    }
    return s.transcript();
}

namespace {

bool same_verdict(const PairVerdict& a, const PairVerdict& b) {
    const bool same_car = (a.car == b.car) || (std::isinf(a.car) && std::isinf(b.car));
    return a.i == b.i && a.j == b.j && a.coincidences == b.coincidences &&
           a.window_coincidences == b.window_coincidences && a.accidentals == b.accidentals && same_car &&
           a.discord == b.discord && a.car_passed == b.car_passed && a.passed == b.passed &&
           a.histogram.counts == b.histogram.counts;
}

} // namespace

bool audit(const RoundTranscript& t) {
    RoundTranscript r;
    try {
        r = replay(t.params, t.classical, t.quantum);
    } catch (const Error&) {
        return false;
    }
    if (r.verdicts.size() != t.verdicts.size())
        return false;
    for (std::size_t k = 0; k < r.verdicts.size(); ++k)
        if (!same_verdict(r.verdicts[k], t.verdicts[k]))
            return false;
    return r.combined_classical == t.combined_classical && r.merged == t.merged &&
           r.merge_conflicts == t.merge_conflicts && r.i_final == t.i_final && r.r_qc == t.r_qc &&
           r.output == t.output && r.phase_log == t.phase_log;
}

} // namespace dqrng
