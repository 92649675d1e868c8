#pragma once

#include "dqrng/quantum_sim.hpp"
#include "dqrng/set_algebra.hpp"
#include "dqrng/verify_stats.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dqrng {

enum class Aggregation { SumMod, XorFold };

// Aggregates are reduced to this many values before a weighted pick.
inline constexpr std::uint64_t kWeightResolution = 256;

// Everything the pool agrees on publicly before a round starts.
struct SessionParams {
    std::uint32_t n = 4;
    std::uint64_t l = 1;
    std::uint64_t b_lo = 0;
    std::uint64_t b_hi = 255;
    std::uint64_t m = 10000;
    std::optional<std::vector<double>> weights;
    Aggregation agg_fn = Aggregation::SumMod;
    double car_threshold = 50.0;
    double gof_alpha = 1e-6;

    // Index domain for classical values and quantum reveals.
    std::uint64_t n_pulses = 100000;
    std::uint32_t bins_per_period = 400;
    PumpShape pump_shape = pump::Uniform{};
    int max_offset = 10;
    int window_bins = 2;
    std::uint64_t min_coincidences = 5;

    std::uint64_t p_num() const { return std::uint64_t{n} * (n - 1) / 2; }
    std::uint64_t range() const { return b_hi - b_lo + 1; }
    void validate() const;
    VerificationSettings verification() const;
    /// Selection pdf C: the weights, or uniform over [b_lo, b_hi].
    std::vector<double> selection_pdf() const;
};

struct ClassicalReveal {
    ParticipantId participant = 0;
    std::vector<std::uint64_t> values;
    std::optional<double> weight;

    friend bool operator==(const ClassicalReveal&, const ClassicalReveal&) = default;
};

struct QuantumReveal {
    ParticipantId participant = 0;
    NodeRecords records;

    friend bool operator==(const QuantumReveal&, const QuantumReveal&) = default;
};

enum class Phase { RevealClassical, QuantumMeasure, QuantumReveal, Verify, Output, Aborted };

const char* phase_name(Phase phase);

struct PhaseTransition {
    Phase from;
    Phase to;
    std::string reason;

    friend bool operator==(const PhaseTransition&, const PhaseTransition&) = default;
};

// Public record of one round. Every derived field can be recomputed from
// params and the reveals alone.
struct RoundTranscript {
    SessionParams params;
    std::vector<ClassicalReveal> classical; // ordered by participant
    std::vector<std::uint64_t> combined_classical;
    std::vector<QuantumReveal> quantum; // ordered by participant
    std::vector<PairVerdict> verdicts;  // (0,1), (0,2), ..., (n-2,n-1)
    IndexedBins merged;
    std::uint64_t merge_conflicts = 0;
    std::vector<std::uint64_t> i_final;
    std::vector<std::uint32_t> r_qc;
    std::vector<std::uint64_t> output;
    std::vector<PhaseTransition> phase_log;
};

/// R = F(R^qc): contiguous near-equal chunks, one aggregate per chunk, and
/// a weighted pick through the inverse CDF of C when weights are set.
std::vector<std::uint64_t> aggregate_output(std::span<const std::uint32_t> r_qc, const SessionParams& params);

/// Raw per-chunk aggregate over a domain of `domain` values.
std::uint64_t aggregate_chunk(std::span<const std::uint32_t> chunk, Aggregation fn, std::uint64_t domain);

/// Smallest i with cdf_i * resolution > aggregate.
std::uint32_t inverse_cdf_pick(std::span<const double> pdf, std::uint64_t aggregate, std::uint64_t resolution);

// Single-writer state machine for one round.
class Session {
public:
    explicit Session(SessionParams params);

    Phase phase() const { return phase_; }
    const SessionParams& params() const { return transcript_.params; }
    const RoundTranscript& transcript() const { return transcript_; }
    bool verified() const { return verified_; }

    void submit_classical(ClassicalReveal reveal);
    void submit_quantum(QuantumReveal reveal);

    /// Runs every pair verdict. Returns true when all pass; otherwise the
    /// round is aborted.
    bool verify();

    /// Union of matches, I_final and R^qc. Throws EmptySelection (and
    /// aborts) when nothing is selected.
    const RoundTranscript& consensus2();

    const std::vector<std::uint64_t>& compute_output();

    std::size_t classical_received() const;
    std::size_t quantum_received() const;

private:
    void advance(Phase to, std::string reason);

    RoundTranscript transcript_;
    Phase phase_ = Phase::RevealClassical;
    std::vector<std::optional<ClassicalReveal>> classical_;
    std::vector<std::optional<QuantumReveal>> quantum_;
    std::vector<PairMatch> matches_;
    bool verified_ = false;
};

/// Replays the reveals through a fresh session. Stops at the first phase
/// that aborts.
RoundTranscript replay(const SessionParams& params, std::span<const ClassicalReveal> classical,
                       std::span<const QuantumReveal> quantum);

/// True when replaying the transcript's reveals reproduces every derived field.
bool audit(const RoundTranscript& transcript);

} // namespace dqrng
