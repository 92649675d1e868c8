#pragma once

#include "dqrng/nist.hpp"
#include "dqrng/runner.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dqrng {

enum class CaseKind { Case1_8bit, Case2_Leader, Custom };

const char* case_name(CaseKind kind);
CaseKind case_from_name(const std::string& name);

struct ExperimentConfig {
    CaseKind case_kind = CaseKind::Custom;
    std::uint64_t trials = 1;
    std::uint64_t seed = 1;
    RoundConfig round;
    std::filesystem::path output_dir; // empty: no artifacts
    std::uint64_t max_reruns = 20;    // per trial, for empty or short selections
    std::size_t keep_transcripts = 10;

    void validate() const;
};

/// The two desk-scale parameter sets. Both keep the default source physics.
ExperimentConfig case1_config();
ExperimentConfig case2_config();
ExperimentConfig preset(CaseKind kind);

/// Case 1 pool with a 256-bin period: every selected bin is already a byte,
/// so about two bins feed each output value.
ExperimentConfig byte_stream_config();

/// Output bytes of accepted rounds, in round order, until `bytes` are
/// collected. Throws InsufficientEntropy after `max_rounds` rounds.
std::vector<std::uint8_t> collect_output_bytes(const ExperimentConfig& config, std::uint64_t root_seed,
                                               std::size_t bytes, std::uint64_t max_rounds = 100000);

/// "honest", "naive", "emulator", "mitm", "mitm:alter", "last-revealer:<target>",
/// "collude:<m1>,<m2>,...[:<prediction>]".
Strategy parse_strategy(const std::string& text, ParticipantId node);

/// Applies `key = value` lines (TOML-style: '#' comments, [section] headers
/// and quotes are accepted) on top of `base`.
ExperimentConfig load_config(std::istream& in, ExperimentConfig base = {});
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

struct RoundRecord {
    std::uint64_t trial = 0;
    std::uint64_t attempt = 0;
    RoundStatus status = RoundStatus::Accepted;
    std::size_t i_final = 0;
    double min_car = 0.0;
    std::string hash;
};

struct ExperimentReport {
    CaseKind case_kind = CaseKind::Custom;
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
    std::uint64_t verification_failures = 0;
    std::uint64_t reruns = 0;
    std::uint64_t unresolved = 0; // trials that never produced output
    std::vector<RoundRecord> rounds;

    std::vector<std::uint64_t> outputs;     // pooled, value - b_lo
    std::vector<std::uint64_t> frequencies; // per value of the output range
    std::vector<double> expected;           // selection pdf
    GofReport uniformity;
    double max_relative_deviation = 0.0;

    std::vector<double> min_car; // per pair, over accepted rounds
    std::vector<double> mean_car;
    std::vector<PairVerdict> sample_verdicts; // first accepted round

    std::uint64_t predicted_rounds = 0;
    std::uint64_t prediction_hits = 0;
    double prediction_baseline = 0.0;

    nist::Report nist;
    std::vector<RoundTranscript> transcripts; // first keep_transcripts rounds
    double seconds = 0.0;

    /// 0 success, 1 verification failure, 3 insufficient data.
    int exit_code() const;
};

using ProgressFn = std::function<void(std::uint64_t done, std::uint64_t total)>;

/// Runs every trial; rounds ending with an empty or too short selection are
/// rerun from a fresh derived seed, up to max_reruns times.
ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// frequencies.csv, rounds.csv, nist.csv, histogram_<i>-<j>.csv,
/// winrates.csv (weighted pools) and transcripts/.
void write_artifacts(const ExperimentConfig& config, const ExperimentReport& report);

/// Like run_experiment, and writes artifacts when output_dir is set.
ExperimentReport run_and_export(const ExperimentConfig& config, const ProgressFn& progress = {});

void print_summary(std::ostream& out, const ExperimentConfig& config, const ExperimentReport& report);

struct AdvantageReport {
    std::uint64_t rounds = 0;
    std::uint64_t accepted = 0;
    std::uint64_t hits = 0;
    double baseline = 0.0; // C(prediction)
    double advantage = 0.0;
    double sigma = 0.0;
    bool within_3sigma = true;
    GofReport uniformity;
};

/// Fraction of accepted rounds whose first output equals the declared
/// prediction, minus the chance rate under C. Needs n_rounds >= 1000 and a
/// declared prediction; a single-value range has advantage 0.
AdvantageReport measure_prediction_advantage(const RoundConfig& config, std::uint64_t n_rounds,
                                             std::uint64_t root_seed);

} // namespace dqrng
