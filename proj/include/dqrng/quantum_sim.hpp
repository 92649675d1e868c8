#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dqrng {

using Rng = std::mt19937_64;
using ParticipantId = std::uint32_t;

namespace pump {
struct Uniform {};
struct Gaussian {
    double mean_bin = 200.0;
    double sigma_bins = 50.0;
};
struct Rayleigh {
    double sigma_bins = 80.0;
};
} // namespace pump

// Temporal intensity profile of the pump within one reference period,
// expressed in bin units. Bin b covers [b, b + 1).
using PumpShape = std::variant<pump::Uniform, pump::Gaussian, pump::Rayleigh>;

std::string pump_name(const PumpShape& shape);
void validate_pump(const PumpShape& shape);

/// Probability of each bin under the shape: the continuous density
/// integrated over the bin and renormalised over the period.
std::vector<double> bin_pdf(const PumpShape& shape, std::uint32_t bins_per_period);

// Inverse-CDF sampler over a discretised pump shape.
class BinSampler {
public:
    BinSampler(const PumpShape& shape, std::uint32_t bins_per_period);

    std::uint32_t operator()(Rng& rng) const;
    std::span<const double> pdf() const { return pdf_; }
    std::uint32_t bins() const { return static_cast<std::uint32_t>(pdf_.size()); }

private:
    std::vector<double> pdf_;
    std::vector<double> cdf_;
};

std::uint32_t sample_bin(const PumpShape& shape, std::uint32_t bins_per_period, Rng& rng);

/// floor(arrival / bin width). Arrival must already be wrapped into the period.
std::uint32_t quantize(double arrival_ps, double bin_width_ps, double period_ps = 100000.0);

enum class Routing {
    Uniform,       // each photon independently picks one of N nodes
    DistinctNodes, // the two photons always land on different nodes
};

struct SourceConfig {
    std::uint32_t n_nodes = 4;
    std::uint64_t n_pulses = 100000;
    double pair_rate = 0.05;
    PumpShape pump_shape = pump::Uniform{};
    double period_ps = 100000.0;
    double bin_width_ps = 250.0;
    std::vector<double> loss_per_node; // empty means 0.3 everywhere
    double jitter_sigma_ps = 40.0;
    std::vector<double> dark_rate_per_node; // empty means 0.002 everywhere
    Routing routing = Routing::Uniform;
    std::uint64_t seed = 0;

    std::uint32_t bins_per_period() const;
    double loss(ParticipantId node) const;
    double dark_rate(ParticipantId node) const;
    void validate() const;
};

inline constexpr double kDefaultLoss = 0.3;
inline constexpr double kDefaultDarkRate = 0.002;

struct DetectionRecord {
    ParticipantId node = 0;
    std::uint64_t index = 0;
    std::uint32_t bin = 0;

    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

using NodeRecords = std::vector<DetectionRecord>;

// One emitted pair, kept for ground-truth checks.
struct PairEvent {
    std::uint64_t index = 0;
    std::uint32_t bin = 0;
    ParticipantId node_a = 0;
    ParticipantId node_b = 0;
};

struct SimulatedRound {
    std::vector<NodeRecords> nodes;
    std::vector<PairEvent> pairs;
};

SimulatedRound simulate_round(const SourceConfig& config);

/// Per-node detection lists, index-sorted with at most one record per index.
std::vector<NodeRecords> generate_round(const SourceConfig& config);

// CSV with header `node,index,bin`.
void write_records_csv(std::ostream& out, std::span<const NodeRecords> nodes);
std::vector<NodeRecords> read_records_csv(std::istream& in, std::uint32_t n_nodes);

} // namespace dqrng
