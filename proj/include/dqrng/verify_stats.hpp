#pragma once

#include "dqrng/quantum_sim.hpp"
#include "dqrng/set_algebra.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dqrng {

inline constexpr double kCarInfinity = std::numeric_limits<double>::infinity();

// Equal-bin coincidences between two nodes for index offsets
// -max_offset..+max_offset. counts[max_offset] is the zero-offset peak.
struct CoincidenceHistogram {
    int max_offset = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t at(int offset) const { return counts.at(static_cast<std::size_t>(offset + max_offset)); }
    std::uint64_t peak() const { return at(0); }
    double mean_off_peak() const;
};

CoincidenceHistogram coincidence_histogram(std::span<const DetectionRecord> a,
                                           std::span<const DetectionRecord> b, int max_offset);

/// Zero-offset count over the mean off-peak count. No peak gives 0; a peak
/// with an empty background gives kCarInfinity.
double compute_car(const CoincidenceHistogram& histogram);

struct GofReport {
    double statistic = 0.0;
    std::uint32_t dof = 0;
    double p_value = 1.0;
    bool passed = true;
};

/// Pearson chi-square goodness of fit. Adjacent categories are merged until
/// each expects at least five counts.
GofReport chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_pdf,
                         double alpha);

/// Upper regularised incomplete gamma Q(a, x), as used by every p-value here.
double igamc(double a, double x);

struct VerificationSettings {
    double car_threshold = 50.0;
    double gof_alpha = 1e-6;
    int max_offset = 10;
    int window_bins = 2;
    // CAR from a handful of counts carries no evidence; the gate needs this many.
    std::uint64_t min_coincidences = 5;
    std::uint32_t bins_per_period = 400;
    PumpShape pump_shape = pump::Uniform{};
};

struct PairVerdict {
    ParticipantId i = 0;
    ParticipantId j = 0;
    std::uint64_t coincidences = 0;
    std::uint64_t window_coincidences = 0;
    double accidentals = 0.0;
    double car = 0.0;
    std::uint64_t discord = 0;
    bool car_passed = false;
    std::optional<GofReport> gof; // empty when the matched set is too small to test
    bool passed = false;
    CoincidenceHistogram histogram;
};

/// Number of records at the same index whose bins differ by at most `window`.
std::uint64_t window_coincidences(std::span<const DetectionRecord> a, std::span<const DetectionRecord> b,
                                  int window);

PairVerdict verify_pair(ParticipantId i, std::span<const DetectionRecord> reveal_i, ParticipantId j,
                        std::span<const DetectionRecord> reveal_j, const VerificationSettings& settings);

// Same, reusing an intersection the caller already computed.
PairVerdict verify_pair(ParticipantId i, std::span<const DetectionRecord> reveal_i, ParticipantId j,
                        std::span<const DetectionRecord> reveal_j, const PairMatch& match,
                        const VerificationSettings& settings);

} // namespace dqrng
