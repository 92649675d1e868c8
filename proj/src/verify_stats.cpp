#include "dqrng/verify_stats.hpp"

#include "dqrng/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdlib>
#include <numeric>

namespace dqrng {

double CoincidenceHistogram::mean_off_peak() const {
    if (counts.size() < 3)
        throw InvalidInput("histogram needs at least three offsets");
    double sum = 0.0;
    for (int d = -max_offset; d <= max_offset; ++d)
        if (d != 0)
            sum += static_cast<double>(at(d));
    return sum / static_cast<double>(counts.size() - 1);
}

CoincidenceHistogram coincidence_histogram(std::span<const DetectionRecord> a,
                                           std::span<const DetectionRecord> b, int max_offset) {
    if (max_offset < 0)
        throw InvalidInput("max_offset must be non-negative");
    CoincidenceHistogram h;
    h.max_offset = max_offset;
    h.counts.assign(static_cast<std::size_t>(2 * max_offset + 1), 0);

    // Indices are strictly ascending on both sides, so a sliding window over
    // b covers every offset in one pass.
    const auto span = static_cast<std::uint64_t>(max_offset);
    std::size_t lo = 0;
    for (const auto& rec : a) {
        const std::uint64_t start = rec.index >= span ? rec.index - span : 0;
        while (lo < b.size() && b[lo].index < start)
            ++lo;
        for (std::size_t k = lo; k < b.size() && b[k].index <= rec.index + span; ++k)
            if (b[k].bin == rec.bin)
                ++h.counts[static_cast<std::size_t>(b[k].index + span - rec.index)];
    }
    return h;
}

double compute_car(const CoincidenceHistogram& histogram) {
    const double mean = histogram.mean_off_peak();
    const auto peak = histogram.peak();
    if (peak == 0)
        return 0.0;
    if (mean == 0.0)
        return kCarInfinity;
    return static_cast<double>(peak) / mean;
}

double igamc(double a, double x) {
    if (x <= 0.0)
        return 1.0;
    return boost::math::gamma_q(a, x);
}

GofReport chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_pdf,
                         double alpha) {
    if (observed.size() != expected_pdf.size())
        throw InvalidInput("observed and expected sizes differ");
    const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
    if (total == 0.0)
        throw InvalidInput("all observations are zero");
    const double mass = std::accumulate(expected_pdf.begin(), expected_pdf.end(), 0.0);
    if (!(mass > 0.0))
        throw InvalidInput("expected pdf has no mass");

    std::vector<double> obs_groups, exp_groups;
    double acc_obs = 0.0, acc_exp = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        acc_obs += static_cast<double>(observed[k]);
        acc_exp += total * expected_pdf[k] / mass;
        if (acc_exp >= 5.0) {
            obs_groups.push_back(acc_obs);
            exp_groups.push_back(acc_exp);
            acc_obs = acc_exp = 0.0;
        }
    }
    if (acc_obs > 0.0 || acc_exp > 0.0) {
        if (exp_groups.empty()) {
            obs_groups.push_back(acc_obs);
            exp_groups.push_back(acc_exp);
        } else {
            obs_groups.back() += acc_obs;
            exp_groups.back() += acc_exp;
        }
    }
    if (exp_groups.size() < 2)
        throw InvalidInput("too few counts for a chi-square test");

    GofReport report;
    for (std::size_t k = 0; k < exp_groups.size(); ++k) {
        const double diff = obs_groups[k] - exp_groups[k];
        report.statistic += diff * diff / exp_groups[k];
    }
    report.dof = static_cast<std::uint32_t>(exp_groups.size() - 1);
    report.p_value = igamc(report.dof / 2.0, report.statistic / 2.0);
    report.passed = report.p_value >= alpha;
    return report;
}

std::uint64_t window_coincidences(std::span<const DetectionRecord> a, std::span<const DetectionRecord> b,
                                  int window) {
    std::uint64_t count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index < b[j].index) {
            ++i;
        } else if (b[j].index < a[i].index) {
            ++j;
        } else {
            const auto gap = std::abs(static_cast<long long>(a[i].bin) - static_cast<long long>(b[j].bin));
            if (gap <= window)
                ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

PairVerdict verify_pair(ParticipantId i, std::span<const DetectionRecord> reveal_i, ParticipantId j,
                        std::span<const DetectionRecord> reveal_j, const VerificationSettings& settings) {
    return verify_pair(i, reveal_i, j, reveal_j, pairwise_intersect(reveal_i, reveal_j), settings);
}

PairVerdict verify_pair(ParticipantId i, std::span<const DetectionRecord> reveal_i, ParticipantId j,
                        std::span<const DetectionRecord> reveal_j, const PairMatch& match,
                        const VerificationSettings& settings) {
    PairVerdict v;
    v.i = i;
    v.j = j;
    v.histogram = coincidence_histogram(reveal_i, reveal_j, settings.max_offset);
    v.coincidences = v.histogram.peak();
    v.window_coincidences = window_coincidences(reveal_i, reveal_j, settings.window_bins);
    v.accidentals = v.histogram.mean_off_peak();
    v.car = compute_car(v.histogram);
    v.discord = match.discord;
    v.car_passed = v.coincidences >= settings.min_coincidences && v.car >= settings.car_threshold;

    std::vector<std::uint64_t> counts(settings.bins_per_period, 0);
    for (auto bin : match.matched.bins)
        if (bin < counts.size())
            ++counts[bin];
    try {
        const auto pdf = bin_pdf(settings.pump_shape, settings.bins_per_period);
        v.gof = chi_square_gof(counts, pdf, settings.gof_alpha);
    } catch (const InvalidInput&) {
        v.gof.reset();
    }
    v.passed = v.car_passed && v.gof && v.gof->passed;
    return v;
}

} // namespace dqrng
