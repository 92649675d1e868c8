#include "dqrng/nist.hpp"

#include "dqrng/errors.hpp"
#include "dqrng/verify_stats.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>

namespace dqrng::nist {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Overlapping m-bit pattern counts with wraparound, as in SP 800-22.
std::vector<std::uint64_t> pattern_counts(const Bits& bits, unsigned m) {
    std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
    const std::size_t n = bits.size();
    const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
    std::uint64_t window = 0;
    for (unsigned k = 0; k + 1 < m; ++k)
        window = (window << 1) | bits[k % n];
    for (std::size_t i = 0; i < n; ++i) {
        window = ((window << 1) | bits[(i + m - 1) % n]) & mask;
        ++counts[window];
    }
    return counts;
}

double psi_squared(const Bits& bits, int m) {
    if (m <= 0)
        return 0.0;
    const auto counts = pattern_counts(bits, static_cast<unsigned>(m));
    double sum = 0.0;
    for (auto c : counts)
        sum += static_cast<double>(c) * static_cast<double>(c);
    const double n = static_cast<double>(bits.size());
    return sum * std::ldexp(1.0, m) / n - n;
}

unsigned floor_log2(std::size_t n) {
    unsigned k = 0;
    while ((std::size_t{2} << k) <= n)
        ++k;
    return k;
}

} // namespace

Bits bits_from_bytes(std::span<const std::uint8_t> bytes) {
    Bits out;
    out.reserve(bytes.size() * 8);
    for (auto b : bytes)
        for (int k = 7; k >= 0; --k)
            out.push_back(static_cast<std::uint8_t>((b >> k) & 1u));
    return out;
}

Bits bits_from_values(std::span<const std::uint64_t> values, unsigned width) {
    Bits out;
    out.reserve(values.size() * width);
    for (auto v : values)
        for (int k = static_cast<int>(width) - 1; k >= 0; --k)
            out.push_back(static_cast<std::uint8_t>((v >> k) & 1u));
    return out;
}

Bits bits_from_text(const std::string& text) {
    Bits out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '0' || c == '1')
            out.push_back(static_cast<std::uint8_t>(c - '0'));
        else if (!std::isspace(static_cast<unsigned char>(c)))
            throw ParseError("bit text may only contain 0, 1 and whitespace");
    }
    return out;
}

double monobit(const Bits& bits) {
    long long s = 0;
    for (auto b : bits)
        s += b ? 1 : -1;
    const double s_obs = std::abs(static_cast<double>(s)) / std::sqrt(static_cast<double>(bits.size()));
    return std::erfc(s_obs / std::sqrt(2.0));
}

double block_frequency(const Bits& bits, std::size_t block) {
    const std::size_t blocks = bits.size() / block;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < block; ++j)
            ones += bits[i * block + j];
        const double pi = static_cast<double>(ones) / static_cast<double>(block) - 0.5;
        chi2 += pi * pi;
    }
    chi2 *= 4.0 * static_cast<double>(block);
    return igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
}

double runs(const Bits& bits) {
    const double n = static_cast<double>(bits.size());
    double ones = 0.0;
    for (auto b : bits)
        ones += b;
    const double pi = ones / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n))
        return 0.0; // frequency prerequisite failed
    double v_obs = 1.0;
    for (std::size_t k = 0; k + 1 < bits.size(); ++k)
        if (bits[k] != bits[k + 1])
            v_obs += 1.0;
    const double spread = 2.0 * n * pi * (1.0 - pi);
    return std::erfc(std::abs(v_obs - spread) / (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
}

double longest_run(const Bits& bits) {
    const std::size_t n = bits.size();
    std::size_t m = 0;
    unsigned v0 = 0;
    std::vector<double> pi;
    if (n < 6272) {
        m = 8;
        v0 = 1;
        pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
    } else if (n < 750000) {
        m = 128;
        v0 = 4;
        pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
    } else {
        m = 10000;
        v0 = 10;
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    }
    const std::size_t k = pi.size() - 1;
    const std::size_t blocks = n / m;
    std::vector<double> nu(pi.size(), 0.0);
    for (std::size_t i = 0; i < blocks; ++i) {
        unsigned longest = 0, run = 0;
        for (std::size_t j = 0; j < m; ++j) {
            run = bits[i * m + j] ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        const std::size_t cls = longest <= v0 ? 0 : std::min<std::size_t>(longest - v0, k);
        nu[cls] += 1.0;
    }
    double chi2 = 0.0;
    const double nb = static_cast<double>(blocks);
    for (std::size_t c = 0; c < pi.size(); ++c)
        chi2 += (nu[c] - nb * pi[c]) * (nu[c] - nb * pi[c]) / (nb * pi[c]);
    return igamc(static_cast<double>(k) / 2.0, chi2 / 2.0);
}

double cusum(const Bits& bits, bool forward) {
    const long long n = static_cast<long long>(bits.size());
    long long s = 0, z = 0;
    for (long long k = 0; k < n; ++k) {
        const auto b = bits[static_cast<std::size_t>(forward ? k : n - 1 - k)];
        s += b ? 1 : -1;
        z = std::max(z, std::llabs(s));
    }
    if (z == 0)
        return 1.0;
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    // Integer division truncates toward zero, matching the reference code.
    double sum1 = 0.0;
    for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
        sum1 += normal_cdf(static_cast<double>((4 * k + 1) * z) / sqrt_n);
        sum1 -= normal_cdf(static_cast<double>((4 * k - 1) * z) / sqrt_n);
    }
    double sum2 = 0.0;
    for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
        sum2 += normal_cdf(static_cast<double>((4 * k + 3) * z) / sqrt_n);
        sum2 -= normal_cdf(static_cast<double>((4 * k + 1) * z) / sqrt_n);
    }
    return std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
}

double approximate_entropy(const Bits& bits, unsigned block) {
    const double n = static_cast<double>(bits.size());
    auto phi = [&](unsigned m) {
        if (m == 0)
            return 0.0;
        double sum = 0.0;
        for (auto c : pattern_counts(bits, m)) {
            if (c > 0) {
                const double p = static_cast<double>(c) / n;
                sum += p * std::log(p);
            }
        }
        return sum;
    };
    const double apen = phi(block) - phi(block + 1);
    const double chi2 = 2.0 * n * (std::log(2.0) - apen);
    return igamc(std::ldexp(1.0, static_cast<int>(block) - 1), chi2 / 2.0);
}

std::pair<double, double> serial(const Bits& bits, unsigned block) {
    const int m = static_cast<int>(block);
    const double p0 = psi_squared(bits, m);
    const double p1 = psi_squared(bits, m - 1);
    const double p2 = psi_squared(bits, m - 2);
    const double del1 = p0 - p1;
    const double del2 = p0 - 2.0 * p1 + p2;
    return {igamc(std::ldexp(1.0, m - 2), del1 / 2.0), igamc(std::ldexp(1.0, m - 3), del2 / 2.0)};
}

Report run_subset(const Bits& bits, double alpha) {
    const std::size_t n = bits.size();
    Report report;
    report.alpha = alpha;

    auto add = [&](std::string name, bool enough, auto&& compute) {
        TestResult t;
        t.name = std::move(name);
        if (!enough) {
            t.skipped = true;
        } else {
            t.p_values = compute();
            t.passed = std::all_of(t.p_values.begin(), t.p_values.end(), [&](double p) { return p >= alpha; });
        }
        report.tests.push_back(std::move(t));
    };

    const unsigned lg = n > 0 ? floor_log2(n) : 0;
    add("monobit", n >= 100, [&] { return std::vector<double>{monobit(bits)}; });
    add("block_frequency", n >= 128 && n >= 100, [&] { return std::vector<double>{block_frequency(bits, 128)}; });
    add("runs", n >= 100, [&] { return std::vector<double>{runs(bits)}; });
    add("longest_run", n >= 128, [&] { return std::vector<double>{longest_run(bits)}; });
    add("cumulative_sums", n >= 100,
        [&] { return std::vector<double>{cusum(bits, true), cusum(bits, false)}; });
    // Block-length ceilings recommended for each test.
    add("approximate_entropy", n > 0 && 10 + 5 < lg,
        [&] { return std::vector<double>{approximate_entropy(bits, 10)}; });
    add("serial", n > 0 && 16 + 2 < lg, [&] {
        const auto [a, b] = serial(bits, 16);
        return std::vector<double>{a, b};
    });
    return report;
}

bool Report::passed() const {
    bool ran = false;
    for (const auto& t : tests) {
        if (t.skipped)
            continue;
        ran = true;
        if (!t.passed)
            return false;
    }
    return ran;
}

bool Report::all_skipped() const {
    return std::all_of(tests.begin(), tests.end(), [](const TestResult& t) { return t.skipped; });
}

const TestResult& Report::find(const std::string& name) const {
    for (const auto& t : tests)
        if (t.name == name)
            return t;
    throw InvalidInput("no NIST test named " + name);
}

} // namespace dqrng::nist
