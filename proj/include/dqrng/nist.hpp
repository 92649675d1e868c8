#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dqrng::nist {

// One bit per element, each 0 or 1.
using Bits = std::vector<std::uint8_t>;

Bits bits_from_bytes(std::span<const std::uint8_t> bytes); // MSB first
Bits bits_from_values(std::span<const std::uint64_t> values, unsigned width);
Bits bits_from_text(const std::string& text); // '0'/'1', whitespace ignored

struct TestResult {
    std::string name;
    std::vector<double> p_values; // empty when skipped
    bool skipped = false;
    bool passed = false;
};

struct Report {
    std::vector<TestResult> tests;
    double alpha = 0.01;

    // Every test that ran passed, and at least one ran.
    bool passed() const;
    bool all_skipped() const;
    const TestResult& find(const std::string& name) const;
};

// Individual tests. Each returns its p-value(s); callers check minimum
// lengths through `run_subset`.
double monobit(const Bits& bits);
double block_frequency(const Bits& bits, std::size_t block = 128);
double runs(const Bits& bits);
double longest_run(const Bits& bits);
double cusum(const Bits& bits, bool forward);
double approximate_entropy(const Bits& bits, unsigned block = 10);
std::pair<double, double> serial(const Bits& bits, unsigned block = 16);

/// Monobit, block frequency (128), runs, longest run of ones, cumulative
/// sums (both directions), approximate entropy (10), serial (16). Tests
/// whose minimum length is not met are marked skipped.
Report run_subset(const Bits& bits, double alpha = 0.01);

} // namespace dqrng::nist
