#include "dqrng/errors.hpp"
#include "dqrng/nist.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>
#include <random>

using namespace dqrng;
using namespace dqrng::nist;

namespace {

// First 100 bits of pi, integer part included (SP 800-22 worked examples).
const char* kPi100 =
    "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

Bits e_expansion() {
    std::ifstream in(DQRNG_TEST_DATA "/e_1e6.bin", std::ios::binary);
    REQUIRE(in);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bits_from_bytes(bytes);
}

} // namespace

TEST_CASE("bit helpers") {
    const std::vector<std::uint8_t> bytes{0xA5, 0x01};
    CHECK(bits_from_bytes(bytes) == Bits{1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1});
    const std::vector<std::uint64_t> values{5, 2};
    CHECK(bits_from_values(values, 3) == Bits{1, 0, 1, 0, 1, 0});
    CHECK(bits_from_text("10 1\n1") == Bits{1, 0, 1, 1});
    CHECK_THROWS_AS(bits_from_text("102"), ParseError);
}

TEST_CASE("worked examples") {
    const auto pi = bits_from_text(kPi100);
    REQUIRE(pi.size() == 100);
    CHECK(monobit(pi) == doctest::Approx(0.109599).epsilon(1e-5));
    CHECK(runs(pi) == doctest::Approx(0.500798).epsilon(1e-5));
    CHECK(block_frequency(pi, 10) == doctest::Approx(0.706438).epsilon(1e-5));
    CHECK(cusum(pi, true) == doctest::Approx(0.219194).epsilon(1e-5));
    CHECK(cusum(pi, false) == doctest::Approx(0.114866).epsilon(1e-5));
    CHECK(approximate_entropy(pi, 2) == doctest::Approx(0.235301).epsilon(1e-5));

    CHECK(monobit(bits_from_text("1011010101")) == doctest::Approx(0.527089).epsilon(1e-5));
    CHECK(block_frequency(bits_from_text("0110011010"), 3) == doctest::Approx(0.801252).epsilon(1e-5));
    CHECK(runs(bits_from_text("1001101011")) == doctest::Approx(0.147232).epsilon(1e-5));
    CHECK(cusum(bits_from_text("1011010111"), true) == doctest::Approx(0.4116588).epsilon(1e-5));
    CHECK(approximate_entropy(bits_from_text("0100110101"), 3) == doctest::Approx(0.261961).epsilon(1e-5));
    const auto [p1, p2] = serial(bits_from_text("0011011101"), 3);
    CHECK(p1 == doctest::Approx(0.808792).epsilon(1e-5));
    CHECK(p2 == doctest::Approx(0.670320).epsilon(1e-5));
    const auto lr = bits_from_text("11001100000101010110110001001100111000000000001001001101010100010001001111010110"
                                   "100000001101011111001100111001101101100010110010");
    CHECK(longest_run(lr) == doctest::Approx(0.180609).epsilon(1e-5));
}

TEST_CASE("binary expansion of e, one million bits") {
    const auto e = e_expansion();
    REQUIRE(e.size() == 1000000);
    const auto r = run_subset(e);
    CHECK(r.find("monobit").p_values.at(0) == doctest::Approx(0.953749).epsilon(1e-5));
    CHECK(r.find("block_frequency").p_values.at(0) == doctest::Approx(0.211072).epsilon(1e-5));
    CHECK(r.find("runs").p_values.at(0) == doctest::Approx(0.561917).epsilon(1e-5));
    CHECK(r.find("longest_run").p_values.at(0) == doctest::Approx(0.718945).epsilon(1e-5));
    CHECK(r.find("cumulative_sums").p_values.at(0) == doctest::Approx(0.669886).epsilon(1e-5));
    CHECK(r.find("cumulative_sums").p_values.at(1) == doctest::Approx(0.724265).epsilon(1e-5));
    CHECK(r.find("approximate_entropy").p_values.at(0) == doctest::Approx(0.700073).epsilon(1e-5));
    CHECK(r.find("serial").p_values.at(0) == doctest::Approx(0.766182).epsilon(1e-5));
    CHECK(r.find("serial").p_values.at(1) == doctest::Approx(0.462921).epsilon(1e-5));
    CHECK(r.passed());
}

TEST_CASE("length thresholds") {
    SUBCASE("ten bits skip everything") {
        const auto r = run_subset(bits_from_text("0110100110"));
        CHECK(r.all_skipped());
        CHECK_FALSE(r.passed());
        CHECK(r.tests.size() == 7);
    }
    SUBCASE("entropy and serial need long inputs") {
        std::mt19937_64 rng(1);
        Bits b(65535);
        for (auto& x : b)
            x = rng() & 1;
        auto r = run_subset(b);
        CHECK(r.find("approximate_entropy").skipped);
        CHECK(r.find("serial").skipped);
        CHECK_FALSE(r.find("monobit").skipped);
        b.resize(65536);
        r = run_subset(b);
        CHECK_FALSE(r.find("approximate_entropy").skipped);
        CHECK(r.find("serial").skipped);
        b.resize(524288);
        for (auto& x : b)
            x = rng() & 1;
        r = run_subset(b);
        CHECK_FALSE(r.find("serial").skipped);
        CHECK(r.find("serial").p_values.size() == 2);
    }
    CHECK_THROWS_AS(run_subset(Bits(200, 0)).find("nope"), InvalidInput);
}

TEST_CASE("degenerate streams fail") {
    const auto zeros = run_subset(Bits(20000, 0));
    CHECK_FALSE(zeros.find("monobit").passed);
    CHECK_FALSE(zeros.passed());

    Bits alternating(20000);
    for (std::size_t k = 0; k < alternating.size(); ++k)
        alternating[k] = k & 1;
    const auto alt = run_subset(alternating);
    CHECK(alt.find("monobit").passed);
    CHECK_FALSE(alt.find("runs").passed);
}
