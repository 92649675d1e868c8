#include "dqrng/errors.hpp"
#include "dqrng/quantum_sim.hpp"
#include "dqrng/verify_stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace dqrng;

namespace {

SourceConfig quiet_source(std::uint64_t seed) {
    SourceConfig c;
    c.seed = seed;
    c.dark_rate_per_node.assign(c.n_nodes, 0.0);
    return c;
}

bool sorted_unique(const NodeRecords& r) {
    for (std::size_t k = 1; k < r.size(); ++k)
        if (r[k - 1].index >= r[k].index)
            return false;
    return true;
}

} // namespace

TEST_CASE("quantize maps arrivals to bins") {
    CHECK(quantize(0.0, 250.0) == 0);
    CHECK(quantize(249.999, 250.0) == 0);
    CHECK(quantize(250.0, 250.0) == 1);
    CHECK(quantize(99999.99, 250.0) == 399);
    CHECK_THROWS_AS(quantize(100000.0, 250.0), RangeError);
    CHECK_THROWS_AS(quantize(-0.5, 250.0), RangeError);
    CHECK_THROWS_AS(quantize(10.0, 0.0), ConfigError);
}

TEST_CASE("bin pdfs") {
    for (PumpShape shape : {PumpShape{pump::Uniform{}}, PumpShape{pump::Gaussian{}}, PumpShape{pump::Rayleigh{}}}) {
        const auto pdf = bin_pdf(shape, 400);
        REQUIRE(pdf.size() == 400);
        CHECK(std::accumulate(pdf.begin(), pdf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::all_of(pdf.begin(), pdf.end(), [](double p) { return p >= 0.0; }));
    }

    SUBCASE("uniform") {
        const auto pdf = bin_pdf(pump::Uniform{}, 400);
        CHECK(pdf[0] == doctest::Approx(1.0 / 400));
        CHECK(pdf[399] == doctest::Approx(1.0 / 400));
    }
    SUBCASE("gaussian is centred inside its mean bin") {
        const auto pdf = bin_pdf(pump::Gaussian{200.0, 50.0}, 400);
        for (int k = 1; k < 150; ++k)
            CHECK(pdf[200 - k] == doctest::Approx(pdf[200 + k]).epsilon(1e-9));
        // Reference values from a normal CDF, renormalised to [0, 400).
        CHECK(pdf[200] == doctest::Approx(0.007979218479969952).epsilon(1e-9));
        CHECK(pdf[150] == doctest::Approx(0.004839721308652663).epsilon(1e-9));
        CHECK(pdf[0] == doctest::Approx(2.6774434420463503e-06).epsilon(1e-7));
    }
    SUBCASE("rayleigh") {
        const auto pdf = bin_pdf(pump::Rayleigh{80.0}, 400);
        CHECK(pdf[0] == doctest::Approx(7.812223945617698e-05).epsilon(1e-9));
        CHECK(pdf[79] == doctest::Approx(0.007581265397739557).epsilon(1e-9));
        CHECK(pdf[399] == doctest::Approx(2.400394645645828e-07).epsilon(1e-6));
    }
    CHECK_THROWS_AS(validate_pump(pump::Gaussian{200.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(validate_pump(pump::Rayleigh{-1.0}), ConfigError);
    CHECK_THROWS_AS(bin_pdf(pump::Uniform{}, 1), ConfigError);
}

TEST_CASE("sampled bins follow the configured shape") {
    const PumpShape gauss = pump::Gaussian{};
    const BinSampler sampler(gauss, 400);
    Rng rng(11);
    std::vector<std::uint64_t> counts(400, 0);
    for (int k = 0; k < 100000; ++k)
        ++counts[sampler(rng)];
    CHECK(chi_square_gof(counts, bin_pdf(gauss, 400), 0.01).p_value >= 0.01);
    CHECK(chi_square_gof(counts, bin_pdf(pump::Uniform{}, 400), 0.01).p_value < 0.01);
    CHECK(chi_square_gof(counts, bin_pdf(pump::Rayleigh{}, 400), 0.01).p_value < 0.01);
}

TEST_CASE("true pair bins match the pump shape") {
    SourceConfig c;
    c.pump_shape = pump::Rayleigh{};
    c.pair_rate = 1.0;
    c.seed = 5;
    const auto round = simulate_round(c);
    REQUIRE(round.pairs.size() == c.n_pulses);
    std::vector<std::uint64_t> counts(400, 0);
    for (const auto& p : round.pairs)
        ++counts[p.bin];
    CHECK(chi_square_gof(counts, bin_pdf(pump::Rayleigh{}, 400), 0.01).p_value >= 0.01);
    CHECK(chi_square_gof(counts, bin_pdf(pump::Gaussian{}, 400), 0.01).p_value < 0.01);
}

TEST_CASE("generate_round is deterministic and well formed") {
    SourceConfig c;
    c.seed = 99;
    const auto a = generate_round(c);
    const auto b = generate_round(c);
    CHECK(a == b);
    c.seed = 100;
    CHECK(generate_round(c) != a);
    REQUIRE(a.size() == 4);
    for (std::uint32_t n = 0; n < 4; ++n) {
        CHECK(sorted_unique(a[n]));
        for (const auto& r : a[n]) {
            CHECK(r.node == n);
            CHECK(r.index < c.n_pulses);
            CHECK(r.bin < 400);
        }
    }
}

TEST_CASE("singles follow the loss-scaled binomial") {
    SourceConfig c = quiet_source(3);
    c.routing = Routing::DistinctNodes;
    c.jitter_sigma_ps = 0.0;
    c.pair_rate = 0.2;
    c.loss_per_node = {0.0, 0.3, 0.6, 0.9};
    const auto round = simulate_round(c);
    const double pairs = static_cast<double>(round.pairs.size());
    // Each photon of a pair goes to one of the other three nodes' partner
    // slots: a node is hit by half of all pairs.
    for (std::uint32_t n = 0; n < 4; ++n) {
        std::uint64_t arriving = 0;
        for (const auto& p : round.pairs)
            arriving += (p.node_a == n) + (p.node_b == n);
        const double keep = 1.0 - c.loss(n);
        const double mean = arriving * keep;
        const double sd = std::sqrt(arriving * keep * (1.0 - keep)) + 1e-9;
        CHECK(std::abs(static_cast<double>(round.nodes[n].size()) - mean) <= 5.0 * sd + 1.0);
        CHECK(arriving == doctest::Approx(pairs / 2.0).epsilon(0.05));
    }
}

TEST_CASE("more loss only removes records") {
    SourceConfig lo = quiet_source(21);
    SourceConfig hi = lo;
    lo.loss_per_node.assign(4, 0.2);
    hi.loss_per_node.assign(4, 0.5);
    const auto a = generate_round(lo);
    const auto b = generate_round(hi);
    for (std::uint32_t n = 0; n < 4; ++n) {
        CHECK(b[n].size() < a[n].size());
        // Occupied periods only: two photons sharing a period keep the
        // earlier one, which may be the one lost at higher loss.
        CHECK(std::includes(a[n].begin(), a[n].end(), b[n].begin(), b[n].end(),
                            [](const DetectionRecord& x, const DetectionRecord& y) { return x.index < y.index; }));
    }
}

TEST_CASE("without jitter both photons of a detected pair share index and bin") {
    SourceConfig c = quiet_source(8);
    c.jitter_sigma_ps = 0.0;
    c.loss_per_node.assign(4, 0.0);
    c.routing = Routing::DistinctNodes;
    const auto round = simulate_round(c);
    std::uint64_t checked = 0;
    for (const auto& p : round.pairs) {
        auto find = [&](ParticipantId n) {
            const auto& list = round.nodes[n];
            auto it = std::lower_bound(list.begin(), list.end(), p.index,
                                       [](const DetectionRecord& r, std::uint64_t idx) { return r.index < idx; });
            REQUIRE(it != list.end());
            REQUIRE(it->index == p.index);
            return it->bin;
        };
        CHECK(find(p.node_a) == p.bin);
        CHECK(find(p.node_b) == p.bin);
        if (++checked == 500)
            break;
    }
    CHECK(checked == 500);
}

TEST_CASE("dark counts alone") {
    SourceConfig c;
    c.pair_rate = 0.0;
    c.seed = 13;
    c.dark_rate_per_node.assign(4, 0.01);
    const auto round = simulate_round(c);
    CHECK(round.pairs.empty());
    const double p = 1.0 - std::exp(-0.01);
    const double mean = c.n_pulses * p;
    const double sd = std::sqrt(c.n_pulses * p * (1.0 - p));
    for (const auto& node : round.nodes) {
        CHECK(std::abs(static_cast<double>(node.size()) - mean) <= 5.0 * sd);
        CHECK(sorted_unique(node));
    }
    c.dark_rate_per_node.assign(4, 0.0);
    for (const auto& node : generate_round(c))
        CHECK(node.empty());
}

TEST_CASE("jitter wraps across period boundaries") {
    SourceConfig c = quiet_source(17);
    c.jitter_sigma_ps = 20000.0; // a fifth of a period
    c.loss_per_node.assign(4, 0.0);
    c.routing = Routing::DistinctNodes;
    const auto round = simulate_round(c);
    std::uint64_t moved = 0;
    std::set<std::uint64_t> pair_index;
    for (const auto& p : round.pairs)
        pair_index.insert(p.index);
    for (const auto& node : round.nodes) {
        CHECK(sorted_unique(node));
        for (const auto& r : node)
            moved += pair_index.count(r.index) == 0;
    }
    CHECK(moved > 0);
}

TEST_CASE("source config validation") {
    SourceConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.bins_per_period() == 400);
    CHECK(c.loss(2) == doctest::Approx(kDefaultLoss));
    CHECK(c.dark_rate(1) == doctest::Approx(kDefaultDarkRate));

    auto bad = [](auto mutate) {
        SourceConfig s;
        mutate(s);
        return s;
    };
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.pair_rate = 1.5; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.n_pulses = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.loss_per_node = {0.1}; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.loss_per_node = {0.1, 0.1, 1.2, 0.1}; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.dark_rate_per_node = {0, 0, -1, 0}; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.bin_width_ps = 300.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.jitter_sigma_ps = -1.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](SourceConfig& s) { s.pump_shape = pump::Gaussian{100.0, -2.0}; }).validate(), ConfigError);
    CHECK_THROWS_AS(generate_round(bad([](SourceConfig& s) { s.pair_rate = -0.1; })), ConfigError);
}

TEST_CASE("records csv round trip") {
    SourceConfig c;
    c.n_pulses = 2000;
    c.seed = 4;
    const auto lists = generate_round(c);
    std::stringstream io;
    write_records_csv(io, lists);
    CHECK(io.str().rfind("node,index,bin\n", 0) == 0);
    CHECK(read_records_csv(io, 4) == lists);

    std::istringstream bad_header("a,b,c\n0,1,2\n");
    CHECK_THROWS_AS(read_records_csv(bad_header, 4), ParseError);
    std::istringstream descending("node,index,bin\n0,5,1\n0,4,1\n");
    CHECK_THROWS_AS(read_records_csv(descending, 4), ParseError);
    std::istringstream bad_node("node,index,bin\n7,5,1\n");
    CHECK_THROWS_AS(read_records_csv(bad_node, 4), ParseError);
    std::istringstream junk("node,index,bin\n0,x,1\n");
    CHECK_THROWS_AS(read_records_csv(junk, 4), ParseError);
}
