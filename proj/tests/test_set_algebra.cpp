#include "dqrng/set_algebra.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace dqrng;

namespace {

NodeRecords random_records(Rng& rng, ParticipantId node, std::size_t max_count, std::uint64_t domain,
                           std::uint32_t bins) {
    std::uniform_int_distribution<std::size_t> count(0, max_count);
    std::uniform_int_distribution<std::uint64_t> idx(0, domain - 1);
    std::uniform_int_distribution<std::uint32_t> bin(0, bins - 1);
    std::map<std::uint64_t, std::uint32_t> picked;
    const auto n = count(rng);
    for (std::size_t k = 0; k < n; ++k)
        picked.emplace(idx(rng), bin(rng));
    NodeRecords out;
    for (auto [i, b] : picked)
        out.push_back({node, i, b});
    return out;
}

// Quadratic reference.
PairMatch brute_intersect(const NodeRecords& a, const NodeRecords& b) {
    PairMatch m;
    for (const auto& x : a)
        for (const auto& y : b) {
            if (x.index != y.index)
                continue;
            if (x.bin == y.bin) {
                m.matched.indices.push_back(x.index);
                m.matched.bins.push_back(x.bin);
            } else {
                ++m.discord;
            }
        }
    return m;
}

MergedMatches brute_merge(const std::vector<PairMatch>& pairs) {
    std::map<std::uint64_t, std::set<std::uint32_t>> seen;
    for (const auto& p : pairs)
        for (std::size_t k = 0; k < p.matched.size(); ++k)
            seen[p.matched.indices[k]].insert(p.matched.bins[k]);
    MergedMatches out;
    for (const auto& [idx, bins] : seen) {
        if (bins.size() == 1) {
            out.merged.indices.push_back(idx);
            out.merged.bins.push_back(*bins.begin());
        } else {
            ++out.conflicts;
        }
    }
    return out;
}

} // namespace

TEST_CASE("pairwise_intersect on a hand example") {
    const NodeRecords a{{0, 1, 5}, {0, 3, 7}, {0, 4, 2}, {0, 9, 9}};
    const NodeRecords b{{1, 1, 5}, {1, 3, 8}, {1, 5, 2}, {1, 9, 9}, {1, 12, 0}};
    const auto m = pairwise_intersect(a, b);
    CHECK(m.matched.indices == std::vector<std::uint64_t>{1, 9});
    CHECK(m.matched.bins == std::vector<std::uint32_t>{5, 9});
    CHECK(m.discord == 1);
    CHECK(pairwise_intersect(a, {}).matched.empty());
    CHECK(pairwise_intersect({}, {}).discord == 0);
}

TEST_CASE("pairwise_intersect matches the quadratic reference") {
    Rng rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::uint64_t domain = 1 + rng() % 2000;
        const std::uint32_t bins = 1 + rng() % 4;
        const auto a = random_records(rng, 0, 300, domain, bins);
        const auto b = random_records(rng, 1, 300, domain, bins);
        const auto got = pairwise_intersect(a, b);
        const auto want = brute_intersect(a, b);
        REQUIRE(got.matched == want.matched);
        REQUIRE(got.discord == want.discord);
        // Symmetric in its arguments.
        REQUIRE(pairwise_intersect(b, a).matched == got.matched);
    }
}

TEST_CASE("merge_matches drops disagreeing indices") {
    PairMatch p01, p02, p12;
    p01.matched = {{1, 2, 4}, {7, 7, 7}};
    p02.matched = {{2, 3}, {7, 1}};
    p12.matched = {{4, 5}, {8, 3}};
    const auto m = merge_matches(std::vector<PairMatch>{p01, p02, p12});
    CHECK(m.merged.indices == std::vector<std::uint64_t>{1, 2, 3, 5});
    CHECK(m.merged.bins == std::vector<std::uint32_t>{7, 7, 1, 3});
    CHECK(m.conflicts == 1);
}

TEST_CASE("merge_matches matches the reference") {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t domain = 1 + rng() % 500;
        const std::uint32_t bins = 1 + rng() % 3;
        std::vector<NodeRecords> nodes;
        for (ParticipantId n = 0; n < 4; ++n)
            nodes.push_back(random_records(rng, n, 200, domain, bins));
        std::vector<PairMatch> pairs;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                pairs.push_back(pairwise_intersect(nodes[i], nodes[j]));
        const auto got = merge_matches(pairs);
        const auto want = brute_merge(pairs);
        REQUIRE(got.merged == want.merged);
        REQUIRE(got.conflicts == want.conflicts);
    }
}

TEST_CASE("combine_classical is the sorted set union on both code paths") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        // Small domains take the dense path, wide ones the sorting path.
        const std::uint64_t domain = trial % 2 ? 50 + rng() % 100 : (std::uint64_t{1} << 40);
        std::vector<std::vector<std::uint64_t>> lists(1 + rng() % 4);
        std::set<std::uint64_t> want;
        for (auto& l : lists) {
            const auto n = rng() % 100;
            for (std::uint64_t k = 0; k < n; ++k) {
                l.push_back(rng() % domain);
                want.insert(l.back());
            }
        }
        REQUIRE(combine_classical(lists) == std::vector<std::uint64_t>(want.begin(), want.end()));
    }
    CHECK(combine_classical(std::vector<std::vector<std::uint64_t>>{}).empty());
    CHECK(combine_classical(std::vector<std::vector<std::uint64_t>>{{}, {}}).empty());
    CHECK(combine_classical(std::vector<std::vector<std::uint64_t>>{{0, 0, 0}}) == std::vector<std::uint64_t>{0});
}

TEST_CASE("select_final keeps classical indices only") {
    const IndexedBins merged{{1, 4, 6, 9, 12}, {10, 40, 60, 90, 120}};
    const std::vector<std::uint64_t> classical{0, 4, 5, 9, 13};
    const auto sel = select_final(merged, classical);
    CHECK(sel.indices == std::vector<std::uint64_t>{4, 9});
    CHECK(sel.bins == std::vector<std::uint32_t>{40, 90});
    CHECK(select_final(merged, {}).empty());
    CHECK(select_final({}, classical).empty());

    Rng rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        std::set<std::uint64_t> mi, cl;
        for (int k = 0; k < 200; ++k) {
            mi.insert(rng() % 400);
            cl.insert(rng() % 400);
        }
        IndexedBins m;
        for (auto i : mi) {
            m.indices.push_back(i);
            m.bins.push_back(static_cast<std::uint32_t>(i * 3 % 400));
        }
        const std::vector<std::uint64_t> c(cl.begin(), cl.end());
        IndexedBins want;
        for (std::size_t k = 0; k < m.size(); ++k)
            if (cl.count(m.indices[k])) {
                want.indices.push_back(m.indices[k]);
                want.bins.push_back(m.bins[k]);
            }
        REQUIRE(select_final(m, c) == want);
    }
}
