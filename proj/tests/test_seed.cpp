#include "dqrng/seed.hpp"

#include <doctest.h>

#include <set>

using namespace dqrng;

TEST_CASE("derive_seed is a pure function") {
    CHECK(derive_seed(1, 2, Stream::Source) == derive_seed(1, 2, Stream::Source));
    CHECK(derive_seed(0xdeadbeefcafef00dULL, 7, Stream::Classical, 3) ==
          derive_seed(0xdeadbeefcafef00dULL, 7, Stream::Classical, 3));
}

TEST_CASE("derive_seed separates root, trial, stream and slot") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t root : {0ULL, 1ULL, 1ULL << 32, ~0ULL})
        for (std::uint64_t trial : {0ULL, 1ULL, 1ULL << 40})
            for (auto stream : {Stream::Source, Stream::Classical, Stream::Coalition, Stream::Adversary, Stream::Retry})
                for (std::uint32_t slot = 0; slot < 4; ++slot)
                    seen.insert(derive_seed(root, trial, stream, slot));
    CHECK(seen.size() == 4 * 3 * 5 * 4);
}

// Known answers from an independent re-implementation of the seed_seq
// generate algorithm.
TEST_CASE("derive_seed known answers") {
    CHECK(derive_seed(1, 0, Stream::Source) == 0x8da07bd73397b81fULL);
    CHECK(derive_seed(0x0123456789abcdefULL, 0xfedcba9876543210ULL, Stream::Classical, 5) == 0x9c815e44cbd85d2dULL);
}
