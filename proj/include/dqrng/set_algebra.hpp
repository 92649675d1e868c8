#pragma once

#include "dqrng/quantum_sim.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dqrng {

// Index-sorted (index, bin) list: the I / R^q pair kept side by side.
struct IndexedBins {
    std::vector<std::uint64_t> indices;
    std::vector<std::uint32_t> bins;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
    friend bool operator==(const IndexedBins&, const IndexedBins&) = default;
};

struct PairMatch {
    IndexedBins matched;
    std::uint64_t discord = 0; // shared index, different bin
};

/// Intersection of two index-sorted, index-unique reveals. Records match
/// when both index and bin agree.
PairMatch pairwise_intersect(std::span<const DetectionRecord> a, std::span<const DetectionRecord> b);

struct MergedMatches {
    IndexedBins merged;
    std::uint64_t conflicts = 0; // indices whose pairs disagree on the bin; dropped
};

/// Index-wise union of per-pair matches. An index kept by several pairs
/// survives only if every pair reports the same bin.
MergedMatches merge_matches(std::span<const PairMatch> pairs);

/// Sorted set of every classical value.
std::vector<std::uint64_t> combine_classical(std::span<const std::vector<std::uint64_t>> lists);

/// Keeps merged entries whose index appears in the sorted classical set.
IndexedBins select_final(const IndexedBins& merged, std::span<const std::uint64_t> classical_set);

} // namespace dqrng
