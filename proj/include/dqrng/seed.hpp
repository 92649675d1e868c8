#pragma once

#include <cstdint>

namespace dqrng {

// Labels for the independent randomness streams of one round.
enum class Stream : std::uint32_t {
    Source = 1,
    Classical = 2,
    Coalition = 3,
    Adversary = 4,
    Retry = 5,
};

/// Derives a child seed from a root seed.
///
/// The split feeds {lo32(root), hi32(root), trial, stream, slot} through
/// std::seed_seq and returns the first two generated words as one 64-bit
/// value. The mapping is fixed by the standard, so experiments are
/// bit-reproducible across platforms.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial, Stream stream,
                          std::uint32_t slot = 0);

} // namespace dqrng
