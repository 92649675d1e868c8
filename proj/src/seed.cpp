#include "dqrng/seed.hpp"

#include <array>
#include <random>

namespace dqrng {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial, Stream stream,
                          std::uint32_t slot) {
    std::seed_seq seq{static_cast<std::uint32_t>(root),
                      static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(trial),
                      static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(stream),
                      slot};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

} // namespace dqrng
