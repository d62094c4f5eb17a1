#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace kerrsim {

/// Philox4x32-10 counter-based generator. Stateless: each call maps a
/// (key, counter) pair to four 32-bit words, so independent streams need no
/// coordination — noise for (input k, trajectory m, step n) is addressed
/// directly.
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter, std::array<uint32_t, 2> key);

/// Uniform in (0, 1): (x + 0.5) * 2^-32, never exactly 0 or 1.
double u32_to_unit(uint32_t x);

/// Pair of standard-normal samples for one (seed, input, trajectory, step)
/// address, via Box-Muller on one Philox block. Bit-reproducible.
std::pair<double, double> gaussian_pair(uint64_t seed, uint32_t input_index,
                                        uint32_t trajectory_index, uint64_t step);

} // namespace kerrsim
