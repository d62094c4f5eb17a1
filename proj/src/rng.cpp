#include "kerrsim/rng.hpp"

#include <cmath>

namespace kerrsim {

namespace {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& c, const std::array<uint32_t, 2>& k) {
    uint64_t p0 = static_cast<uint64_t>(kM0) * c[0];
    uint64_t p1 = static_cast<uint64_t>(kM1) * c[2];
    uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter, std::array<uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        round_once(counter, key);
        key[0] += kW0;
        key[1] += kW1;
    }
    return counter;
}

double u32_to_unit(uint32_t x) {
    return (static_cast<double>(x) + 0.5) * (1.0 / 4294967296.0);
}

std::pair<double, double> gaussian_pair(uint64_t seed, uint32_t input_index,
                                        uint32_t trajectory_index, uint64_t step) {
    std::array<uint32_t, 4> counter = {static_cast<uint32_t>(step),
                                       static_cast<uint32_t>(step >> 32), input_index,
                                       trajectory_index};
    std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                   static_cast<uint32_t>(seed >> 32)};
    auto out = philox4x32(counter, key);
    double u1 = u32_to_unit(out[0]);
    double u2 = u32_to_unit(out[1]);
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

} // namespace kerrsim
