#include "semot/random.hpp"

#include <cmath>
#include <stdexcept>

namespace semot {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x5eed0717u};
    engine_.seed(seq);
}

double RandomStream::uniform() {
    // 53 random bits mapped onto (0, 1].
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("RandomStream::exponential: rate must be positive");
    return -std::log(uniform()) / rate;
}

}  // namespace semot
