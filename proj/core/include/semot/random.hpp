#pragma once

#include <cstdint>
#include <random>

namespace semot {

/// Independent random stream for one (seed, stream index) pair. The same pair
/// always yields the same sequence, regardless of which thread draws it.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    /// Uniform on (0, 1].
    double uniform();
    double normal();
    double exponential(double rate);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace semot
