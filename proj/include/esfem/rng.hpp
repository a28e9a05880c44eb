#pragma once

#include <cstdint>
#include <random>

namespace esfem {

// Seeded portable uniform generator: MT19937-64 (fully specified by the
// standard) with doubles formed from the top 53 bits, so identical seeds give
// bit-identical streams on every platform. std::uniform_real_distribution is
// deliberately avoided; its output is implementation-defined.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1)
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace esfem
