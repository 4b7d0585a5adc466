#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pantilt {

// Seeded random source with hand-rolled distributions. std:: distribution
// objects are not bit-portable across standard libraries, so only the
// mt19937_64 engine (whose output sequence the standard pins down) is used,
// and uniform/normal values are derived from it arithmetically.
//
// normal() draws a fresh Box-Muller pair every call and discards the second
// value: every call consumes exactly two engine outputs. Keeping the draw
// count fixed per call is what lets paired simulation runs (same seed,
// different control flags) see identical noise sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]; keeps log() finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 eng_;
};

} // namespace pantilt
