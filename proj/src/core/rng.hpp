#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace qmc {

// Hand-rolled generator so sampled values are bit-identical across platforms
// and independent of the standard library's distribution implementations.
// splitmix64 core; sub-streams derived by salting keep parallel work
// deterministic regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) {  // [0, n)
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Box-Muller, no cached spare: two u64 draws per sample.
    double gaussian() {
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::complex<double> complex_gaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return {re, im};
    }

    // Independent sub-stream for task `salt`; detached from this stream's state.
    Rng derive(std::uint64_t salt) const {
        Rng r(state_ ^ (0x9e3779b97f4a7c15ULL * (salt + 0x51ed270b0a9cfd5bULL)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
};

}  // namespace qmc
