#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace afdim {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic per-(a,b) stream seed. Monte-Carlo workers must never share a
// stream; they derive their own via (master, grid index, trial index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ splitmix64(a));
    s = splitmix64(s ^ splitmix64(b));
    return s;
}

// Seeded RNG with explicit Gaussian draws (Box-Muller, no cached state), so a
// stream's output sequence depends only on the seed and the call sequence.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // (0, 1]; safe as a log() argument
    double uniform_open() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
    }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // N(0, 1)
    double gaussian() {
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        return r * std::cos(2.0 * M_PI * uniform());
    }

    // circularly symmetric complex Gaussian, E|z|^2 = 1 (each component N(0, 1/2))
    std::complex<double> cgaussian() {
        const double r = std::sqrt(-std::log(uniform_open()));
        const double phi = 2.0 * M_PI * uniform();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace afdim
