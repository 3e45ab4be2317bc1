#pragma once

#include <cmath>
#include <cstdint>

namespace slowfast {

// splitmix64 step; used for seeding and for deriving per-path substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless mix of a seed with a salt, for deriving independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (salt * 0xd1342543de82ef95ULL + 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// xoshiro256++ with a Box-Muller normal sampler. The sequence is fixed by the
// algorithm itself, so streams are reproducible across platforms and builds;
// std::normal_distribution gives no such guarantee.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    // Substream for path `index` under a common experiment seed. Streams for
    // distinct indices are independent for all practical purposes, which makes
    // Monte Carlo results independent of path execution order.
    Rng(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t m = seed ^ (0x9e3779b97f4a7c15ULL + index * 0xd1342543de82ef95ULL);
        reseed(splitmix64(m));
    }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        have_spare_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0,1]; strictly positive so log() below is always finite.
    double next_uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on [a,b).
    double next_uniform(double a, double b) {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return a + (b - a) * u;
    }

    // Standard normal via Box-Muller with one cached spare.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform_pos();
        const double u2 = next_uniform_pos();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace slowfast
