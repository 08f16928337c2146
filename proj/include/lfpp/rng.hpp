#pragma once

#include <cmath>
#include <cstdint>

namespace lfpp::rng {

// Deterministic RNG stack.  We do not use <random> distributions: their
// outputs are implementation-defined, which would break the bit-identical
// reproducibility contract.  Everything below is fixed arithmetic.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer; also the stream-splitting mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Substream derivation: a master seed plus up to three stream coordinates
/// (module id, band/slab index, replica index).  Fixed scheme so replicas
/// can be generated independently and in parallel.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t module_id,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(master ^ (module_id * 0xd6e8feb86659fd93ULL));
    h = splitmix64(h ^ (a * 0xa0761d6478bd642fULL));
    h = splitmix64(h ^ (b * 0xe7037ed1a0b428dbULL));
    return h;
}

/// Module ids used in substream derivation (stable across versions).
enum class ModuleId : std::uint64_t {
    EtaField = 1,
    DgffExact = 2,
    DgffBand = 3,
    Crossing = 4,
    Lqg = 5,
    Experiment = 6,
};

/// xoshiro256++ -- small, fast, well-understood sequential generator.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) word = splitmix64(x++);
    }

    std::uint64_t next() {
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

    /// Uniform in (0,1): 53 mantissa bits, offset to exclude 0.
    double uniform() { return to_unit(next()); }

    /// Standard normal via Box-Muller (first of the pair; the mate is cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    static double to_unit(std::uint64_t bits) {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Counter-based standard normal: a pure function of (stream, i, j).
/// Lets field evaluators draw lattice noise at arbitrary sites in any
/// order (or from several threads) with identical results.
inline double normal_at(std::uint64_t stream, std::int64_t i, std::int64_t j) {
    std::uint64_t h = splitmix64(stream ^ (static_cast<std::uint64_t>(i) * 0x8ebc6af09c88c6e3ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(j) * 0x589965cc75374cc3ULL));
    const double u1 = Xoshiro256pp::to_unit(h);
    const double u2 = Xoshiro256pp::to_unit(splitmix64(h));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace lfpp::rng
