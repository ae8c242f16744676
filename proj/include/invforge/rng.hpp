#pragma once

#include <cstdint>
#include <optional>

#include <boost/random/independent_bits.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "invforge/rational.hpp"

namespace invforge {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for the stream tagged by (seed, a, b); used so that every trial and
// every stage owns an independent reproducible generator.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform on [0, n).
    std::uint64_t below(std::uint64_t n) {
        return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
    }

    BigInt below(const BigInt& n) {
        if (n <= std::numeric_limits<std::uint64_t>::max()) return BigInt(below(static_cast<std::uint64_t>(n)));
        if (!big_) big_.emplace(eng_());
        return boost::random::uniform_int_distribution<BigInt>(0, n - 1)(*big_);
    }

    bool coin(const Rational& p) {
        if (p <= 0) return false;
        if (p >= 1) return true;
        return below(BigInt(denominator(p))) < BigInt(numerator(p));
    }

    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

private:
    using BigEngine = boost::random::independent_bits_engine<boost::random::mt19937_64, 64, BigInt>;
    boost::random::mt19937_64 eng_;
    std::optional<BigEngine> big_;
};

}  // namespace invforge
