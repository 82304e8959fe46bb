#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace bca {

// SplitMix64 finalizer. Stateless bit mixer used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a path of tags
// (stream names, dataset indices, ...). The derivation is a pure hash, so
// substreams can be created in any order, from any thread, with identical
// results.
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> path);

// xoshiro256++ generator. Every stochastic routine in this library draws
// from this generator (never from std:: distributions), so that output is
// bit-reproducible for a given seed regardless of platform, standard
// library, or how work is scheduled across threads.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on the open interval (0,1), 53-bit resolution. Never returns
    // 0 or 1, so it is safe to feed through inverse CDFs.
    double next_double();

    // Uniform on (lo, hi).
    double next_double(double lo, double hi);

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi);

    // Standard normal via the inverse CDF (one uniform per draw).
    double next_normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j =
                static_cast<std::size_t>(next_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t s_[4];
};

}  // namespace bca
