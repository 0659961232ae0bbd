#ifndef QMH_RNG_HPP
#define QMH_RNG_HPP

/**
 * @file rng.hpp
 * @brief Counter-based random number generation (splitmix64) and seeded
 *        discrete sampling.
 *
 * The generator is splitmix64 used in counter mode: output k is
 * mix64(seed + (k+1)*GAMMA) with the standard golden-gamma increment and
 * finalizer.  Draws are a pure function of (seed, counter), so every result
 * in the library is reproducible from the single 64-bit seed recorded in the
 * run manifests, independent of platform or call interleaving.
 */

#include "qmh/types.hpp"

#include <cstdint>

namespace qmh {

/** splitmix64 in counter mode; each call advances the counter by one. */
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /** Next raw 64-bit output. */
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /** Uniform double in [0,1) with 53 random bits. */
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /** Derive an independent stream (seed for a sub-task), advancing this one. */
  std::uint64_t fork() { return next(); }

 private:
  std::uint64_t state_;
};

/**
 * Inverse-CDF draw from a finite distribution.
 * @param probs  nonnegative weights; must sum to ~1 (not re-normalized).
 * @param u      uniform variate in [0,1).
 * @return index i with cdf(i-1) <= u < cdf(i), clamped to the last index.
 */
inline Index sample_discrete(const Vector& probs, double u) {
  double cdf = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return i;
  }
  return probs.size() - 1;
}

/** Histogram of `shots` inverse-CDF draws from `probs`. */
inline Eigen::VectorXi sample_histogram(const Vector& probs, long shots,
                                        SplitMix64& rng) {
  Eigen::VectorXi hist = Eigen::VectorXi::Zero(probs.size());
  for (long s = 0; s < shots; ++s) hist[sample_discrete(probs, rng.uniform())]++;
  return hist;
}

}  // namespace qmh

#endif  // QMH_RNG_HPP
