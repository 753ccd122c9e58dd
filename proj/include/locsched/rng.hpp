#pragma once

#include "locsched/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace locsched {

using Rng = std::mt19937_64;

/// Derives an independent stream key from a seed and a tuple of identifiers.
/// The same (seed, ids) always yields the same key, so work split across
/// threads draws exactly the numbers a serial loop would.
std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  return Rng(stream_key(seed, ids));
}

/// Draws L * z with z ~ N(0, I); L is a lower Cholesky factor.
Vec sample_gaussian(Rng& rng, const Mat& chol_lower);

/// Uniform draw in [0, 1).
double uniform01(Rng& rng);

/// Lower Cholesky factor of a PSD matrix; zero rows/cols are allowed.
Mat psd_sqrt(const Mat& cov);

}  // namespace locsched
