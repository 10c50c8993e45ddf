#pragma once

#include <cstdint>
#include <random>

#include "ocr/numerics.hpp"

namespace ocr {

/// Reproducible random stream keyed by (seed, stream-id).
///
/// Single owner; concurrent work derives its own source with a distinct
/// stream id instead of sharing one.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// One N(0, 1) draw (Box-Muller, the second variate is cached).
  double normal();
  Vector standard_normal(Eigen::Index n);
  Matrix standard_normal(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ocr
