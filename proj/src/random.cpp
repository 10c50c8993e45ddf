#include "ocr/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ocr {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32), 0x6f637231u};
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {
  auto seq = make_seed_seq(seed, stream_id);
  engine_.seed(seq);
}

double RandomSource::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1
  const std::uint64_t k = engine_() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RandomSource::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(phi);
  has_cached_ = true;
  return r * std::cos(phi);
}

Vector RandomSource::standard_normal(Eigen::Index n) {
  if (n < 1) {
    throw Error(ErrorCode::InvalidArgument, "standard_normal needs n >= 1, got " + std::to_string(n));
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Matrix RandomSource::standard_normal(Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::InvalidArgument, "standard_normal needs a non-empty shape");
  }
  // filled row by row so the draw order matches observation order
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

}  // namespace ocr
