#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "invkit/tensor.hpp"

namespace invkit {

/// 0x9E3779B97F4A7C15, the 64-bit golden-ratio increment used by splitmix64.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x);

/// Explicit, single-owner random stream.
///
/// Every stochastic operation in the library takes one of these by reference;
/// nothing reads a global generator. The engine (mt19937_64) and all samplers
/// below are fully specified, so draws do not depend on the standard library.
class RngState {
public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }
  bool bernoulli(double p) { return uniform() < p; }
  double poisson(double mean);
  /// Gamma(shape, scale = 1).
  double gamma(double shape);

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// child = splitmix64(master ^ kGoldenGamma·(index + 1)).
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index);
RngState derive_child(std::uint64_t master_seed, std::uint64_t index);

/// Standard normal entries; complex entries have E|z|² = 1.
Tensor randn(const Shape& shape, DType dtype, RngState& rng);
Tensor rand_uniform(const Shape& shape, RngState& rng);

} // namespace invkit
