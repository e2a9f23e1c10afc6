#include "invkit/rng.hpp"

#include <cmath>

namespace invkit {

namespace {
// Poisson inversion underflows for large means; larger means are split into
// chunks below this bound and summed.
constexpr double kPoissonChunk = 500.0;
// Above this mean the normal approximation is used.
constexpr double kPoissonNormalThreshold = 1e3;

double poisson_inversion(double mean, RngState& rng) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  double k = 0.0;
  while (u > cdf) {
    k += 1.0;
    p *= mean / k;
    cdf += p;
    if (p == 0.0 && k > mean) break;
  }
  return k;
}
} // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngState::RngState(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

double RngState::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngState::uniform_int(std::uint64_t n) {
  if (n == 0) throw ValidationError("uniform_int: empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

double RngState::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

double RngState::poisson(double mean) {
  if (!(mean >= 0.0)) throw DomainError("poisson: negative mean");
  if (mean == 0.0) return 0.0;
  if (mean > kPoissonNormalThreshold)
    return std::max(0.0, std::round(mean + std::sqrt(mean) * normal()));
  double total = 0.0;
  double remaining = mean;
  while (remaining > kPoissonChunk) {
    total += poisson_inversion(kPoissonChunk, *this);
    remaining -= kPoissonChunk;
  }
  return total + poisson_inversion(remaining, *this);
}

double RngState::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost: X ~ Gamma(k+1), X·U^(1/k) ~ Gamma(k).
    const double x = gamma(shape + 1.0);
    return x * std::pow(uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ (kGoldenGamma * (index + 1)));
}

RngState derive_child(std::uint64_t master_seed, std::uint64_t index) {
  return RngState(child_seed(master_seed, index));
}

Tensor randn(const Shape& shape, DType dtype, RngState& rng) {
  Tensor t(shape, dtype);
  if (dtype == DType::Real) {
    for (Index i = 0; i < t.size(); ++i) t[i] = rng.normal();
  } else {
    const double s = std::sqrt(0.5);
    for (Index i = 0; i < t.size(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      t[i] = cplx(s * re, s * im);
    }
  }
  return t;
}

Tensor rand_uniform(const Shape& shape, RngState& rng) {
  Tensor t(shape);
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform();
  return t;
}

} // namespace invkit
