#include "invkit/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "invkit/generators.hpp"
#include "invkit/priors.hpp"

namespace invkit {

Tensor disc_phantom(Index n) {
  if (n < 1) throw ValidationError("phantom size must be >= 1");
  Tensor x({n, n});
  const double c = 0.5 * static_cast<double>(n - 1), r = 0.3 * static_cast<double>(n);
  auto p = x.plane(0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      if (di * di + dj * dj <= r * r) p(i, j) = 1.0;
    }
  return x;
}

Tensor shepp_phantom(Index n) {
  if (n < 1) throw ValidationError("phantom size must be >= 1");
  // intensity, semi-axes (a, b), center (x0, y0), rotation in degrees
  struct Ellipse {
    double value, a, b, x0, y0, phi;
  };
  static const Ellipse ellipses[] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},        {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},       {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},     {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},   {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  Tensor x({n, n});
  auto p = x.plane(0);
  for (Index i = 0; i < n; ++i) {
    const double yv = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    for (Index j = 0; j < n; ++j) {
      const double xv = 2.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(n) - 1.0;
      double v = 0.0;
      for (const auto& e : ellipses) {
        const double phi = e.phi * std::numbers::pi / 180.0;
        const double dx = xv - e.x0, dy = yv - e.y0;
        const double u = dx * std::cos(phi) + dy * std::sin(phi);
        const double w = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((u * u) / (e.a * e.a) + (w * w) / (e.b * e.b) <= 1.0) v += e.value;
      }
      p(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return x;
}

Tensor random_smooth_phantom(Index n, RngState& rng) {
  if (n < 1) throw ValidationError("phantom size must be >= 1");
  const double sigma = std::max(1.0, static_cast<double>(n) / 16.0);
  Index side = 2 * static_cast<Index>(std::ceil(3.0 * sigma)) + 1;
  if (side > n) side = n % 2 ? n : n - 1;
  const Tensor smooth = convolve_circular(randn({n, n}, DType::Real, rng), gen_gaussian_kernel(sigma, side));
  const Eigen::VectorXd v = smooth.real();
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  if (hi == lo) return Tensor({n, n});
  return Tensor::from_real({n, n}, (v.array() - lo) / (hi - lo));
}

} // namespace invkit
