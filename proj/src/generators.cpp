#include "invkit/generators.hpp"

#include <algorithm>
#include <cmath>

namespace invkit {

Tensor gen_gaussian_kernel(double sigma, Index side) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian kernel: sigma must be > 0");
  if (side < 1 || side % 2 == 0) throw ValidationError("gaussian kernel: side must be odd, got " + std::to_string(side));
  Tensor k({side, side});
  auto plane = k.plane(0);
  const Index c = side / 2;
  for (Index i = 0; i < side; ++i)
    for (Index j = 0; j < side; ++j) {
      const double r2 = static_cast<double>((i - c) * (i - c) + (j - c) * (j - c));
      plane(i, j) = std::exp(-r2 / (2.0 * sigma * sigma));
    }
  k *= 1.0 / k.data().real().sum();
  return k;
}

Tensor gen_motion_kernel(Index length, RngState& rng) {
  if (length < 1) throw ValidationError("motion kernel: length must be >= 1");
  const Index side = 2 * length + 1;
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(side, side);
  Index i = length, j = length;
  grid(i, j) += 1.0;
  for (Index s = 0; s < length; ++s) {
    switch (rng.uniform_int(4)) {
    case 0: ++i; break;
    case 1: --i; break;
    case 2: ++j; break;
    default: --j; break;
    }
    grid(i, j) += 1.0;
  }
  Index r0 = side, r1 = -1, c0 = side, c1 = -1;
  for (Index a = 0; a < side; ++a)
    for (Index b = 0; b < side; ++b)
      if (grid(a, b) > 0.0) {
        r0 = std::min(r0, a);
        r1 = std::max(r1, a);
        c0 = std::min(c0, b);
        c1 = std::max(c1, b);
      }
  Index h = r1 - r0 + 1, w = c1 - c0 + 1;
  const Index hp = h % 2 ? h : h + 1, wp = w % 2 ? w : w + 1;
  Tensor k({hp, wp});
  k.plane(0).topLeftCorner(h, w) = grid.block(r0, c0, h, w).cast<cplx>();
  k *= 1.0 / k.data().real().sum();
  return k;
}

Tensor gen_bernoulli_mask(const Shape& shape, double density, RngState& rng) {
  if (!(density > 0.0 && density <= 1.0)) throw ValidationError("bernoulli mask: density must be in (0, 1]");
  Tensor m(shape);
  for (Index i = 0; i < m.size(); ++i) m[i] = rng.bernoulli(density) ? 1.0 : 0.0;
  return m;
}

Tensor gen_cartesian_mri_mask(const Shape& shape, double acceleration, double center_fraction, RngState& rng) {
  if (!(acceleration >= 1.0)) throw ValidationError("cartesian mask: acceleration must be >= 1");
  if (!(center_fraction >= 0.0 && center_fraction < 1.0))
    throw ValidationError("cartesian mask: center_fraction must be in [0, 1)");
  Tensor m(shape);
  const Index w = m.width();
  const double wd = static_cast<double>(w);
  const double center = center_fraction * wd;
  if (center > wd / acceleration)
    throw ValidationError("cartesian mask: center_fraction·W exceeds W/acceleration");
  const Index n_center = static_cast<Index>(std::ceil(center));
  const Index start = w / 2 - n_center / 2;
  const double prob = std::clamp((wd / acceleration - center) / (wd - center), 0.0, 1.0);
  std::vector<bool> on(static_cast<std::size_t>(w));
  for (Index j = 0; j < w; ++j) {
    const bool in_center = j >= start && j < start + n_center;
    const bool drawn = rng.bernoulli(prob);
    on[static_cast<std::size_t>(j)] = in_center || drawn;
  }
  for (Index p = 0; p < m.planes(); ++p) {
    auto plane = m.plane(p);
    for (Index j = 0; j < w; ++j)
      if (on[static_cast<std::size_t>(j)]) plane.col(j).setOnes();
  }
  return m;
}

} // namespace invkit
