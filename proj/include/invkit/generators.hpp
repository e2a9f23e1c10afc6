#pragma once

#include "invkit/rng.hpp"
#include "invkit/tensor.hpp"

namespace invkit {

/// Sampled isotropic Gaussian on an odd side×side grid, normalized to sum 1.
Tensor gen_gaussian_kernel(double sigma, Index side);

/// L-step unit random walk rasterized on a (2L+1)² grid, normalized, cropped
/// to its bounding box and zero-padded (bottom/right) to odd sides.
Tensor gen_motion_kernel(Index length, RngState& rng);

/// i.i.d. Bernoulli(p) binary mask.
Tensor gen_bernoulli_mask(const Shape& shape, double density, RngState& rng);

/// Cartesian column mask: ⌈cW⌉ center columns always sampled, every other
/// column with probability (W/R − cW)/(W − cW).
Tensor gen_cartesian_mri_mask(const Shape& shape, double acceleration, double center_fraction, RngState& rng);

} // namespace invkit
