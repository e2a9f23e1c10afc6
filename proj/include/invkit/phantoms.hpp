#pragma once

#include "invkit/rng.hpp"
#include "invkit/tensor.hpp"

namespace invkit {

/// 1 inside the circle of radius 0.3·n centered at ((n−1)/2, (n−1)/2), 0 outside.
Tensor disc_phantom(Index n);

/// Piecewise-constant ellipse phantom in the style of the modified
/// Shepp-Logan head, clipped to [0, 1].
Tensor shepp_phantom(Index n);

/// Gaussian-smoothed white noise rescaled to [0, 1].
Tensor random_smooth_phantom(Index n, RngState& rng);

} // namespace invkit
