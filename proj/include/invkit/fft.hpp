#pragma once

#include "invkit/tensor.hpp"

namespace invkit {

/// Centered orthonormal 2D DFT over the trailing two axes:
/// fftshift ∘ DFT ∘ ifftshift scaled by 1/√(HW). Output is Complex.
Tensor fft2c(const Tensor& t);
Tensor ifft2c(const Tensor& t);

Tensor fftshift2(const Tensor& t);
Tensor ifftshift2(const Tensor& t);

/// Unscaled, uncentered 1D transforms.
void fft1d(Eigen::Ref<Vector> v);
void ifft1d(Eigen::Ref<Vector> v);

} // namespace invkit
