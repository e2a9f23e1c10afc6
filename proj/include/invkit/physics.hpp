#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "invkit/fidelity.hpp"
#include "invkit/linear_map.hpp"

namespace invkit {

struct DenoisingParams {
  Shape shape;
};

struct InpaintingParams {
  Tensor mask;
};

struct BlurParams {
  Tensor kernel; // [kh, kw], odd sides
  Shape shape;
};

struct DownsamplingParams {
  Index factor = 1;
  double antialias_sigma = 0.0;
  Shape shape;
};

struct MriParams {
  Tensor mask; // k-space mask, same shape as the image
};

struct TomographyParams {
  std::vector<double> angles_deg;
  Index size = 0; // image is size×size
};

struct CompressedSensingParams {
  Index measurements = 0;
  Shape shape;
  std::uint64_t seed = 0;
  Eigen::MatrixXd matrix; // regenerated from seed when empty
};

using PhysicsParams = std::variant<DenoisingParams, InpaintingParams, BlurParams, DownsamplingParams, MriParams,
                                   TomographyParams, CompressedSensingParams>;

/// Stable identifier of a params variant ("blur", "mri", ...).
std::string descriptor_of(const PhysicsParams& params);

/// ⌈H√2⌉ rounded up to odd.
Index tomography_detector_count(Index size);

/// A forward operator A_ξ bundled with its parameters ξ and noise model N_σ.
class Physics {
public:
  explicit Physics(PhysicsParams params, NoiseModel noise = {});

  const LinearMap& map() const { return map_; }
  const PhysicsParams& params() const { return params_; }
  const NoiseModel& noise() const { return noise_; }
  std::string descriptor() const { return descriptor_of(params_); }

  const Space& domain() const { return map_.domain(); }
  const Space& range() const { return map_.range(); }

  Tensor apply(const Tensor& x) const { return map_.apply(x); }
  Tensor adjoint(const Tensor& u) const { return map_.adjoint(u); }
  /// noise(A(x)).
  Tensor forward(const Tensor& x, RngState& rng) const;

  Physics with_noise(NoiseModel noise) const { return Physics(params_, noise); }

  /// Inpainting and MRI carry a pixelwise mask.
  bool is_maskable() const;
  const Tensor& mask() const;
  Physics with_mask(const Tensor& mask) const;

private:
  PhysicsParams params_;
  NoiseModel noise_;
  LinearMap map_;
};

Physics make_denoising(const Shape& shape, NoiseModel noise = {});
Physics make_inpainting(const Tensor& mask, NoiseModel noise = {});
/// Circular convolution diagonalized by fft2c.
Physics make_blur(const Tensor& kernel, const Shape& image_shape, NoiseModel noise = {});
/// Gaussian anti-alias blur (side 4⌈σ⌉+1) followed by keeping every factor-th pixel.
Physics make_downsampling(Index factor, double antialias_sigma, const Shape& image_shape, NoiseModel noise = {});
/// x ↦ m ⊙ fft2c(x) on complex images.
Physics make_mri(const Tensor& mask, NoiseModel noise = {});
/// Pixel-driven parallel-beam Radon transform with bilinear detector splitting.
Physics make_tomography(const std::vector<double>& angles_deg, Index size, NoiseModel noise = {});
/// Dense Gaussian matrix with N(0, 1/m) entries on the flattened image.
Physics make_compressed_sensing(Index measurements, const Shape& image_shape, RngState& rng, NoiseModel noise = {});

/// Ram-Lak filtered backprojection scaled by π/(2·angles).
Tensor fbp(const Physics& tomography, const Tensor& sinogram);

/// num uniformly spaced angles on [0, 180).
std::vector<double> uniform_angles(Index num);

} // namespace invkit
