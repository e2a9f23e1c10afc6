#pragma once

#include <string>

#include "invkit/tensor.hpp"

namespace invkit {

/// sign(v)·max(|v| − τ, 0); complex entries shrink in magnitude, keep phase.
Tensor soft_threshold(const Tensor& v, double tau);

/// Orthonormal 2D Haar transform with `levels` levels, in the usual nested
/// layout (coarse approximation in the top-left corner). H and W must be
/// divisible by 2^levels.
Tensor haar_dwt(const Tensor& x, int levels);
Tensor haar_idwt(const Tensor& coeffs, int levels);

/// Forward differences with replicate boundary; returns (Dy, Dx) stacked as
/// [2, ...shape].
Tensor image_gradient(const Tensor& x);
/// −(image_gradient)ᵀ.
Tensor image_divergence(const Tensor& g);

/// Σ √(|Dy|² + |Dx|² + ε²).
double tv_value(const Tensor& x, double epsilon = 0.0);

struct TvProxOptions {
  int max_iter = 500;
  double tol = 1e-6;
};

/// argmin_z γ·TV(z) + ½‖z − v‖² by accelerated projected gradient on the dual
/// with step 1/8 and momentum restart.
Tensor tv_prox(const Tensor& v, double gamma, TvProxOptions opts = {});

/// Regularizer g, scaled by `weight`.
struct Prior {
  enum class Kind { Tv, WaveletL1, L1, Tikhonov };

  Kind kind = Kind::Tv;
  double weight = 1.0;
  double tv_epsilon = 0.0; // 0 = exact nonsmooth TV
  int levels = 1;          // wavelet_l1
  TvProxOptions tv_opts{};

  static Prior tv(double weight = 1.0, double epsilon = 0.0) {
    Prior p;
    p.kind = Kind::Tv;
    p.weight = weight;
    p.tv_epsilon = epsilon;
    return p;
  }
  static Prior wavelet_l1(double weight = 1.0, int levels = 1) {
    Prior p;
    p.kind = Kind::WaveletL1;
    p.weight = weight;
    p.levels = levels;
    return p;
  }
  static Prior l1(double weight = 1.0) {
    Prior p;
    p.kind = Kind::L1;
    p.weight = weight;
    return p;
  }
  static Prior tikhonov(double weight = 1.0) {
    Prior p;
    p.kind = Kind::Tikhonov;
    p.weight = weight;
    return p;
  }
};

/// Smoothing used by prior_grad for TV when tv_epsilon is 0.
inline constexpr double kDefaultTvGradEpsilon = 1e-8;

std::string to_string(Prior::Kind kind);
Prior::Kind prior_kind_from_string(const std::string& name);

bool has_gradient(const Prior& p);
/// Lipschitz constant of ∇g (tikhonov: λ; smoothed TV: 8λ/ε).
double prior_lipschitz(const Prior& p);

double prior_eval(const Prior& p, const Tensor& x);
Tensor prior_grad(const Prior& p, const Tensor& x);
/// argmin_z γ·g(z) + ½‖z − v‖².
Tensor prior_prox(const Prior& p, const Tensor& v, double gamma);

/// Classical stand-ins for a learned denoiser D_σ.
struct Denoiser {
  enum class Kind { GaussianSmoother, Tv, Median };

  Kind kind = Kind::GaussianSmoother;
  double window_sigma = 1.5; // gaussian_smoother, independent of σ
  double tv_lambda = 1.0;    // tv: prox strength σ²·λ

  static Denoiser gaussian_smoother(double window_sigma = 1.5) {
    return {Kind::GaussianSmoother, window_sigma, 1.0};
  }
  static Denoiser tv(double lambda = 1.0) { return {Kind::Tv, 1.5, lambda}; }
  static Denoiser median() { return {Kind::Median, 1.5, 1.0}; }
};

std::string to_string(Denoiser::Kind kind);
Denoiser::Kind denoiser_kind_from_string(const std::string& name);

Tensor denoise(const Denoiser& d, const Tensor& v, double sigma);

/// Circular convolution of every plane with an odd-sided kernel centered at
/// (kh/2, kw/2), computed in the spatial domain.
Tensor convolve_circular(const Tensor& x, const Tensor& kernel);

} // namespace invkit
