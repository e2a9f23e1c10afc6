#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "invkit/optim.hpp"
#include "invkit/transforms.hpp"

namespace invkit {

struct LossValue {
  double value = 0.0;
  std::map<std::string, double> components;
  int samples_used = 1;
};

/// Per-element mean of |x̂ − x|².
LossValue sup_mse(const Tensor& x_hat, const Tensor& x);

struct SureOptions {
  int probes = 1;
  /// Finite-difference step; default 0.01·max|y| with floor 1e-6.
  std::optional<double> probe_step;
};

/// Gaussian SURE of a denoiser, evaluated on identity physics:
/// (1/n)‖D(y) − y‖² − σ² + (2σ²/n)·div, div estimated with Rademacher probes.
/// Components: residual, -sigma2, divergence.
LossValue sure_gaussian(const Reconstructor& model, const Tensor& y, double sigma, RngState& rng,
                        SureOptions opts = {});

/// Recorrupted-to-recorrupted: w ~ N(0, σ²I), y₁ = y + αw, y₂ = y − w/α,
/// loss = mean over draws of (1/m)‖A R(y₁) − y₂‖².
LossValue r2r_gaussian(const Reconstructor& model, const Tensor& y, const Physics& physics, double sigma,
                       RngState& rng, double alpha = 0.5, int draws = 1);

/// Measurement splitting for masked physics: reconstruct from a Bernoulli(q)
/// subset of the observed entries, score the held-out ones.
LossValue splitting_loss(const Reconstructor& model, const Tensor& y, const Physics& physics, RngState& rng,
                         double split_ratio = 0.9);

using GroupSampler = std::function<GroupElement(RngState&)>;

/// Equivariant imaging: x₂ = T_g R(y), loss = (1/n)‖R(A x₂) − x₂‖².
LossValue ei_loss(const Reconstructor& model, const Tensor& y, const Physics& physics, const GroupSampler& sampler,
                  RngState& rng);

} // namespace invkit
