#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "invkit/fidelity.hpp"
#include "invkit/physics.hpp"
#include "invkit/priors.hpp"

namespace invkit {

struct ChainConfig {
  std::optional<double> step; // γ_L; auto = 0.5/L
  int iterations = 1000;
  std::optional<int> burn_in; // default 10% of iterations
  int thinning = 1;
  std::optional<Tensor> init; // default Aᵀy
  /// Multiplies the √(2γ) injected noise; 0 turns the chain into gradient descent.
  double noise_scale = 1.0;
  bool keep_samples = false;
  /// Called with (iteration, sample) for every retained sample.
  std::function<void(int, const Tensor&)> on_sample;
};

struct ChainStats {
  Tensor mean;
  Tensor variance; // unbiased, per pixel, real
  Index count = 0;
};

/// Single-pass (Welford) mean and variance.
class RunningStats {
public:
  void push(const Tensor& sample);
  Index count() const { return count_; }
  /// Throws ValidationError with fewer than two samples.
  ChainStats stats() const;

private:
  Index count_ = 0;
  Tensor mean_;
  Eigen::VectorXd m2_;
};

ChainStats chain_statistics(const std::vector<Tensor>& samples);

struct ChainResult {
  ChainStats stats;
  std::vector<Tensor> samples; // only with keep_samples
  double step = 0.0;
};

/// Unadjusted Langevin targeting p(x|y) ∝ exp(−f(y, Ax) − g(x)).
ChainResult ula_sample(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Prior& prior,
                       const ChainConfig& cfg, RngState& rng);

} // namespace invkit
