#include "invkit/sampling.hpp"

#include <cmath>

#include "invkit/solvers.hpp"

namespace invkit {

void RunningStats::push(const Tensor& sample) {
  if (count_ == 0) {
    mean_ = sample.zeros_like();
    m2_ = Eigen::VectorXd::Zero(sample.size());
  } else {
    require_same_shape(mean_, sample, "chain statistics");
  }
  ++count_;
  const Vector delta = sample.data() - mean_.data();
  mean_.data() += delta / static_cast<double>(count_);
  m2_.array() += (delta.conjugate().array() * (sample.data() - mean_.data()).array()).real();
}

ChainStats RunningStats::stats() const {
  if (count_ < 2) throw ValidationError("chain statistics need at least 2 samples, got " + std::to_string(count_));
  ChainStats s;
  s.mean = mean_;
  s.variance = Tensor::from_real(mean_.shape(), (m2_ / static_cast<double>(count_ - 1)).cwiseMax(0.0));
  s.count = count_;
  return s;
}

ChainStats chain_statistics(const std::vector<Tensor>& samples) {
  RunningStats rs;
  for (const auto& s : samples) rs.push(s);
  return rs.stats();
}

ChainResult ula_sample(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Prior& prior,
                       const ChainConfig& cfg, RngState& rng) {
  if (!is_smooth(fid)) throw CapabilityError("ula needs a smooth fidelity, got " + to_string(fid.kind));
  if (!has_gradient(prior)) throw CapabilityError("ula needs a smooth prior, got " + to_string(prior.kind));
  if (cfg.iterations < 1) throw ValidationError("ula: iterations must be >= 1");
  if (cfg.thinning < 1) throw ValidationError("ula: thinning must be >= 1");
  const int burn_in = cfg.burn_in.value_or(cfg.iterations / 10);
  if (burn_in < 0 || burn_in >= cfg.iterations) throw ValidationError("ula: burn_in must lie in [0, iterations)");
  if ((cfg.iterations - burn_in) / cfg.thinning < 2)
    throw ValidationError("ula: fewer than 2 retained samples with this burn_in/thinning");

  RngState norm_rng(0);
  const double op = operator_norm(physics.map(), norm_rng).value;
  const double lip = op * op * lipschitz(fid, y) + prior_lipschitz(prior);
  double gamma = cfg.step.value_or(lip > 0.0 ? 0.5 / lip : 1e-2);
  if (!(gamma > 0.0)) throw ValidationError("ula: step must be > 0");
  if (lip > 0.0 && gamma >= 1.0 / lip)
    throw ValidationError("ula: step " + std::to_string(gamma) + " is not below 1/L = " + std::to_string(1.0 / lip));

  Tensor x = cfg.init ? *cfg.init : physics.adjoint(y);
  // Complex entries are two real coordinates, each needing unit variance.
  const double noise_amp = cfg.noise_scale * std::sqrt(2.0 * gamma) * (x.is_complex() ? std::sqrt(2.0) : 1.0);
  ChainResult result;
  result.step = gamma;
  RunningStats rs;
  for (int t = 1; t <= cfg.iterations; ++t) {
    Tensor drift = physics.adjoint(fidelity_grad(fid, y, physics.apply(x))) + prior_grad(prior, x);
    x -= gamma * drift;
    if (noise_amp != 0.0) x += noise_amp * randn(x.shape(), x.dtype(), rng);
    if (!all_finite(x)) throw DivergenceError("ula diverged at iteration " + std::to_string(t));
    if (t > burn_in && (t - burn_in) % cfg.thinning == 0) {
      rs.push(x);
      if (cfg.keep_samples) result.samples.push_back(x);
      if (cfg.on_sample) cfg.on_sample(t, x);
    }
  }
  result.stats = rs.stats();
  return result;
}

} // namespace invkit
