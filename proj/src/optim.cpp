#include "invkit/optim.hpp"

#include <cmath>

namespace invkit {

namespace {

double relative_change(const Tensor& next, const Tensor& prev) {
  return norm(next - prev) / std::max(norm(prev), 1e-12);
}

Tensor initial_estimate(const Tensor& y, const Physics& physics, const AlgoConfig& cfg) {
  if (cfg.zero_init) return Tensor(physics.domain().shape, physics.domain().dtype);
  return physics.adjoint(y);
}

double squared_operator_norm(const Physics& physics) {
  RngState rng(0);
  const double n = operator_norm(physics.map(), rng).value;
  return n * n;
}

void check_config(const AlgoConfig& cfg) {
  if (cfg.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(cfg.tol >= 0.0)) throw ValidationError("tol must be >= 0");
  if (cfg.step && !(*cfg.step > 0.0)) throw ValidationError("step must be > 0");
}

void require_l2(const DataFidelity& fid, const char* algo) {
  if (fid.kind != DataFidelity::Kind::L2)
    throw CapabilityError(std::string(algo) + " requires the l2 fidelity, got " + to_string(fid.kind));
}

// Step for the forward-backward schemes: 0.9/L by default, and an explicit
// step must stay below 2/L.
double gradient_step(const Tensor& y, const Physics& physics, const DataFidelity& fid, const AlgoConfig& cfg,
                     const char* algo) {
  if (!is_smooth(fid))
    throw CapabilityError(std::string(algo) + " needs a smooth fidelity, got " + to_string(fid.kind));
  const double lip = squared_operator_norm(physics) * lipschitz(fid, y);
  if (cfg.step) {
    if (lip > 0.0 && *cfg.step >= 2.0 / lip)
      throw ValidationError(std::string(algo) + ": step " + std::to_string(*cfg.step) + " is not below 2/L = " +
                            std::to_string(2.0 / lip));
    return *cfg.step;
  }
  return lip > 0.0 ? 0.9 / lip : 1.0;
}

Tensor data_gradient(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Tensor& x) {
  return physics.adjoint(fidelity_grad(fid, y, physics.apply(x)));
}

// Shared bookkeeping: records the iterate change and objective, runs the
// monitor and returns true when the tolerance is met.
struct Tracker {
  const Tensor& y;
  const Physics& physics;
  const DataFidelity& fid;
  const Regularizer& reg;
  const AlgoConfig& cfg;
  ConvergenceLog log;

  bool step(int k, double change, const Tensor& estimate) {
    log.iterations = k;
    log.iterate_change.push_back(change);
    if (cfg.record_objective) log.objective.push_back(objective(y, physics, fid, reg, estimate));
    if (!std::isfinite(change) || !all_finite(estimate))
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(k));
    if (cfg.monitor) cfg.monitor(k, estimate);
    if (change < cfg.tol) {
      log.converged = true;
      log.stop_reason = "tolerance";
      return true;
    }
    return false;
  }

  ConvergenceLog finish() {
    if (!log.converged) log.stop_reason = "max_iter";
    return std::move(log);
  }
};

} // namespace

std::string to_string(Algorithm a) {
  switch (a) {
  case Algorithm::Pgd: return "pgd";
  case Algorithm::Fista: return "fista";
  case Algorithm::Admm: return "admm";
  case Algorithm::Drs: return "drs";
  case Algorithm::Pdhg: return "pdhg";
  }
  return "fista";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::Pgd, Algorithm::Fista, Algorithm::Admm, Algorithm::Drs, Algorithm::Pdhg})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown algorithm '" + name + "'");
}

double objective(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                 const Tensor& x) {
  double value = fidelity_eval(fid, y, physics.apply(x));
  if (const auto* p = std::get_if<Prior>(&reg)) value += prior_eval(*p, x);
  return value;
}

Tensor regularizer_prox(const Regularizer& reg, const Tensor& v, double gamma) {
  if (const auto* p = std::get_if<Prior>(&reg)) return prior_prox(*p, v, gamma);
  if (const auto* d = std::get_if<PnpDenoiser>(&reg)) return denoise(d->denoiser, v, d->sigma);
  return v;
}

Reconstruction pgd(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                   const AlgoConfig& cfg) {
  check_config(cfg);
  const double gamma = gradient_step(y, physics, fid, cfg, "pgd");
  Tracker track{y, physics, fid, reg, cfg, {}};
  Tensor x = initial_estimate(y, physics, cfg);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Tensor next = regularizer_prox(reg, x - gamma * data_gradient(y, physics, fid, x), gamma);
    const double change = relative_change(next, x);
    x = std::move(next);
    if (track.step(k, change, x)) break;
  }
  return {std::move(x), track.finish()};
}

Reconstruction fista(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                     const AlgoConfig& cfg) {
  check_config(cfg);
  const double gamma = gradient_step(y, physics, fid, cfg, "fista");
  Tracker track{y, physics, fid, reg, cfg, {}};
  Tensor x = initial_estimate(y, physics, cfg);
  Tensor z = x;
  double t = 1.0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Tensor next = regularizer_prox(reg, z - gamma * data_gradient(y, physics, fid, z), gamma);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - x);
    t = t_next;
    const double change = relative_change(next, x);
    x = std::move(next);
    if (track.step(k, change, x)) break;
  }
  return {std::move(x), track.finish()};
}

Reconstruction admm(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                    const AlgoConfig& cfg) {
  check_config(cfg);
  require_l2(fid, "admm");
  if (!(cfg.rho > 0.0)) throw ValidationError("admm: rho must be > 0");
  const double rho = cfg.rho;
  Tracker track{y, physics, fid, reg, cfg, {}};
  Tensor v = initial_estimate(y, physics, cfg);
  Tensor u = v.zeros_like();
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Tensor x = tikhonov_solve(physics.map(), y, v - u, rho / fid.weight, cfg.inner);
    Tensor v_next = regularizer_prox(reg, x + u, 1.0 / rho);
    u += x - v_next;
    const double change =
        std::max(norm(x - v_next), rho * norm(v_next - v)) / std::max(norm(x), 1e-12);
    v = std::move(v_next);
    if (track.step(k, change, v)) break;
  }
  return {std::move(v), track.finish()};
}

Reconstruction drs(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                   const AlgoConfig& cfg) {
  check_config(cfg);
  require_l2(fid, "drs");
  double gamma = 1.0;
  if (cfg.step) {
    gamma = *cfg.step;
  } else {
    const double lip = squared_operator_norm(physics) * fid.weight;
    if (lip > 0.0) gamma = 1.0 / lip;
  }
  const auto prox_data = [&](const Tensor& z) {
    return tikhonov_solve(physics.map(), y, z, 1.0 / (gamma * fid.weight), cfg.inner);
  };
  Tracker track{y, physics, fid, reg, cfg, {}};
  Tensor z = initial_estimate(y, physics, cfg);
  Tensor x = prox_data(z);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Tensor z_next = z + (regularizer_prox(reg, 2.0 * x - z, gamma) - x);
    const double change = relative_change(z_next, z);
    z = std::move(z_next);
    x = prox_data(z);
    if (track.step(k, change, x)) break;
  }
  return {std::move(x), track.finish()};
}

Reconstruction pdhg(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                    const AlgoConfig& cfg) {
  check_config(cfg);
  const double op_norm = std::sqrt(squared_operator_norm(physics));
  const double base = op_norm > 0.0 ? 0.99 / op_norm : 1.0;
  const double tau = cfg.tau.value_or(base);
  const double sig = cfg.sigma_dual.value_or(base);
  if (!(tau > 0.0) || !(sig > 0.0)) throw ValidationError("pdhg: steps must be > 0");
  if (tau * sig * op_norm * op_norm >= 1.0)
    throw ValidationError("pdhg: tau·sigma·‖A‖² = " + std::to_string(tau * sig * op_norm * op_norm) +
                          " must be < 1");

  Tracker track{y, physics, fid, reg, cfg, {}};
  Tensor x = initial_estimate(y, physics, cfg);
  Tensor x_bar = x;
  Tensor u(physics.range().shape, physics.range().dtype);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Tensor w = u + sig * physics.apply(x_bar);
    u = w - sig * fidelity_prox(fid, y, (1.0 / sig) * w, 1.0 / sig);
    Tensor next = regularizer_prox(reg, x - tau * physics.adjoint(u), tau);
    x_bar = 2.0 * next - x;
    const double change = relative_change(next, x);
    x = std::move(next);
    if (track.step(k, change, x)) break;
  }
  return {std::move(x), track.finish()};
}

Reconstruction reconstruct(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                           const AlgoConfig& cfg) {
  switch (cfg.algorithm) {
  case Algorithm::Pgd: return pgd(y, physics, fid, reg, cfg);
  case Algorithm::Fista: return fista(y, physics, fid, reg, cfg);
  case Algorithm::Admm: return admm(y, physics, fid, reg, cfg);
  case Algorithm::Drs: return drs(y, physics, fid, reg, cfg);
  case Algorithm::Pdhg: return pdhg(y, physics, fid, reg, cfg);
  }
  return fista(y, physics, fid, reg, cfg);
}

Tensor artifact_removal(const Denoiser& denoiser, const Tensor& y, const Physics& physics, double sigma,
                        BackprojectionMode mode) {
  Tensor back;
  if (mode == BackprojectionMode::Adjoint)
    back = physics.adjoint(y);
  else if (std::holds_alternative<TomographyParams>(physics.params()))
    back = fbp(physics, y);
  else
    back = pinv_apply(physics.map(), y);
  return denoise(denoiser, back, sigma);
}

} // namespace invkit
