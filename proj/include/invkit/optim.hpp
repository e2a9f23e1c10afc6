#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "invkit/fidelity.hpp"
#include "invkit/physics.hpp"
#include "invkit/priors.hpp"
#include "invkit/solvers.hpp"

namespace invkit {

/// A denoiser standing in for the prior's proximal operator (plug-and-play).
struct PnpDenoiser {
  Denoiser denoiser;
  double sigma = 0.05;
};

/// g in min f(y, Ax) + g(x): none, an explicit prior, or a PnP denoiser.
using Regularizer = std::variant<std::monostate, Prior, PnpDenoiser>;

enum class Algorithm { Pgd, Fista, Admm, Drs, Pdhg };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct AlgoConfig {
  Algorithm algorithm = Algorithm::Fista;
  int max_iter = 500;
  std::optional<double> step; // γ; auto when empty
  double rho = 1.0;           // admm penalty
  std::optional<double> tau;  // pdhg primal step
  std::optional<double> sigma_dual;
  double tol = 1e-6;
  bool record_objective = false;
  bool zero_init = false;
  SolverOptions inner{1e-10, 1000};
  /// Called after every iteration with (iteration, current estimate).
  std::function<void(int, const Tensor&)> monitor;
};

struct ConvergenceLog {
  std::vector<double> objective; // filled when record_objective
  std::vector<double> iterate_change;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

struct Reconstruction {
  Tensor x;
  ConvergenceLog log;
};

/// f(y, Ax) + g(x); a PnP regularizer contributes 0.
double objective(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                 const Tensor& x);

/// argmin_z γ·g(z) + ½‖z − v‖², or D_σ(v) for a PnP regularizer.
Tensor regularizer_prox(const Regularizer& reg, const Tensor& v, double gamma);

Reconstruction pgd(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                   const AlgoConfig& cfg = {});
Reconstruction fista(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                     const AlgoConfig& cfg = {});
/// Scaled-form ADMM on x = v; returns v. Requires the l2 fidelity.
Reconstruction admm(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                    const AlgoConfig& cfg = {});
/// Douglas-Rachford with relaxation 1; returns prox_{γf∘A}(z). Requires l2.
Reconstruction drs(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                   const AlgoConfig& cfg = {});
/// Chambolle-Pock; the only algorithm accepting a nonsmooth fidelity.
Reconstruction pdhg(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                    const AlgoConfig& cfg = {});

/// Dispatches on cfg.algorithm.
Reconstruction reconstruct(const Tensor& y, const Physics& physics, const DataFidelity& fid, const Regularizer& reg,
                           const AlgoConfig& cfg = {});

enum class BackprojectionMode { Adjoint, Pinv };

/// denoise(Aᵀy, σ) or denoise(A⁺y, σ); tomography uses fbp for A⁺.
Tensor artifact_removal(const Denoiser& denoiser, const Tensor& y, const Physics& physics, double sigma,
                        BackprojectionMode mode = BackprojectionMode::Adjoint);

/// x̂ = R(y, physics).
using Reconstructor = std::function<Tensor(const Tensor&, const Physics&)>;

} // namespace invkit
