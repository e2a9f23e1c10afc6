#pragma once

#include <optional>
#include <string>

#include "invkit/linear_map.hpp"

namespace invkit {

struct SolverOptions {
  double tol = 1e-6;
  int max_iter = 1000;
};

struct SolveReport {
  int iterations = 0;
  /// Relative residual ‖Bx − b‖/‖b‖ (CG, BiCGStab) or LSQR's ‖Ax − b‖/‖b‖ estimate.
  double final_residual_norm = 0.0;
  bool converged = false;
  std::optional<double> condition_estimate;
  std::string reason;
};

template <typename T>
struct Solution {
  T value;
  SolveReport report;
};

/// Conjugate gradient for self-adjoint positive semidefinite B. The true
/// residual b − Bx replaces the recursive one every 50 iterations and before
/// convergence is declared.
Solution<Tensor> cg_solve(const LinearMap& b_map, const Tensor& b, SolverOptions opts = {});

/// BiCGStab for square B; a vanishing ρ ends the run with converged = false.
Solution<Tensor> bicgstab_solve(const LinearMap& b_map, const Tensor& b, SolverOptions opts = {});

/// LSQR minimizing ‖Ax − b‖² + damping²‖x‖² with atol = btol = opts.tol.
///
/// condition_estimate is σ_max/σ_min of the Golub-Kahan bidiagonal LSQR
/// accumulates (its Ritz values), not the Frobenius-norm acond.
Solution<Tensor> lsqr_solve(const LinearMap& a, const Tensor& b, SolverOptions opts = {}, double damping = 0.0);

/// A⁺y: closed form Aᵀy when the map is unitary, a projection, or a partial
/// isometry, otherwise LSQR with zero damping.
Tensor pinv_apply(const LinearMap& a, const Tensor& y, SolverOptions opts = {});

/// argmin_x ½‖Ax − y‖² + (ρ/2)‖x − z‖², solved exactly in the Fourier domain
/// when a spectral diagonal is available and by CG otherwise.
Tensor tikhonov_solve(const LinearMap& a, const Tensor& y, const Tensor& z, double rho, SolverOptions opts = {});

/// Power iteration on AᵀA from a random Gaussian start; value is √λ_max.
Solution<double> operator_norm(const LinearMap& a, RngState& rng, SolverOptions opts = {});

/// Condition estimate from an LSQR run on (A, y); a random right-hand side is
/// drawn from rng when y is not given.
double condition_estimate(const LinearMap& a, const std::optional<Tensor>& y, RngState& rng,
                          SolverOptions opts = {1e-10, 1000});

} // namespace invkit
