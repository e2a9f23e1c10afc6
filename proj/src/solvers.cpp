#include "invkit/solvers.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "invkit/fft.hpp"

namespace invkit {

namespace {

constexpr int kTrueResidualPeriod = 50;

void check_finite(const Tensor& t, const char* solver, int iteration) {
  if (!all_finite(t))
    throw DivergenceError(std::string(solver) + ": non-finite value at iteration " + std::to_string(iteration));
}

void require_square(const LinearMap& m, const char* solver) {
  if (m.domain().shape != m.range().shape)
    throw ShapeError(std::string(solver) + ": operator must be square, got " + to_string(m.domain()) + " -> " +
                     to_string(m.range()));
}

Tensor zero_solution(const LinearMap& m, const Tensor& b) {
  return Tensor(m.domain().shape, promote(m.domain().dtype, b.dtype()));
}

// Singular values of the (k+1)×k lower bidiagonal with diagonal alpha and
// subdiagonal beta, via the tridiagonal BᵀB.
Eigen::VectorXd bidiagonal_singular_values(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const Index k = static_cast<Index>(alpha.size());
  Eigen::VectorXd diag(k), sub(std::max<Index>(k - 1, 0));
  for (Index i = 0; i < k; ++i) diag[i] = alpha[i] * alpha[i] + beta[i] * beta[i];
  for (Index i = 0; i + 1 < k; ++i) sub[i] = alpha[i + 1] * beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

} // namespace

Solution<Tensor> cg_solve(const LinearMap& op, const Tensor& b, SolverOptions opts) {
  require_square(op, "cg_solve");
  check_finite(b, "cg_solve", 0);
  Solution<Tensor> sol{zero_solution(op, b), {}};
  Tensor& x = sol.value;
  SolveReport& rep = sol.report;
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    rep.converged = true;
    return sol;
  }
  Tensor r = b;
  Tensor p = r;
  double rs = squared_norm(r);
  for (int k = 1; k <= opts.max_iter; ++k) {
    const Tensor ap = op.apply(p);
    const double pap = dot(p, ap).real();
    if (std::isnan(pap)) throw DivergenceError("cg_solve: non-finite value at iteration " + std::to_string(k));
    if (!(pap > 0.0)) {
      rep.iterations = k - 1;
      rep.final_residual_norm = std::sqrt(rs) / bnorm;
      rep.reason = "non-positive curvature";
      return sol;
    }
    const double alpha = rs / pap;
    x += alpha * p;
    r -= alpha * ap;
    check_finite(x, "cg_solve", k);
    if (k % kTrueResidualPeriod == 0) r = b - op.apply(x);
    double rs_new = squared_norm(r);
    if (std::sqrt(rs_new) / bnorm <= opts.tol) {
      r = b - op.apply(x);
      rs_new = squared_norm(r);
      if (std::sqrt(rs_new) / bnorm <= opts.tol) {
        rep.iterations = k;
        rep.final_residual_norm = std::sqrt(rs_new) / bnorm;
        rep.converged = true;
        return sol;
      }
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
    rep.iterations = k;
  }
  rep.final_residual_norm = norm(b - op.apply(x)) / bnorm;
  rep.reason = "max_iter reached";
  return sol;
}

Solution<Tensor> bicgstab_solve(const LinearMap& op, const Tensor& b, SolverOptions opts) {
  require_square(op, "bicgstab_solve");
  check_finite(b, "bicgstab_solve", 0);
  Solution<Tensor> sol{zero_solution(op, b), {}};
  Tensor& x = sol.value;
  SolveReport& rep = sol.report;
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    rep.converged = true;
    return sol;
  }
  const double eps = std::numeric_limits<double>::epsilon();
  Tensor r = b;
  const Tensor rhat = r;
  cplx rho = 1.0, alpha = 1.0, omega = 1.0;
  Tensor v = x.zeros_like(), p = x.zeros_like();

  auto finish = [&](int k, const char* reason) {
    rep.iterations = k;
    rep.final_residual_norm = norm(b - op.apply(x)) / bnorm;
    rep.converged = rep.final_residual_norm <= opts.tol;
    if (!rep.converged) rep.reason = reason;
    return sol;
  };

  for (int k = 1; k <= opts.max_iter; ++k) {
    const cplx rho_new = dot(rhat, r);
    if (std::abs(rho_new) <= eps * eps * norm(rhat) * norm(r)) return finish(k - 1, "breakdown: rho vanished");
    const cplx beta = (rho_new / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    v = op.apply(p);
    const cplx rv = dot(rhat, v);
    if (std::abs(rv) == 0.0) return finish(k - 1, "breakdown: <rhat, v> vanished");
    alpha = rho_new / rv;
    const Tensor s = r - alpha * v;
    if (norm(s) / bnorm <= opts.tol) {
      x += alpha * p;
      rep.iterations = k;
      rep.final_residual_norm = norm(b - op.apply(x)) / bnorm;
      if (rep.final_residual_norm <= opts.tol) {
        rep.converged = true;
        return sol;
      }
      r = b - op.apply(x);
      rho = rho_new;
      continue;
    }
    const Tensor t = op.apply(s);
    const double tt = squared_norm(t);
    omega = tt > 0.0 ? dot(t, s) / tt : cplx(0.0);
    x += alpha * p + omega * s;
    r = s - omega * t;
    check_finite(x, "bicgstab_solve", k);
    if (k % kTrueResidualPeriod == 0) r = b - op.apply(x);
    rho = rho_new;
    rep.iterations = k;
    if (norm(r) / bnorm <= opts.tol) return finish(k, "true residual above tolerance");
    if (omega == cplx(0.0)) return finish(k, "breakdown: omega vanished");
  }
  return finish(opts.max_iter, "max_iter reached");
}

Solution<Tensor> lsqr_solve(const LinearMap& a, const Tensor& b, SolverOptions opts, double damping) {
  if (damping < 0.0) throw ValidationError("lsqr_solve: damping must be >= 0");
  check_finite(b, "lsqr_solve", 0);
  Solution<Tensor> sol{zero_solution(a, b), {}};
  Tensor& x = sol.value;
  SolveReport& rep = sol.report;
  const double atol = opts.tol, btol = opts.tol;
  const double eps = std::numeric_limits<double>::epsilon();

  Tensor u = b;
  double beta = norm(u);
  if (beta == 0.0) {
    rep.converged = true;
    rep.condition_estimate = 1.0;
    return sol;
  }
  u *= 1.0 / beta;
  Tensor v = a.adjoint(u);
  double alpha = norm(v);
  if (alpha == 0.0) {
    rep.converged = true;
    rep.final_residual_norm = 1.0;
    rep.reason = "b is orthogonal to the range of A";
    return sol;
  }
  v *= 1.0 / alpha;
  Tensor w = v;

  std::vector<double> alphas{alpha}, betas;
  const double bnorm = beta;
  double phibar = beta, rhobar = alpha;
  double anorm = 0.0, ddnorm = 0.0, res2 = 0.0, xxnorm = 0.0, z = 0.0;
  double cs2 = -1.0, sn2 = 0.0;
  double rnorm = beta;

  for (int k = 1; k <= opts.max_iter; ++k) {
    // Golub-Kahan bidiagonalization step.
    u = a.apply(v) - alpha * u;
    beta = norm(u);
    double alpha_next = 0.0;
    if (beta > 0.0) {
      u *= 1.0 / beta;
      anorm = std::sqrt(anorm * anorm + alpha * alpha + beta * beta + damping * damping);
      v = a.adjoint(u) - beta * v;
      alpha_next = norm(v);
      if (alpha_next > 0.0) v *= 1.0 / alpha_next;
    } else {
      anorm = std::sqrt(anorm * anorm + alpha * alpha + damping * damping);
    }
    betas.push_back(beta);

    // Eliminate the damping term, then the subdiagonal.
    const double rhobar1 = std::hypot(rhobar, damping);
    const double cs1 = rhobar / rhobar1, sn1 = damping / rhobar1;
    const double psi = sn1 * phibar;
    phibar = cs1 * phibar;

    const double rho = std::hypot(rhobar1, beta);
    const double cs = rhobar1 / rho, sn = beta / rho;
    const double theta = sn * alpha_next;
    rhobar = -cs * alpha_next;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    const double tau = sn * phi;

    const Tensor dk = (1.0 / rho) * w;
    x += (phi / rho) * w;
    w = v - (theta / rho) * w;
    ddnorm += squared_norm(dk);
    check_finite(x, "lsqr_solve", k);

    const double delta = sn2 * rho, gambar = -cs2 * rho;
    const double rhs = phi - delta * z;
    const double zbar = rhs / gambar;
    const double xnorm = std::sqrt(xxnorm + zbar * zbar);
    const double gamma = std::hypot(gambar, theta);
    cs2 = gambar / gamma;
    sn2 = theta / gamma;
    z = rhs / gamma;
    xxnorm += z * z;

    res2 += psi * psi;
    rnorm = std::sqrt(phibar * phibar + res2);
    const double arnorm = alpha_next * std::abs(tau);
    const double test1 = rnorm / bnorm;
    const double test2 = arnorm / (anorm * rnorm + eps);
    const double rtol = btol + atol * anorm * xnorm / bnorm;

    rep.iterations = k;
    alpha = alpha_next;
    const bool exhausted = beta == 0.0 || alpha_next == 0.0;
    if (test1 <= rtol || test2 <= atol || exhausted) {
      rep.converged = true;
      rep.reason = test1 <= rtol ? "residual tolerance" : (test2 <= atol ? "normal-equation tolerance" : "Krylov space exhausted");
      break;
    }
    alphas.push_back(alpha_next);
  }
  if (!rep.converged) rep.reason = "max_iter reached";
  rep.final_residual_norm = rnorm / bnorm;

  alphas.resize(betas.size());
  const Eigen::VectorXd sv = bidiagonal_singular_values(alphas, betas);
  const double smax = sv.maxCoeff(), smin = sv.minCoeff();
  rep.condition_estimate = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return sol;
}

Tensor pinv_apply(const LinearMap& a, const Tensor& y, SolverOptions opts) {
  const MapTraits& t = a.traits();
  if (t.is_unitary || t.is_projection || t.adjoint_is_pinv) return a.adjoint(y);
  return lsqr_solve(a, y, opts).value;
}

Tensor tikhonov_solve(const LinearMap& a, const Tensor& y, const Tensor& z, double rho, SolverOptions opts) {
  if (!(rho > 0.0)) throw ValidationError("tikhonov_solve: rho must be > 0");
  Tensor rhs = a.adjoint(y) + rho * z;
  if (const auto& d = a.traits().spectral_diagonal) {
    Tensor f = fft2c(rhs);
    const Eigen::ArrayXd denom = d->data().cwiseAbs2().array() + rho;
    f.data() = (f.data().array() / denom.cast<cplx>()).matrix();
    Tensor x = ifft2c(f);
    const bool real = a.domain().dtype == DType::Real && !y.is_complex() && !z.is_complex();
    return real ? x.real_part() : x;
  }
  const LinearMap normal(
      a.domain(), a.domain(), [a, rho](const Tensor& x) { return a.adjoint(a.apply(x)) + rho * x; },
      [a, rho](const Tensor& x) { return a.adjoint(a.apply(x)) + rho * x; });
  return cg_solve(normal, rhs, opts).value;
}

Solution<double> operator_norm(const LinearMap& a, RngState& rng, SolverOptions opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("operator_norm: tol must be > 0");
  Solution<double> sol{0.0, {}};
  Tensor x = randn(a.domain().shape, a.domain().dtype, rng);
  x *= 1.0 / norm(x);
  Tensor w = a.adjoint(a.apply(x));
  if (norm(w) <= 1e-300) {
    x = randn(a.domain().shape, a.domain().dtype, rng);
    x *= 1.0 / norm(x);
    w = a.adjoint(a.apply(x));
    if (norm(w) <= 1e-300) {
      sol.report.converged = true;
      sol.report.reason = "zero operator";
      return sol;
    }
  }
  double lambda = dot(x, w).real();
  for (int k = 1; k <= opts.max_iter; ++k) {
    x = (1.0 / norm(w)) * w;
    w = a.adjoint(a.apply(x));
    check_finite(w, "operator_norm", k);
    const double next = dot(x, w).real();
    const double change = std::abs(next - lambda) / std::max(std::abs(next), 1e-300);
    lambda = next;
    sol.report.iterations = k;
    sol.report.final_residual_norm = change;
    if (change < opts.tol) {
      sol.report.converged = true;
      break;
    }
  }
  if (!sol.report.converged) sol.report.reason = "max_iter reached";
  sol.value = std::sqrt(std::max(lambda, 0.0));
  return sol;
}

double condition_estimate(const LinearMap& a, const std::optional<Tensor>& y, RngState& rng, SolverOptions opts) {
  const Tensor b = y ? *y : randn(a.range().shape, a.range().dtype, rng);
  return *lsqr_solve(a, b, opts).report.condition_estimate;
}

} // namespace invkit
