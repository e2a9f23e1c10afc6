#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "invkit/fidelity.hpp"
#include "invkit/priors.hpp"
#include "oracles.hpp"

using namespace invkit;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(xs.size() - 1);
  return m;
}

// Draws n scalar samples of the noise model applied to the constant z.
std::vector<double> draw(const NoiseModel& model, double z, int n, RngState& rng) {
  const Tensor y = noise_apply(model, Tensor::constant({n}, z), rng);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = y[i].real();
  return out;
}

// Mean and variance within 3 standard errors; the variance standard error
// uses the fourth central moment estimated from the same sample.
void check_moments(const std::vector<double>& xs, double mean, double var) {
  const Moments m = moments(xs);
  const double n = static_cast<double>(xs.size());
  double m4 = 0.0;
  for (double x : xs) m4 += std::pow(x - m.mean, 4);
  m4 /= n;
  CHECK(std::abs(m.mean - mean) <= 3.0 * std::sqrt(var / n));
  CHECK(std::abs(m.var - var) <= 3.0 * std::sqrt(std::max(m4 - m.var * m.var, 0.0) / n));
}

double central_difference(const std::function<double(const Tensor&)>& f, Tensor x, Index i, double h) {
  const cplx x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2 * h);
}

} // namespace

TEST_CASE("noise: trivial cases and domain errors") {
  RngState rng(1);
  const Tensor z = rand_uniform({6, 6}, rng);
  CHECK(norm(noise_apply(NoiseModel::gaussian(0.0), z, rng) - z) == 0.0);
  CHECK(norm(noise_apply(NoiseModel::none(), z, rng) - z) == 0.0);
  CHECK(norm(noise_apply(NoiseModel::poisson(1.0), Tensor({6, 6}), rng)) == 0.0);
  CHECK_THROWS_AS(noise_apply(NoiseModel::poisson(1.0), Tensor::constant({2}, -1.0), rng), DomainError);
  CHECK_THROWS_AS(noise_apply(NoiseModel::gamma(2.0), Tensor::constant({2}, -1.0), rng), DomainError);
  CHECK_THROWS_AS(NoiseModel::gaussian(-1.0), ValidationError);
  CHECK_THROWS_AS(NoiseModel::poisson(0.0), ValidationError);
}

TEST_CASE("noise: gaussian moments on a constant image") {
  RngState rng(2);
  const Tensor z = Tensor::constant({64, 64}, 0.5);
  std::vector<double> xs;
  for (int d = 0; d < 100; ++d) {
    const Tensor y = noise_apply(NoiseModel::gaussian(0.1), z, rng);
    for (Index i = 0; i < y.size(); ++i) xs.push_back(y[i].real());
  }
  const Moments m = moments(xs);
  CHECK(std::abs(m.mean - 0.5) <= 3 * 0.1 / std::sqrt(static_cast<double>(xs.size())));
  CHECK(std::abs(m.var - 0.01) <= 0.1 * 0.01);
}

TEST_CASE("noise: analytic moments for every family") {
  RngState rng(3);
  const int n = 100000;
  check_moments(draw(NoiseModel::gaussian(0.3), 0.2, n, rng), 0.2, 0.09);
  check_moments(draw(NoiseModel::poisson(0.5), 3.0, n, rng), 3.0, 0.5 * 3.0);
  check_moments(draw(NoiseModel::poisson(2.0), 5000.0, n, rng), 5000.0, 2.0 * 5000.0);
  check_moments(draw(NoiseModel::poisson_gaussian(0.25, 0.2), 2.0, n, rng), 2.0, 0.25 * 2.0 + 0.04);
  check_moments(draw(NoiseModel::uniform(0.6), 1.0, n, rng), 1.0, 0.36 / 3.0);
  check_moments(draw(NoiseModel::gamma(4.0), 2.0, n, rng), 2.0, 4.0 / 4.0);

  // Complex gaussian noise splits σ² evenly between the two parts.
  const Tensor y = noise_apply(NoiseModel::gaussian(1.0), Tensor({n}, DType::Complex), rng);
  CHECK(y.data().squaredNorm() / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fidelity: spec examples") {
  const Tensor one = Tensor::constant({1}, 1.0), zero = Tensor({1});
  const auto pnll = DataFidelity::poisson_nll();
  CHECK(std::abs(fidelity_prox(pnll, one, one, 1.0)[0].real() - 1.0) <= 1e-12);
  CHECK(std::abs(fidelity_prox(pnll, one, zero, 1.0)[0].real() - (std::sqrt(5.0) - 1) / 2) <= 1e-12);
  CHECK(fidelity_prox(DataFidelity::l1(), zero, Tensor::constant({1}, 2.0), 0.5)[0].real() == 1.5);

  RngState rng(4);
  const Tensor y = randn({5, 5}, DType::Real, rng), v = randn({5, 5}, DType::Real, rng);
  CHECK(max_abs(fidelity_prox(DataFidelity::l2(), y, v, 1e8) - y) <= 1e-6);
  CHECK_THROWS_AS(fidelity_prox(DataFidelity::l2(), y, v, 0.0), ValidationError);
  CHECK_THROWS_AS(fidelity_eval(pnll, one, Tensor::constant({1}, -1.0)), DomainError);
  // 0·log 0 = 0 for zero counts.
  CHECK(fidelity_eval(pnll, zero, zero) == 0.0);
}

TEST_CASE("fidelity: prox subgradient optimality over random triples") {
  RngState rng(5);
  for (int t = 0; t < 100; ++t) {
    const double gamma = 0.01 + 5.0 * rng.uniform();
    const Tensor v = 3.0 * randn({16}, DType::Real, rng);
    const Tensor yr = randn({16}, DType::Real, rng);
    {
      const Tensor z = fidelity_prox(DataFidelity::l2(), yr, v, gamma);
      for (Index i = 0; i < 16; ++i) CHECK(std::abs(gamma * (z[i] - yr[i]) + (z[i] - v[i])) <= 1e-8);
    }
    {
      const Tensor z = fidelity_prox(DataFidelity::l1(), yr, v, gamma);
      for (Index i = 0; i < 16; ++i) {
        const double r = (z[i] - yr[i]).real(), g = (z[i] - v[i]).real();
        if (std::abs(r) > 1e-14) CHECK(std::abs(gamma * (r > 0 ? 1.0 : -1.0) + g) <= 1e-8);
        else CHECK(std::abs(g) <= gamma + 1e-12);
      }
    }
    {
      const double beta = t % 2 ? 0.0 : 0.5 * rng.uniform();
      const auto f = DataFidelity::poisson_nll(beta);
      const Tensor yp = 5.0 * rand_uniform({16}, rng);
      const Tensor z = fidelity_prox(f, yp, v, gamma);
      for (Index i = 0; i < 16; ++i) {
        const double zi = z[i].real();
        REQUIRE(zi + beta > 0);
        CHECK(std::abs(gamma * (1 - yp[i].real() / (zi + beta)) + (zi - v[i].real())) <= 1e-8);
      }
    }
  }
}

TEST_CASE("fidelity: prox is nonexpansive") {
  RngState rng(6);
  const Tensor y = 4.0 * rand_uniform({32}, rng);
  for (const auto& f : {DataFidelity::l2(), DataFidelity::l1(), DataFidelity::poisson_nll(0.1)}) {
    for (int t = 0; t < 20; ++t) {
      const Tensor a = randn({32}, DType::Real, rng), b = randn({32}, DType::Real, rng);
      CHECK(norm(fidelity_prox(f, y, a, 0.7) - fidelity_prox(f, y, b, 0.7)) <= norm(a - b) * (1 + 1e-12));
    }
  }
}

TEST_CASE("fidelity: gradients match central differences") {
  RngState rng(7);
  const Tensor y = 2.0 * rand_uniform({8}, rng);
  const Tensor z = Tensor::constant({8}, 0.5) + rand_uniform({8}, rng);
  for (const auto& f : {DataFidelity::l2(1.7), DataFidelity::poisson_nll(0.2, 0.8)}) {
    const Tensor g = fidelity_grad(f, y, z);
    for (Index i = 0; i < 8; ++i) {
      const double fd = central_difference([&](const Tensor& t) { return fidelity_eval(f, y, t); }, z, i, 1e-5);
      CHECK(std::abs(fd - g[i].real()) <= 1e-6 * std::max(std::abs(g[i].real()), 1.0));
    }
  }
  CHECK_THROWS_AS(fidelity_grad(DataFidelity::l1(), y, z), CapabilityError);
  CHECK(lipschitz(DataFidelity::l2(2.0), y) == 2.0);
  CHECK_THROWS_AS(lipschitz(DataFidelity::poisson_nll(0.0), y), CapabilityError);
}

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(Tensor::constant({1}, 2.0), 0.5)[0].real() == 1.5);
  CHECK(soft_threshold(Tensor::constant({1}, -0.3), 0.5)[0] == cplx(0.0));
  Tensor c({1}, DType::Complex);
  c[0] = cplx(1.0, 1.0);
  const cplx s = soft_threshold(c, std::sqrt(2.0) / 2)[0];
  CHECK(std::abs(std::abs(s) - std::sqrt(2.0) / 2) < 1e-15);
  CHECK(std::abs(std::arg(s) - std::atan(1.0)) < 1e-15);
  CHECK_THROWS_AS(soft_threshold(c, -1.0), ValidationError);
}

TEST_CASE("haar") {
  RngState rng(8);
  const Tensor x = randn({16, 16}, DType::Real, rng);
  for (int j = 0; j <= 4; ++j) {
    const Tensor c = haar_dwt(x, j);
    CHECK(std::abs(norm(c) - norm(x)) <= 1e-12 * norm(x));
    CHECK(norm(haar_idwt(c, j) - x) <= 1e-12 * norm(x));
  }
  CHECK(norm(haar_dwt(x, 0) - x) == 0.0);
  const Tensor d = haar_dwt(Tensor::constant({8, 8}, 0.3), 2);
  CHECK(d[0].real() == doctest::Approx(0.3 * 4));
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j)
      if (i >= 2 || j >= 2) CHECK(std::abs(d[i * 8 + j]) <= 1e-14);
      else CHECK(std::abs(d[i * 8 + j] - 1.2) <= 1e-14);
  CHECK_THROWS_AS(haar_dwt(Tensor({12, 12}), 3), ValidationError);

  // Haar basis functions are the columns: an oracle for one level.
  Tensor e({2, 2});
  e[0] = 1.0;
  CHECK(max_abs(haar_dwt(e, 1) - Tensor::constant({2, 2}, 0.5)) <= 1e-15);
}

TEST_CASE("gradient and divergence are negative adjoints") {
  RngState rng(9);
  const Tensor x = randn({7, 9}, DType::Real, rng);
  const Tensor g = randn({2, 7, 9}, DType::Real, rng);
  CHECK(std::abs(dot(image_gradient(x), g) + dot(x, image_divergence(g))) <= 1e-12 * norm(x) * norm(g));
  CHECK(tv_value(x) == doctest::Approx(oracle::tv(oracle::as_matrix(x))).epsilon(1e-13));
}

TEST_CASE("tv prox: trivial and two-point cases") {
  const Tensor c = Tensor::constant({5, 5}, 0.4);
  CHECK(max_abs(tv_prox(c, 1.0) - c) == 0.0);
  const Tensor pair = tv_prox(Tensor::from_values({1, 2}, {0.0, 2.0}), 0.5);
  CHECK(std::abs(pair[0].real() - 0.5) <= 1e-8);
  CHECK(std::abs(pair[1].real() - 1.5) <= 1e-8);
  // Past the fusion threshold both values collapse to the mean. The dual is
  // interior here, so the default stopping rule is too loose for 1e-8.
  const Tensor fused = tv_prox(Tensor::from_values({1, 2}, {0.0, 2.0}), 2.0, {10000, 1e-14});
  CHECK(std::abs(fused[0].real() - 1.0) <= 1e-8);
  CHECK(std::abs(fused[1].real() - 1.0) <= 1e-8);
}

TEST_CASE("tv prox: objective matches the long-run dual oracle") {
  RngState rng(10);
  for (int t = 0; t < 10; ++t) {
    const Tensor v = rand_uniform({8, 8}, rng);
    const double gamma = 0.05 + 0.3 * rng.uniform();
    const Eigen::MatrixXd vm = oracle::as_matrix(v);
    const double want = oracle::tv_objective(oracle::tv_prox_chambolle(vm, gamma, 20000), vm, gamma);
    const double got = oracle::tv_objective(oracle::as_matrix(tv_prox(v, gamma)), vm, gamma);
    CHECK(oracle::rel_err(got, want) <= 1e-4);
  }
}

TEST_CASE("priors: eval, grad and prox") {
  RngState rng(11);
  const Tensor x = randn({8, 8}, DType::Real, rng);
  CHECK(prior_eval(Prior::tikhonov(2.0), x) == doctest::Approx(squared_norm(x)));
  CHECK(prior_eval(Prior::l1(), x) == doctest::Approx(x.data().cwiseAbs().sum()));
  CHECK(prior_eval(Prior::wavelet_l1(1.0, 2), x) == doctest::Approx(haar_dwt(x, 2).data().cwiseAbs().sum()));
  CHECK(norm(prior_prox(Prior::tikhonov(), x, 3.0) - 0.25 * x) <= 1e-15 * norm(x));

  const Prior tik = Prior::tikhonov(0.7);
  const Tensor g = prior_grad(tik, x);
  for (Index i = 0; i < 8; ++i) {
    const double fd = central_difference([&](const Tensor& t) { return prior_eval(tik, t); }, x, i, 1e-4);
    CHECK(std::abs(fd - g[i].real()) <= 1e-8);
  }
  const Prior smooth = Prior::tv(1.0, 0.1);
  const Tensor gs = prior_grad(smooth, x);
  for (Index i = 0; i < 64; i += 7) {
    const double fd = central_difference([&](const Tensor& t) { return prior_eval(smooth, t); }, x, i, 1e-6);
    CHECK(std::abs(fd - gs[i].real()) <= 1e-6 * std::max(1.0, std::abs(gs[i].real())));
  }
  CHECK_THROWS_AS(prior_grad(Prior::l1(), x), CapabilityError);
  CHECK_THROWS_AS(prior_grad(Prior::wavelet_l1(), x), CapabilityError);
  CHECK(has_gradient(Prior::tv()));
}

TEST_CASE("wavelet_l1 prox beats perturbations") {
  RngState rng(12);
  const Tensor v = randn({16, 16}, DType::Real, rng);
  const double gamma = 0.4;
  const Prior w = Prior::wavelet_l1(1.0, 2);
  auto objective = [&](const Tensor& z) { return gamma * prior_eval(w, z) + 0.5 * squared_norm(z - v); };
  const Tensor z = prior_prox(w, v, gamma);
  const double best = objective(z);
  CHECK(best <= objective(v));
  CHECK(best <= objective(Tensor({16, 16})));
  for (int t = 0; t < 200; ++t) CHECK(best <= objective(z + 1e-3 * randn({16, 16}, DType::Real, rng)));
}

TEST_CASE("denoisers") {
  RngState rng(13);
  const Tensor c = Tensor::constant({9, 9}, 0.6);
  CHECK(max_abs(denoise(Denoiser::gaussian_smoother(), c, 0.1) - c) <= 1e-14);
  const Tensor v = randn({9, 9}, DType::Real, rng);
  CHECK(norm(denoise(Denoiser::tv(), v, 0.0) - v) == 0.0);
  Tensor spike = Tensor::constant({5, 5}, 0.2);
  spike[12] = 9.0;
  CHECK(max_abs(denoise(Denoiser::median(), spike, 0.1) - Tensor::constant({5, 5}, 0.2)) == 0.0);

  for (const auto& d : {Denoiser::gaussian_smoother(), Denoiser::tv(2.0), Denoiser::median()}) {
    const Tensor shifted = denoise(d, v + Tensor::constant({9, 9}, 1.3), 0.3);
    CHECK(max_abs(shifted - denoise(d, v, 0.3) - Tensor::constant({9, 9}, 1.3)) <= 1e-6);
    CHECK(shifted.shape() == v.shape());
  }
  // A very narrow window is the identity.
  CHECK(max_abs(denoise(Denoiser::gaussian_smoother(1e-6), v, 0.0) - v) <= 1e-12);
}
