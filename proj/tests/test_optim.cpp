#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invkit/generators.hpp"
#include "invkit/optim.hpp"
#include "invkit/phantoms.hpp"
#include "oracles.hpp"

using namespace invkit;

namespace {

const Algorithm kAll[] = {Algorithm::Pgd, Algorithm::Fista, Algorithm::Admm, Algorithm::Drs, Algorithm::Pdhg};

struct TikhonovCase {
  Physics physics;
  Tensor y;
  double lambda;
  Eigen::VectorXd solution; // (AᵀA + λI)⁻¹Aᵀy
};

TikhonovCase tikhonov_case(std::uint64_t seed, double lambda) {
  RngState rng(seed);
  Physics p = make_compressed_sensing(20, {2, 5}, rng);
  const Eigen::MatrixXd a = std::get<CompressedSensingParams>(p.params()).matrix;
  const Tensor y = randn({20}, DType::Real, rng);
  const Eigen::MatrixXd normal = a.transpose() * a + lambda * Eigen::MatrixXd::Identity(10, 10);
  const Eigen::VectorXd sol = normal.ldlt().solve(a.transpose() * oracle::flat(y));
  return {std::move(p), y, lambda, sol};
}

// First iteration at which the estimate is within `tol` relative of the oracle.
int iterations_to_reach(Algorithm algo, const TikhonovCase& c, double tol) {
  int hit = -1;
  AlgoConfig cfg;
  cfg.algorithm = algo;
  cfg.max_iter = 50000;
  cfg.tol = 0.0;
  cfg.monitor = [&](int k, const Tensor& x) {
    if (hit < 0 && oracle::rel_err(oracle::flat(x), c.solution) <= tol) hit = k;
  };
  reconstruct(c.y, c.physics, DataFidelity::l2(), Prior::tikhonov(c.lambda), cfg);
  return hit;
}

struct BlurTv {
  Physics physics;
  Tensor y;
  Prior prior = Prior::tv(0.02);
  explicit BlurTv(Index n = 32) : physics(make_blur(gen_gaussian_kernel(1.0, 5), {n, n})) {
    RngState rng(21);
    y = noise_apply(NoiseModel::gaussian(0.02), physics.apply(shepp_phantom(n)), rng);
  }
};

} // namespace

TEST_CASE("identity physics without a prior returns y") {
  RngState rng(1);
  const Tensor y = randn({6, 6}, DType::Real, rng);
  const Physics id = make_denoising({6, 6});
  for (Algorithm a : kAll) {
    AlgoConfig cfg;
    cfg.algorithm = a;
    const auto r = reconstruct(y, id, DataFidelity::l2(), std::monostate{}, cfg);
    CAPTURE(to_string(a));
    CHECK(norm(r.x - y) <= 1e-8 * norm(y));
  }
  AlgoConfig one;
  one.max_iter = 1;
  CHECK(norm(pgd(y, id, DataFidelity::l2(), std::monostate{}, one).x - y) <= 1e-14);
}

TEST_CASE("closed-form Tikhonov solution for all five algorithms") {
  const TikhonovCase c = tikhonov_case(2, 0.1);
  for (Algorithm a : kAll) {
    AlgoConfig cfg;
    cfg.algorithm = a;
    cfg.max_iter = 5000;
    cfg.tol = 1e-12;
    const auto r = reconstruct(c.y, c.physics, DataFidelity::l2(), Prior::tikhonov(c.lambda), cfg);
    CAPTURE(to_string(a));
    CHECK(r.x.shape() == c.physics.domain().shape);
    CHECK(oracle::rel_err(oracle::flat(r.x), c.solution) <= 1e-6);
  }
}

TEST_CASE("fista needs at most half of pgd's iterations") {
  // Momentum only pays off on ill-conditioned problems: singular values in
  // [0.03, 1] and a tiny λ give κ ≈ 1000. A Gaussian 20×10 map has κ ≈ 30,
  // where fista is just 1.2-1.4x faster.
  const double lambda = 1e-4;
  const Eigen::MatrixXd a = oracle::conditioned_matrix(20, 10, 0.03, 1.0, 3);
  RngState rng(3);
  const Tensor y = randn({20}, DType::Real, rng);
  const Eigen::MatrixXd normal = a.transpose() * a + lambda * Eigen::MatrixXd::Identity(10, 10);
  const TikhonovCase c{Physics(CompressedSensingParams{20, {2, 5}, 0, a}), y, lambda,
                       normal.ldlt().solve(a.transpose() * oracle::flat(y))};
  const int p = iterations_to_reach(Algorithm::Pgd, c, 1e-6);
  const int f = iterations_to_reach(Algorithm::Fista, c, 1e-6);
  CAPTURE(p);
  CAPTURE(f);
  REQUIRE(p > 0);
  REQUIRE(f > 0);
  CHECK(2 * f <= p);
}

TEST_CASE("pgd objective is monotone") {
  BlurTv b;
  // Monotonicity holds for the exact prox; keep the inner solve tight.
  b.prior.tv_opts = {2000, 1e-8};
  AlgoConfig cfg;
  cfg.max_iter = 200;
  cfg.record_objective = true;
  const auto r = pgd(b.y, b.physics, DataFidelity::l2(), b.prior, cfg);
  REQUIRE(r.log.objective.size() == static_cast<std::size_t>(r.log.iterations));
  CHECK(r.log.iterate_change.size() == r.log.objective.size());
  for (std::size_t k = 1; k < r.log.objective.size(); ++k)
    CHECK(r.log.objective[k] <= r.log.objective[k - 1] + 1e-12 * std::abs(r.log.objective[k - 1]));
}

TEST_CASE("blur + tv: cross-algorithm agreement") {
  const BlurTv b;
  std::vector<double> finals;
  for (Algorithm a : {Algorithm::Fista, Algorithm::Admm, Algorithm::Drs, Algorithm::Pdhg}) {
    AlgoConfig cfg;
    cfg.algorithm = a;
    cfg.max_iter = 1500;
    cfg.tol = 1e-7;
    finals.push_back(objective(b.y, b.physics, DataFidelity::l2(), b.prior,
                               reconstruct(b.y, b.physics, DataFidelity::l2(), b.prior, cfg).x));
  }
  for (double v : finals) CHECK(oracle::rel_err(v, finals[0]) <= 1e-3);
}

TEST_CASE("fista beats pgd on wavelet-l1 deblurring at equal budget") {
  RngState rng(4);
  const Physics blur = make_blur(gen_gaussian_kernel(1.2, 7), {32, 32});
  const Tensor y = noise_apply(NoiseModel::gaussian(0.01), blur.apply(disc_phantom(32)), rng);
  const Prior w = Prior::wavelet_l1(0.01, 2);
  AlgoConfig cfg;
  cfg.max_iter = 100;
  cfg.tol = 0.0;
  const double p = objective(y, blur, DataFidelity::l2(), w, pgd(y, blur, DataFidelity::l2(), w, cfg).x);
  const double f = objective(y, blur, DataFidelity::l2(), w, fista(y, blur, DataFidelity::l2(), w, cfg).x);
  CHECK(f <= p);
}

TEST_CASE("admm: identity physics and rho invariance") {
  RngState rng(5);
  const Tensor y = randn({8, 8}, DType::Real, rng);
  AlgoConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 2000;
  const auto r = admm(y, make_denoising({8, 8}), DataFidelity::l2(), Prior::tikhonov(0.5), cfg);
  CHECK(norm(r.x - (1.0 / 1.5) * y) <= 1e-8);

  // The minimizer is ρ-independent only if the inner TV prox is solved well;
  // with the default prox tolerance each ρ settles on a slightly different point.
  const BlurTv b(16);
  Prior tight = b.prior;
  tight.tv_opts = {5000, 1e-6};
  std::vector<Tensor> sols;
  for (double rho : {0.1, 1.0, 10.0}) {
    AlgoConfig c2;
    c2.rho = rho;
    c2.max_iter = 5000;
    c2.tol = 1e-7;
    sols.push_back(admm(b.y, b.physics, DataFidelity::l2(), tight, c2).x);
  }
  for (const auto& s : sols) CHECK(norm(s - sols[0]) <= 1e-4 * norm(sols[0]));
  CHECK_THROWS_AS(admm(y, make_denoising({8, 8}), DataFidelity::l1(), Prior::l1(), cfg), CapabilityError);
}

TEST_CASE("drs: l1 prior on identity physics is soft thresholding") {
  RngState rng(6);
  const Tensor y = randn({8, 8}, DType::Real, rng);
  AlgoConfig cfg;
  cfg.tol = 1e-13;
  cfg.max_iter = 2000;
  const auto r = drs(y, make_denoising({8, 8}), DataFidelity::l2(), Prior::l1(0.3), cfg);
  CHECK(max_abs(r.x - soft_threshold(y, 0.3)) <= 1e-8);
  CHECK_THROWS_AS(drs(y, make_denoising({8, 8}), DataFidelity::poisson_nll(0.1), Prior::l1(), cfg),
                  CapabilityError);
}

TEST_CASE("drs fixed-point residual trends downwards") {
  const BlurTv b;
  AlgoConfig cfg;
  cfg.max_iter = 300;
  cfg.tol = 0.0;
  const auto r = drs(b.y, b.physics, DataFidelity::l2(), b.prior, cfg);
  const auto& c = r.log.iterate_change;
  auto window_mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t k = from; k < from + 20; ++k) s += c[k];
    return s / 20.0;
  };
  for (std::size_t from = 0; from + 40 <= c.size(); from += 20) CHECK(window_mean(from + 20) <= window_mean(from));
}

TEST_CASE("pdhg: l1 inpainting reproduces observed pixels") {
  // Wavelet sparsity keeps the prox exact, so only pdhg's own accuracy matters.
  RngState rng(7);
  const Tensor x = shepp_phantom(16);
  const Physics p = make_inpainting(gen_bernoulli_mask({16, 16}, 0.6, rng));
  const Tensor y = p.apply(x);
  AlgoConfig cfg;
  cfg.max_iter = 5000;
  cfg.tol = 1e-10;
  const auto r = pdhg(y, p, DataFidelity::l1(), Prior::wavelet_l1(0.05, 2), cfg);
  CHECK(max_abs(p.apply(r.x) - y) <= 1e-6);

  AlgoConfig bad;
  bad.tau = 1.0;
  bad.sigma_dual = 1.5;
  CHECK_THROWS_AS(pdhg(y, p, DataFidelity::l1(), Prior::tv(0.05), bad), ValidationError);
  CHECK_THROWS_AS(pgd(y, p, DataFidelity::l1(), Prior::tv(0.05)), CapabilityError);
}

TEST_CASE("step validation and auto-step safety") {
  const TikhonovCase c = tikhonov_case(8, 0.1);
  AlgoConfig cfg;
  cfg.step = 100.0;
  CHECK_THROWS_AS(pgd(c.y, c.physics, DataFidelity::l2(), Prior::tikhonov(0.1), cfg), ValidationError);
  cfg.step = -1.0;
  CHECK_THROWS_AS(fista(c.y, c.physics, DataFidelity::l2(), Prior::tikhonov(0.1), cfg), ValidationError);

  for (std::uint64_t s = 0; s < 5; ++s) {
    const TikhonovCase r = tikhonov_case(100 + s, 0.0);
    AlgoConfig a;
    a.max_iter = 1000;
    a.tol = 0.0;
    for (Algorithm al : {Algorithm::Pgd, Algorithm::Fista}) {
      a.algorithm = al;
      CHECK_NOTHROW(CHECK(all_finite(reconstruct(r.y, r.physics, DataFidelity::l2(), Prior::l1(0.01), a).x)));
    }
  }
}

TEST_CASE("pnp with a gaussian smoother reaches a fixed point") {
  const BlurTv b;
  for (Algorithm a : {Algorithm::Pgd, Algorithm::Fista, Algorithm::Admm, Algorithm::Drs}) {
    AlgoConfig cfg;
    cfg.algorithm = a;
    cfg.max_iter = 3000;
    const auto r = reconstruct(b.y, b.physics, DataFidelity::l2(), PnpDenoiser{Denoiser::gaussian_smoother(1.0), 0.05},
                               cfg);
    CAPTURE(to_string(a));
    CHECK(r.log.converged);
    CHECK(r.log.iterate_change.back() < 1e-6);
  }
}

TEST_CASE("artifact removal") {
  RngState rng(9);
  const Tensor y = rand_uniform({8, 8}, rng);
  const Denoiser narrow = Denoiser::gaussian_smoother(1e-6);
  CHECK(max_abs(artifact_removal(narrow, y, make_denoising({8, 8}), 0.1) - y) <= 1e-12);

  const Physics inp = make_inpainting(gen_bernoulli_mask({8, 8}, 0.5, rng));
  const Tensor yi = inp.apply(rand_uniform({8, 8}, rng));
  const Denoiser smooth = Denoiser::gaussian_smoother(1.0);
  const Tensor got = artifact_removal(smooth, yi, inp, 0.1, BackprojectionMode::Pinv);
  CHECK(max_abs(inp.apply(got) - inp.apply(denoise(smooth, yi, 0.1))) <= 1e-10);

  const Physics tomo = make_tomography(uniform_angles(20), 16);
  const Tensor s = tomo.apply(disc_phantom(16));
  CHECK(max_abs(artifact_removal(smooth, s, tomo, 0.1, BackprojectionMode::Pinv) - denoise(smooth, fbp(tomo, s), 0.1)) ==
        0.0);
  CHECK(max_abs(artifact_removal(smooth, s, tomo, 0.1) - denoise(smooth, tomo.adjoint(s), 0.1)) == 0.0);
}
