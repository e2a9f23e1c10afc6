#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "invkit/metrics.hpp"
#include "invkit/rng.hpp"
#include "oracles.hpp"

using namespace invkit;

TEST_CASE("mse and mae") {
  RngState rng(1);
  const Tensor x = rand_uniform({6, 6}, rng);
  CHECK(mse(x, x) == 0.0);
  CHECK(mae(x, x) == 0.0);
  const Tensor off = x + Tensor::constant({6, 6}, 0.5);
  CHECK(mse(off, x) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(mae(off, x) == doctest::Approx(0.5).epsilon(1e-14));
  const Tensor z = rand_uniform({6, 6}, rng);
  double s2 = 0.0, s1 = 0.0;
  for (Index i = 0; i < 36; ++i) {
    s2 += std::pow(x[i].real() - z[i].real(), 2);
    s1 += std::abs(x[i].real() - z[i].real());
  }
  CHECK(mse(x, z) == doctest::Approx(s2 / 36).epsilon(1e-14));
  CHECK(mae(x, z) == doctest::Approx(s1 / 36).epsilon(1e-14));
  CHECK_THROWS_AS(mse(x, Tensor({5, 5})), ShapeError);
}

TEST_CASE("psnr") {
  RngState rng(2);
  const Tensor x = rand_uniform({16, 16}, rng);
  CHECK(std::abs(psnr(x + Tensor::constant({16, 16}, 0.5), x) - 6.0206) <= 1e-4);
  CHECK(psnr(x, x) == std::numeric_limits<double>::infinity());
  const Tensor n = x + 0.05 * randn({16, 16}, DType::Real, rng);
  MetricConfig two;
  two.data_range = 2.0;
  CHECK(psnr(2.0 * n, 2.0 * x, two) == doctest::Approx(psnr(n, x)).epsilon(1e-13));
  CHECK(psnr(x + 0.1 * randn({16, 16}, DType::Real, rng), x) < psnr(n, x));
  CHECK(format_value(psnr(x, x)) == "inf");
  CHECK(format_value(1.0 / 3.0) == "0.333333");
}

TEST_CASE("ssim: identity, symmetry and the reference oracle") {
  RngState rng(3);
  for (int t = 0; t < 5; ++t) {
    const Tensor a = rand_uniform({32, 32}, rng);
    const Tensor b = rand_uniform({32, 32}, rng);
    CHECK(ssim(a, a) == 1.0);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-12);
    const Tensor c = a + 0.1 * randn({32, 32}, DType::Real, rng);
    CHECK(std::abs(ssim(c, a) - oracle::ssim_two_pass(oracle::as_matrix(c), oracle::as_matrix(a))) <= 1e-6);
    CHECK(std::abs(ssim(b, a) - oracle::ssim_two_pass(oracle::as_matrix(b), oracle::as_matrix(a))) <= 1e-6);
  }
  CHECK_THROWS_AS(ssim(Tensor({10, 20}), Tensor({10, 20})), ValidationError);
}

TEST_CASE("ssim: inverted contrast is negative") {
  Tensor x({16, 16});
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) x[i * 16 + j] = ((i + j) % 2) ? 0.8 : 0.2;
  CHECK(ssim(Tensor::constant({16, 16}, 1.0) - x, x) < 0.0);
}

TEST_CASE("complex magnitude and normalization") {
  RngState rng(4);
  const Tensor a = randn({12, 12}, DType::Complex, rng), b = randn({12, 12}, DType::Complex, rng);
  MetricConfig mag;
  mag.complex_magnitude = true;
  CHECK(psnr(a, b, mag) == psnr(a.abs(), b.abs()));
  CHECK(ssim(a, b, mag) == ssim(a.abs(), b.abs()));
  CHECK_THROWS_AS(ssim(a, b), ValidationError);

  const Tensor x = rand_uniform({12, 12}, rng);
  MetricConfig norm_cfg;
  norm_cfg.normalize_inputs = true;
  CHECK(psnr(3.0 * x + Tensor::constant({12, 12}, 1.0), x, norm_cfg) > 250.0);
  CHECK(metric_by_name("ssim", x, x) == 1.0);
  CHECK(is_metric_name("mae"));
  CHECK_FALSE(is_metric_name("lpips"));
}
