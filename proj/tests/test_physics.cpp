#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invkit/generators.hpp"
#include "invkit/phantoms.hpp"
#include "invkit/physics.hpp"
#include "invkit/serialize.hpp"
#include "invkit/solvers.hpp"
#include "oracles.hpp"

using namespace invkit;

namespace {

// Brute-force circular convolution with the kernel centered at (kh/2, kw/2).
Eigen::MatrixXd circular_convolution(const Eigen::MatrixXd& x, const Eigen::MatrixXd& k) {
  const Index h = x.rows(), w = x.cols(), ch = k.rows() / 2, cw = k.cols() / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j)
      for (Index a = 0; a < k.rows(); ++a)
        for (Index b = 0; b < k.cols(); ++b)
          out(i, j) += k(a, b) * x(((i - (a - ch)) % h + h) % h, ((j - (b - cw)) % w + w) % w);
  return out;
}

Eigen::MatrixXd circular_correlation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& k) {
  const Index h = x.rows(), w = x.cols(), ch = k.rows() / 2, cw = k.cols() / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j)
      for (Index a = 0; a < k.rows(); ++a)
        for (Index b = 0; b < k.cols(); ++b)
          out(i, j) += k(a, b) * x(((i + (a - ch)) % h + h) % h, ((j + (b - cw)) % w + w) % w);
  return out;
}

} // namespace

TEST_CASE("denoising is the identity") {
  RngState rng(1);
  const Physics p = make_denoising({6, 5});
  const Tensor x = randn({6, 5}, DType::Real, rng);
  CHECK(norm(p.forward(x, rng) - x) == 0.0);
  CHECK(norm(p.adjoint(x) - x) == 0.0);
  CHECK(operator_norm(p.map(), rng).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.map().traits().is_unitary);
}

TEST_CASE("inpainting") {
  RngState rng(2);
  const Tensor x = randn({32, 32}, DType::Real, rng);
  CHECK(norm(make_inpainting(Tensor::constant({32, 32}, 1.0)).apply(x) - x) == 0.0);
  const Tensor mask = gen_bernoulli_mask({32, 32}, 0.3, rng);
  const Physics p = make_inpainting(mask);
  const Tensor y = p.apply(Tensor::constant({32, 32}, 1.0));
  Index nonzero = 0;
  for (Index i = 0; i < y.size(); ++i) nonzero += y[i] != cplx(0.0);
  CHECK(static_cast<double>(nonzero) == mask.data().real().sum());
  const Tensor u = randn({32, 32}, DType::Real, rng);
  CHECK(std::abs(dot(p.apply(x), u) - dot(x, p.apply(u))) < 1e-12);
  CHECK(p.map().traits().is_projection);
  Tensor bad = mask;
  bad[0] = 0.5;
  CHECK_THROWS_AS(make_inpainting(bad), ValidationError);
}

TEST_CASE("blur") {
  RngState rng(3);
  const Tensor x = randn({8, 8}, DType::Real, rng);
  const Tensor delta = Tensor::constant({1, 1}, 1.0);
  CHECK(norm(make_blur(delta, {8, 8}).apply(x) - x) < 1e-12);
  Tensor delta3({3, 3});
  delta3[4] = 1.0;
  CHECK(norm(make_blur(delta3, {8, 8}).apply(x) - x) < 1e-12);

  const Tensor k = gen_motion_kernel(3, rng);
  const Physics b = make_blur(k, {8, 8});
  const Tensor c = b.apply(Tensor::constant({8, 8}, 0.7));
  CHECK(max_abs(c - Tensor::constant({8, 8}, 0.7)) < 1e-12);

  const Eigen::MatrixXd km = oracle::as_matrix(k), xm = oracle::as_matrix(x);
  CHECK((oracle::as_matrix(b.apply(x)) - circular_convolution(xm, km)).norm() < 1e-12);
  CHECK((oracle::as_matrix(b.adjoint(x)) - circular_correlation(xm, km)).norm() < 1e-12);

  CHECK_THROWS_AS(make_blur(Tensor::constant({2, 3}, 1.0 / 6), {8, 8}), ValidationError);
  CHECK_THROWS_AS(make_blur(gen_gaussian_kernel(2.0, 11), {8, 8}), ValidationError);

  // Multi-channel images are blurred per plane.
  const Tensor rgb = randn({3, 8, 8}, DType::Real, rng);
  const Tensor out = make_blur(k, {3, 8, 8}).apply(rgb);
  for (Index p = 0; p < 3; ++p) {
    Tensor plane({8, 8});
    plane.plane(0) = rgb.plane(p);
    CHECK((Eigen::MatrixXcd(out.plane(p)) - Eigen::MatrixXcd(b.apply(plane).plane(0))).norm() < 1e-12);
  }
}

TEST_CASE("fourier-diagonal operators: norm is the max spectral modulus") {
  RngState rng(4);
  const Physics b = make_blur(gen_gaussian_kernel(1.0, 5), {16, 16});
  const double want = b.map().traits().spectral_diagonal->data().cwiseAbs().maxCoeff();
  CHECK(operator_norm(b.map(), rng, {1e-12, 5000}).value == doctest::Approx(want).epsilon(1e-6));
  const Physics m = make_mri(Tensor::constant({8, 8}, 1.0));
  CHECK(operator_norm(m.map(), rng).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("downsampling") {
  RngState rng(5);
  const Tensor x = randn({12, 12}, DType::Real, rng);
  CHECK(norm(make_downsampling(1, 0.0, {12, 12}).apply(x) - x) == 0.0);
  const Physics d = make_downsampling(3, 1.0, {12, 12});
  CHECK(d.range().shape == Shape{4, 4});
  CHECK(max_abs(d.apply(Tensor::constant({12, 12}, 0.25)) - Tensor::constant({4, 4}, 0.25)) < 1e-12);
  CHECK(adjoint_test(d.map(), rng) <= 1e-10);
  CHECK_THROWS_AS(make_downsampling(5, 1.0, {12, 12}), ValidationError);

  // No anti-aliasing: plain decimation from index 0.
  const Tensor y = make_downsampling(2, 0.0, {12, 12}).apply(x);
  CHECK(y[1 * 6 + 2] == x[2 * 12 + 4]);
}

TEST_CASE("mri") {
  RngState rng(6);
  const Tensor x = randn({8, 8}, DType::Complex, rng);
  const Physics full = make_mri(Tensor::constant({8, 8}, 1.0));
  CHECK(std::abs(norm(full.apply(x)) - norm(x)) < 1e-12);

  const Physics m = make_mri(gen_cartesian_mri_mask({8, 8}, 2.0, 0.25, rng));
  const Tensor once = m.adjoint(m.apply(x));
  const Tensor twice = m.adjoint(m.apply(once));
  CHECK(norm(twice - once) <= 1e-10 * norm(once));
  CHECK(norm(make_mri(Tensor({8, 8})).apply(x)) == 0.0);

  try {
    m.apply(randn({8, 8}, DType::Real, rng));
    FAIL("real image accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("as_complex") != std::string::npos);
  }
}

TEST_CASE("tomography") {
  RngState rng(7);
  const Physics t = make_tomography(uniform_angles(30), 20);
  CHECK(tomography_detector_count(20) == 29);
  CHECK(tomography_detector_count(128) == 183);
  CHECK(t.range().shape == Shape{30, 29});
  CHECK(norm(t.apply(Tensor({20, 20}))) == 0.0);
  CHECK(adjoint_test(t.map(), rng, 20) <= 1e-10);

  // Odd size: the center pixel lies exactly on the rotation center.
  const Physics odd = make_tomography(uniform_angles(17), 21);
  Tensor impulse({21, 21});
  impulse[10 * 21 + 10] = 1.0;
  const Tensor s = odd.apply(impulse);
  const Index d = odd.range().shape[1];
  for (Index a = 0; a < 17; ++a) CHECK(s.data().segment(a * d, d).real().sum() == doctest::Approx(1.0).epsilon(1e-14));

  const Tensor x = rand_uniform({20, 20}, rng);
  const Tensor y = t.apply(x);
  const double mass = x.data().real().sum();
  for (Index a = 0; a < 30; ++a) CHECK(std::abs(y.data().segment(a * 29, 29).real().sum() - mass) <= 1e-8 * mass);
  CHECK_THROWS_AS(make_tomography({}, 20), ValidationError);
}

TEST_CASE("filtered backprojection") {
  RngState rng(8);
  const Physics t = make_tomography(uniform_angles(24), 16);
  CHECK(norm(fbp(t, Tensor(t.range().shape))) == 0.0);
  const Tensor a = randn(t.range().shape, DType::Real, rng), b = randn(t.range().shape, DType::Real, rng);
  CHECK(norm(fbp(t, 2.0 * a - 0.5 * b) - (2.0 * fbp(t, a) - 0.5 * fbp(t, b))) < 1e-12 * norm(fbp(t, a)));
  CHECK_THROWS_AS(fbp(make_denoising({16, 16}), a), CapabilityError);
  CHECK_THROWS_AS(fbp(t, Tensor({3, 3})), ShapeError);

  // A disc reconstructs close to its true intensity in the interior.
  const Tensor x = disc_phantom(64);
  const Physics full = make_tomography(uniform_angles(90), 64);
  const Tensor rec = fbp(full, full.apply(x));
  CHECK(rec[32 * 64 + 32].real() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("compressed sensing") {
  RngState r1(9), r2(9);
  const Physics a = make_compressed_sensing(200, {10, 10}, r1);
  const Physics b = make_compressed_sensing(200, {10, 10}, r2);
  const auto& ma = std::get<CompressedSensingParams>(a.params()).matrix;
  CHECK(ma == std::get<CompressedSensingParams>(b.params()).matrix);
  CHECK(ma.colwise().squaredNorm().mean() == doctest::Approx(1.0).epsilon(0.1));
  RngState rng(10);
  CHECK(adjoint_test(a.map(), rng) <= 1e-12);
  CHECK(a.range().shape == Shape{200});
}

TEST_CASE("generators") {
  RngState rng(11);
  const Tensor g = gen_gaussian_kernel(1e-6, 5);
  CHECK(g[12].real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(gen_gaussian_kernel(1.3, 7).data().sum() - 1.0) < 1e-12);
  CHECK_THROWS_AS(gen_gaussian_kernel(1.0, 4), ValidationError);

  RngState m1(12), m2(12);
  const Tensor k1 = gen_motion_kernel(6, m1), k2 = gen_motion_kernel(6, m2);
  CHECK(k1.shape() == k2.shape());
  CHECK(norm(k1 - k2) == 0.0);
  CHECK(std::abs(k1.data().sum() - 1.0) < 1e-12);
  CHECK(k1.height() % 2 == 1);
  CHECK(k1.width() % 2 == 1);

  CHECK(gen_bernoulli_mask({5, 5}, 1.0, rng).data().real().minCoeff() == 1.0);

  const Index w = 64;
  const double r = 4.0, c = 0.08;
  const Index center = static_cast<Index>(std::ceil(c * w));
  double total = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Tensor m = gen_cartesian_mri_mask({8, w}, r, c, rng);
    for (Index j = w / 2 - center / 2; j < w / 2 - center / 2 + center; ++j) REQUIRE(m[j] == cplx(1.0));
    Index on = 0;
    for (Index j = 0; j < w; ++j) on += m[j] == cplx(1.0);
    for (Index i = 1; i < 8; ++i)
      for (Index j = 0; j < w; ++j) REQUIRE(m[i * w + j] == m[j]);
    total += static_cast<double>(on);
  }
  const double p = (w / r - center) / static_cast<double>(w - center);
  const double sd = std::sqrt((w - center) * p * (1 - p) / 100.0);
  CHECK(std::abs(total / 100.0 - w / r) <= 3 * sd);
  CHECK_THROWS_AS(gen_cartesian_mri_mask({8, 16}, 8.0, 0.5, rng), ValidationError);
}

TEST_CASE("forward adds noise to the exact map output") {
  RngState rng(13);
  const Physics b = make_blur(gen_gaussian_kernel(1.0, 5), {8, 8}, NoiseModel::gaussian(0.1));
  const Tensor x = rand_uniform({8, 8}, rng);
  RngState n1(14), n2(14);
  CHECK(norm(b.forward(x, n1) - noise_apply(b.noise(), b.apply(x), n2)) == 0.0);
  RngState n3(15);
  CHECK(norm(b.with_noise({}).forward(x, n3) - b.apply(x)) == 0.0);
}

TEST_CASE("params round-trip through JSON") {
  RngState rng(16);
  const Shape img{8, 8};
  std::vector<Physics> all{
      make_denoising(img),
      make_inpainting(gen_bernoulli_mask(img, 0.5, rng)),
      make_blur(gen_motion_kernel(3, rng), img),
      make_downsampling(2, 0.7, img),
      make_mri(gen_cartesian_mri_mask(img, 2.0, 0.2, rng)),
      make_tomography({0.0, 33.3, 91.0}, 8),
      make_compressed_sensing(20, img, rng),
  };
  for (const auto& p : all) {
    const auto j = nlohmann::json::parse(physics_params_to_json(p.params()).dump());
    const Physics q(physics_params_from_json(j), p.noise());
    CHECK(q.descriptor() == p.descriptor());
    const Tensor x = randn(img, p.domain().dtype, rng);
    CHECK(norm(q.apply(x) - p.apply(x)) <= 1e-12 * std::max(norm(p.apply(x)), 1.0));
  }
  const NoiseModel pg = NoiseModel::poisson_gaussian(0.5, 0.1);
  const NoiseModel back = noise_from_json(nlohmann::json::parse(noise_to_json(pg).dump()));
  CHECK(back.kind == pg.kind);
  CHECK(back.gain == pg.gain);
  CHECK(back.sigma == pg.sigma);
  CHECK_THROWS_AS(physics_params_from_json(nlohmann::json{{"type", "warp"}}), FormatError);
}

TEST_CASE("masks can be swapped on maskable physics only") {
  RngState rng(17);
  const Physics p = make_inpainting(gen_bernoulli_mask({6, 6}, 0.5, rng));
  CHECK(p.is_maskable());
  const Tensor other = gen_bernoulli_mask({6, 6}, 0.5, rng);
  CHECK(norm(p.with_mask(other).mask() - other) == 0.0);
  CHECK_FALSE(make_denoising({6, 6}).is_maskable());
  CHECK_THROWS_AS(make_denoising({6, 6}).mask(), CapabilityError);
}
