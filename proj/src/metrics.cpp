#include "invkit/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace invkit {

namespace {

constexpr Index kWindow = 11;
constexpr double kWindowSigma = 1.5;

Tensor min_max(const Tensor& t) {
  const Eigen::VectorXd v = t.real();
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  if (hi == lo) return Tensor(t.shape());
  return Tensor::from_real(t.shape(), (v.array() - lo) / (hi - lo));
}

// Applies the config to both images and returns them as comparable tensors.
std::pair<Tensor, Tensor> prepare(const Tensor& a, const Tensor& b, const MetricConfig& cfg, const char* what) {
  require_same_shape(a, b, what);
  if (!(cfg.data_range > 0.0)) throw ValidationError(std::string(what) + ": data_range must be > 0");
  Tensor pa = a, pb = b;
  if (cfg.complex_magnitude) {
    pa = a.abs();
    pb = b.abs();
  }
  if (cfg.normalize_inputs) {
    if (pa.is_complex() || pb.is_complex())
      throw ValidationError(std::string(what) + ": normalization of complex images needs complex_magnitude");
    pa = min_max(pa);
    pb = min_max(pb);
  }
  return {pa, pb};
}

Eigen::VectorXd gaussian_window() {
  Eigen::VectorXd g(kWindow);
  for (Index i = 0; i < kWindow; ++i) {
    const double d = static_cast<double>(i - kWindow / 2);
    g[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
  }
  return g / g.sum();
}

// Separable valid-region filtering of one plane.
Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& img, const Eigen::VectorXd& g) {
  const Index oh = img.rows() - kWindow + 1, ow = img.cols() - kWindow + 1;
  Eigen::MatrixXd rows(oh, img.cols());
  for (Index i = 0; i < oh; ++i) rows.row(i) = g.transpose() * img.middleRows(i, kWindow);
  Eigen::MatrixXd out(oh, ow);
  for (Index j = 0; j < ow; ++j) out.col(j) = rows.middleCols(j, kWindow) * g;
  return out;
}

} // namespace

double mse(const Tensor& x_hat, const Tensor& x) {
  require_same_shape(x_hat, x, "mse");
  if (x.size() == 0) throw ValidationError("mse: empty images");
  return squared_norm(x_hat - x) / static_cast<double>(x.size());
}

double mae(const Tensor& x_hat, const Tensor& x) {
  require_same_shape(x_hat, x, "mae");
  if (x.size() == 0) throw ValidationError("mae: empty images");
  return (x_hat.data() - x.data()).cwiseAbs().sum() / static_cast<double>(x.size());
}

double psnr(const Tensor& x_hat, const Tensor& x, const MetricConfig& cfg) {
  const auto [a, b] = prepare(x_hat, x, cfg, "psnr");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(cfg.data_range * cfg.data_range / m);
}

double ssim(const Tensor& x_hat, const Tensor& x, const MetricConfig& cfg) {
  const auto [a, b] = prepare(x_hat, x, cfg, "ssim");
  if (a.is_complex() || b.is_complex()) throw ValidationError("ssim: complex images need complex_magnitude");
  if (a.shape().size() < 2 || a.height() < kWindow || a.width() < kWindow)
    throw ValidationError("ssim: images must be at least 11×11, got " + to_string(a.shape()));
  const double c1 = std::pow(0.01 * cfg.data_range, 2), c2 = std::pow(0.03 * cfg.data_range, 2);
  const Eigen::VectorXd g = gaussian_window();
  double total = 0.0;
  for (Index p = 0; p < a.planes(); ++p) {
    const Eigen::MatrixXd u = a.plane(p).real(), v = b.plane(p).real();
    const Eigen::ArrayXXd mu_u = filter_valid(u, g).array(), mu_v = filter_valid(v, g).array();
    const Eigen::ArrayXXd uu = filter_valid(u.cwiseProduct(u), g).array() - mu_u * mu_u;
    const Eigen::ArrayXXd vv = filter_valid(v.cwiseProduct(v), g).array() - mu_v * mu_v;
    const Eigen::ArrayXXd uv = filter_valid(u.cwiseProduct(v), g).array() - mu_u * mu_v;
    const Eigen::ArrayXXd map =
        ((2.0 * mu_u * mu_v + c1) * (2.0 * uv + c2)) / ((mu_u * mu_u + mu_v * mu_v + c1) * (uu + vv + c2));
    total += map.mean();
  }
  return total / static_cast<double>(a.planes());
}

bool is_metric_name(const std::string& name) {
  return name == "mse" || name == "mae" || name == "psnr" || name == "ssim";
}

double metric_by_name(const std::string& name, const Tensor& x_hat, const Tensor& x, const MetricConfig& cfg) {
  if (name == "psnr") return psnr(x_hat, x, cfg);
  if (name == "ssim") return ssim(x_hat, x, cfg);
  if (name == "mse" || name == "mae") {
    const auto [a, b] = prepare(x_hat, x, cfg, name.c_str());
    return name == "mse" ? mse(a, b) : mae(a, b);
  }
  throw ConfigError("unknown metric '" + name + "'");
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace invkit
