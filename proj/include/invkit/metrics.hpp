#pragma once

#include <string>

#include "invkit/tensor.hpp"

namespace invkit {

struct MetricConfig {
  double data_range = 1.0;
  bool normalize_inputs = false;  // min-max each image to [0, 1] first
  bool complex_magnitude = false; // compare |x̂| and |x|
};

double mse(const Tensor& x_hat, const Tensor& x);
double mae(const Tensor& x_hat, const Tensor& x);

/// 10·log10(L²/mse); +inf when the images are identical.
double psnr(const Tensor& x_hat, const Tensor& x, const MetricConfig& cfg = {});

/// Single-scale SSIM with an 11×11 Gaussian window (σ 1.5), averaged over the
/// valid region and over planes. Complex inputs need complex_magnitude.
double ssim(const Tensor& x_hat, const Tensor& x, const MetricConfig& cfg = {});

/// Evaluates "mse", "mae", "psnr" or "ssim" (mse/mae also honor cfg).
double metric_by_name(const std::string& name, const Tensor& x_hat, const Tensor& x, const MetricConfig& cfg = {});
bool is_metric_name(const std::string& name);

/// CSV cell: 6 significant digits, "inf"/"-inf"/"nan" spelled out.
std::string format_value(double v);

} // namespace invkit
