#include "invkit/losses.hpp"

#include <cmath>

namespace invkit {

namespace {

double mean_sq(const Tensor& t) { return squared_norm(t) / static_cast<double>(t.size()); }

void require_domain(const Tensor& x_hat, const Physics& physics, const char* what) {
  if (x_hat.shape() != physics.domain().shape)
    throw ShapeError(std::string(what) + ": reconstruction " + to_string(x_hat.shape()) +
                     " does not match the physics domain " + to_string(physics.domain().shape));
}

} // namespace

LossValue sup_mse(const Tensor& x_hat, const Tensor& x) {
  require_same_shape(x_hat, x, "sup_mse");
  LossValue v;
  v.value = mean_sq(x_hat - x);
  return v;
}

LossValue sure_gaussian(const Reconstructor& model, const Tensor& y, double sigma, RngState& rng,
                        SureOptions opts) {
  if (!(sigma > 0.0)) throw ValidationError("sure_gaussian: sigma must be > 0");
  if (opts.probes < 1) throw ValidationError("sure_gaussian: probes must be >= 1");
  const double tau = opts.probe_step.value_or(std::max(0.01 * max_abs(y), 1e-6));
  if (!(tau > 0.0)) throw ValidationError("sure_gaussian: probe step must be > 0");

  const Physics identity = make_denoising(y.shape());
  const Tensor dy = model(y, identity);
  require_same_shape(dy, y, "sure_gaussian");
  const double n = static_cast<double>(y.size());

  double div = 0.0;
  for (int p = 0; p < opts.probes; ++p) {
    Tensor b(y.shape(), y.dtype());
    for (Index i = 0; i < b.size(); ++i) b[i] = rng.rademacher();
    const Tensor diff = model(y + tau * b, identity) - dy;
    div += dot(b, diff).real() / tau;
  }
  div /= opts.probes;

  LossValue v;
  v.components["residual"] = mean_sq(dy - y);
  v.components["-sigma2"] = -sigma * sigma;
  v.components["divergence"] = 2.0 * sigma * sigma * div / n;
  v.value = v.components["residual"] + v.components["-sigma2"] + v.components["divergence"];
  v.samples_used = opts.probes;
  return v;
}

LossValue r2r_gaussian(const Reconstructor& model, const Tensor& y, const Physics& physics, double sigma,
                       RngState& rng, double alpha, int draws) {
  if (!(sigma > 0.0)) throw ValidationError("r2r_gaussian: sigma must be > 0");
  if (!(alpha > 0.0)) throw ValidationError("r2r_gaussian: alpha must be > 0");
  if (draws < 1) throw ValidationError("r2r_gaussian: draws must be >= 1");
  double total = 0.0;
  for (int d = 0; d < draws; ++d) {
    const Tensor w = sigma * randn(y.shape(), y.dtype(), rng);
    const Tensor x_hat = model(y + alpha * w, physics);
    require_domain(x_hat, physics, "r2r_gaussian");
    total += mean_sq(physics.apply(x_hat) - (y - (1.0 / alpha) * w));
  }
  LossValue v;
  v.value = total / draws;
  v.samples_used = draws;
  return v;
}

LossValue splitting_loss(const Reconstructor& model, const Tensor& y, const Physics& physics, RngState& rng,
                         double split_ratio) {
  if (!physics.is_maskable())
    throw CapabilityError("splitting loss needs masked physics (inpainting or mri), got '" + physics.descriptor() +
                          "'");
  if (!(split_ratio > 0.0 && split_ratio <= 1.0)) throw ValidationError("splitting_loss: split ratio must be in (0, 1]");
  const Tensor& mask = physics.mask();
  require_same_shape(mask, y, "splitting_loss");

  Tensor keep(mask.shape()), held(mask.shape());
  Index held_count = 0;
  for (Index i = 0; i < mask.size(); ++i) {
    const bool in_first = rng.bernoulli(split_ratio);
    if (mask[i].real() == 0.0) continue;
    if (in_first) {
      keep[i] = 1.0;
    } else {
      held[i] = 1.0;
      ++held_count;
    }
  }
  if (held_count == 0) throw ValidationError("empty validation split");

  const Physics first = physics.with_mask(keep);
  const Tensor x_hat = model(hadamard(keep, y), first);
  require_domain(x_hat, physics, "splitting_loss");
  LossValue v;
  v.value = squared_norm(hadamard(held, physics.apply(x_hat) - y)) / static_cast<double>(held_count);
  return v;
}

LossValue ei_loss(const Reconstructor& model, const Tensor& y, const Physics& physics, const GroupSampler& sampler,
                  RngState& rng) {
  const Tensor x1 = model(y, physics);
  require_domain(x1, physics, "ei_loss");
  const Tensor x2 = apply_transform(sampler(rng), x1);
  const Tensor x3 = model(physics.apply(x2), physics);
  require_domain(x3, physics, "ei_loss");
  LossValue v;
  v.value = mean_sq(x3 - x2);
  return v;
}

} // namespace invkit
