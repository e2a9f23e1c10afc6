#include "invkit/fidelity.hpp"

#include <cmath>

#include "invkit/priors.hpp"

namespace invkit {

NoiseModel NoiseModel::gaussian(double sigma) {
  NoiseModel m;
  m.kind = Kind::Gaussian;
  m.sigma = sigma;
  m.validate();
  return m;
}

NoiseModel NoiseModel::poisson(double gain) {
  NoiseModel m;
  m.kind = Kind::Poisson;
  m.gain = gain;
  m.validate();
  return m;
}

NoiseModel NoiseModel::poisson_gaussian(double gain, double sigma) {
  NoiseModel m;
  m.kind = Kind::PoissonGaussian;
  m.gain = gain;
  m.sigma = sigma;
  m.validate();
  return m;
}

NoiseModel NoiseModel::uniform(double amplitude) {
  NoiseModel m;
  m.kind = Kind::Uniform;
  m.amplitude = amplitude;
  m.validate();
  return m;
}

NoiseModel NoiseModel::gamma(double concentration) {
  NoiseModel m;
  m.kind = Kind::Gamma;
  m.concentration = concentration;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  if (!(sigma >= 0.0)) throw ValidationError("noise: sigma must be >= 0");
  if (!(gain > 0.0)) throw ValidationError("noise: gain must be > 0");
  if (!(amplitude >= 0.0)) throw ValidationError("noise: amplitude must be >= 0");
  if (!(concentration > 0.0)) throw ValidationError("noise: concentration must be > 0");
}

std::string to_string(NoiseModel::Kind kind) {
  switch (kind) {
  case NoiseModel::Kind::None: return "none";
  case NoiseModel::Kind::Gaussian: return "gaussian";
  case NoiseModel::Kind::Poisson: return "poisson";
  case NoiseModel::Kind::PoissonGaussian: return "poisson_gaussian";
  case NoiseModel::Kind::Uniform: return "uniform";
  case NoiseModel::Kind::Gamma: return "gamma";
  }
  return "none";
}

NoiseModel::Kind noise_kind_from_string(const std::string& name) {
  for (auto k : {NoiseModel::Kind::None, NoiseModel::Kind::Gaussian, NoiseModel::Kind::Poisson,
                 NoiseModel::Kind::PoissonGaussian, NoiseModel::Kind::Uniform, NoiseModel::Kind::Gamma})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown noise model '" + name + "'");
}

namespace {

void require_nonnegative_real(const Tensor& z, const char* what) {
  if (z.is_complex()) throw DomainError(std::string(what) + " noise requires a real input");
  if (z.size() && z.data().real().minCoeff() < 0.0)
    throw DomainError(std::string(what) + " noise requires a nonnegative input");
}

} // namespace

Tensor noise_apply(const NoiseModel& model, const Tensor& z, RngState& rng) {
  model.validate();
  Tensor y = z;
  switch (model.kind) {
  case NoiseModel::Kind::None:
    break;
  case NoiseModel::Kind::Gaussian:
    if (model.sigma > 0.0) y += model.sigma * randn(z.shape(), z.dtype(), rng);
    break;
  case NoiseModel::Kind::Poisson:
  case NoiseModel::Kind::PoissonGaussian:
    require_nonnegative_real(z, "poisson");
    for (Index i = 0; i < y.size(); ++i) y[i] = model.gain * rng.poisson(z[i].real() / model.gain);
    if (model.kind == NoiseModel::Kind::PoissonGaussian && model.sigma > 0.0)
      y += model.sigma * randn(z.shape(), DType::Real, rng);
    break;
  case NoiseModel::Kind::Uniform:
    for (Index i = 0; i < y.size(); ++i) {
      const double re = (2.0 * rng.uniform() - 1.0) * model.amplitude;
      const double im = z.is_complex() ? (2.0 * rng.uniform() - 1.0) * model.amplitude : 0.0;
      y[i] += cplx(re, im);
    }
    break;
  case NoiseModel::Kind::Gamma:
    require_nonnegative_real(z, "gamma");
    for (Index i = 0; i < y.size(); ++i)
      y[i] = z[i].real() * rng.gamma(model.concentration) / model.concentration;
    break;
  }
  return y;
}

std::string to_string(DataFidelity::Kind kind) {
  switch (kind) {
  case DataFidelity::Kind::L2: return "l2";
  case DataFidelity::Kind::L1: return "l1";
  case DataFidelity::Kind::PoissonNll: return "poisson_nll";
  }
  return "l2";
}

DataFidelity::Kind fidelity_kind_from_string(const std::string& name) {
  for (auto k : {DataFidelity::Kind::L2, DataFidelity::Kind::L1, DataFidelity::Kind::PoissonNll})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown data fidelity '" + name + "'");
}

bool is_smooth(const DataFidelity& f) { return f.kind != DataFidelity::Kind::L1; }

double lipschitz(const DataFidelity& f, const Tensor& y) {
  switch (f.kind) {
  case DataFidelity::Kind::L2:
    return f.weight;
  case DataFidelity::Kind::L1:
    throw CapabilityError("l1 fidelity is not smooth");
  case DataFidelity::Kind::PoissonNll:
    if (!(f.background > 0.0))
      throw CapabilityError("poisson_nll gradient is not Lipschitz without a positive background");
    return f.weight * std::max(y.data().real().maxCoeff(), 0.0) / (f.background * f.background);
  }
  return f.weight;
}

double fidelity_eval(const DataFidelity& f, const Tensor& y, const Tensor& z) {
  require_same_shape(y, z, "fidelity_eval");
  switch (f.kind) {
  case DataFidelity::Kind::L2:
    return 0.5 * f.weight * (z.data() - y.data()).squaredNorm();
  case DataFidelity::Kind::L1:
    return f.weight * (z.data() - y.data()).cwiseAbs().sum();
  case DataFidelity::Kind::PoissonNll: {
    double total = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      const double s = z[i].real() + f.background;
      const double yi = y[i].real();
      if (yi != 0.0) {
        if (!(s > 0.0)) throw DomainError("poisson_nll: z + background must be > 0 where y > 0");
        total += s - yi * std::log(s);
      } else {
        total += s;
      }
    }
    return f.weight * total;
  }
  }
  return 0.0;
}

Tensor fidelity_grad(const DataFidelity& f, const Tensor& y, const Tensor& z) {
  require_same_shape(y, z, "fidelity_grad");
  switch (f.kind) {
  case DataFidelity::Kind::L2:
    return f.weight * (z - y);
  case DataFidelity::Kind::L1:
    throw CapabilityError("l1 fidelity has no gradient");
  case DataFidelity::Kind::PoissonNll: {
    Tensor g(z.shape());
    for (Index i = 0; i < z.size(); ++i) {
      const double s = z[i].real() + f.background;
      if (!(s > 0.0)) throw DomainError("poisson_nll: gradient requires z + background > 0");
      g[i] = f.weight * (1.0 - y[i].real() / s);
    }
    return g;
  }
  }
  return z;
}

Tensor fidelity_prox(const DataFidelity& f, const Tensor& y, const Tensor& v, double gamma) {
  require_same_shape(y, v, "fidelity_prox");
  if (!(gamma > 0.0)) throw ValidationError("fidelity_prox: gamma must be > 0");
  const double g = gamma * f.weight;
  switch (f.kind) {
  case DataFidelity::Kind::L2:
    return (1.0 / (1.0 + g)) * (v + g * y);
  case DataFidelity::Kind::L1:
    return y + soft_threshold(v - y, g);
  case DataFidelity::Kind::PoissonNll: {
    // Positive root of s² + (γ − β − v)s − γy = 0 with s = z + β.
    Tensor z(v.shape());
    for (Index i = 0; i < v.size(); ++i) {
      const double yi = y[i].real();
      if (yi < 0.0) throw DomainError("poisson_nll: measurements must be >= 0");
      const double b = v[i].real() + f.background - g;
      const double disc = std::sqrt(b * b + 4.0 * g * yi);
      const double s = b >= 0.0 ? 0.5 * (b + disc) : (disc - b > 0.0 ? 2.0 * g * yi / (disc - b) : 0.0);
      z[i] = s - f.background;
    }
    return z;
  }
  }
  return v;
}

} // namespace invkit
