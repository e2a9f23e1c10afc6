#pragma once

#include <string>

#include "invkit/rng.hpp"
#include "invkit/tensor.hpp"

namespace invkit {

/// Measurement noise N_σ.
struct NoiseModel {
  enum class Kind { None, Gaussian, Poisson, PoissonGaussian, Uniform, Gamma };

  Kind kind = Kind::None;
  double sigma = 0.0;         // gaussian, poisson_gaussian
  double gain = 1.0;          // poisson, poisson_gaussian: y = gain·Poisson(z/gain)
  double amplitude = 0.0;     // uniform on (-a, a)
  double concentration = 1.0; // gamma: z ⊙ Γ(k, 1/k)

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma);
  static NoiseModel poisson(double gain);
  static NoiseModel poisson_gaussian(double gain, double sigma);
  static NoiseModel uniform(double amplitude);
  static NoiseModel gamma(double concentration);

  void validate() const;
};

std::string to_string(NoiseModel::Kind kind);
NoiseModel::Kind noise_kind_from_string(const std::string& name);

/// Draws y ~ N_σ(z). Complex Gaussian noise has E|ε|² = σ².
Tensor noise_apply(const NoiseModel& model, const Tensor& z, RngState& rng);

/// Data-fidelity term f(y, z), scaled by `weight`.
struct DataFidelity {
  enum class Kind { L2, L1, PoissonNll };

  Kind kind = Kind::L2;
  double weight = 1.0;
  double background = 0.0; // poisson_nll β

  static DataFidelity l2(double weight = 1.0) { return {Kind::L2, weight, 0.0}; }
  static DataFidelity l1(double weight = 1.0) { return {Kind::L1, weight, 0.0}; }
  static DataFidelity poisson_nll(double background = 0.0, double weight = 1.0) {
    return {Kind::PoissonNll, weight, background};
  }
};

std::string to_string(DataFidelity::Kind kind);
DataFidelity::Kind fidelity_kind_from_string(const std::string& name);

bool is_smooth(const DataFidelity& f);

/// Lipschitz constant of ∇_z f(y, ·); throws CapabilityError when f is not
/// smooth or the constant is unbounded (poisson_nll without background).
double lipschitz(const DataFidelity& f, const Tensor& y);

// l2: ½‖y−z‖²; l1: ‖y−z‖₁; poisson_nll: Σ z+β − y·log(z+β) with 0·log 0 = 0.
double fidelity_eval(const DataFidelity& f, const Tensor& y, const Tensor& z);
Tensor fidelity_grad(const DataFidelity& f, const Tensor& y, const Tensor& z);
/// argmin_z γ·f(y, z) + ½‖z − v‖².
Tensor fidelity_prox(const DataFidelity& f, const Tensor& y, const Tensor& v, double gamma);

} // namespace invkit
