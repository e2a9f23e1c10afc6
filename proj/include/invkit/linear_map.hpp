#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invkit/rng.hpp"
#include "invkit/tensor.hpp"

namespace invkit {

struct Space {
  Shape shape;
  DType dtype = DType::Real;

  friend bool operator==(const Space&, const Space&) = default;
};

std::string to_string(const Space& s);

struct MapTraits {
  bool is_unitary = false;
  bool is_projection = false;
  /// A⁺ = Aᵀ (partial isometries such as masked Fourier sampling).
  bool adjoint_is_pinv = false;
  /// Diagonal d with A = F⁻¹·diag(d)·F (blur) or A = diag(d)·F (MRI), F = fft2c.
  /// Either way AᵀA = F⁻¹·diag(|d|²)·F.
  std::optional<Tensor> spectral_diagonal;
};

/// Matrix-free linear operator: a pair of closures plus domain/range metadata.
///
/// Values are immutable and cheap to copy; closures capture their state by
/// value or shared_ptr, so a LinearMap can be shared across threads.
class LinearMap {
public:
  using Fn = std::function<Tensor(const Tensor&)>;

  LinearMap(Space domain, Space range, Fn apply, Fn adjoint, MapTraits traits = {},
            std::vector<Space> range_blocks = {});

  Tensor apply(const Tensor& x) const;
  Tensor adjoint(const Tensor& u) const;
  Tensor operator()(const Tensor& x) const { return apply(x); }

  const Space& domain() const { return domain_; }
  const Space& range() const { return range_; }
  /// Block layout of the range; a single block unless built by stack().
  const std::vector<Space>& range_blocks() const { return blocks_; }
  const MapTraits& traits() const { return traits_; }

  /// Aᵀ as a map in its own right.
  LinearMap transposed() const;

private:
  Space domain_;
  Space range_;
  Fn apply_;
  Fn adjoint_;
  MapTraits traits_;
  std::vector<Space> blocks_;
};

LinearMap identity_map(const Space& space);
LinearMap zero_map(const Space& domain, const Space& range);
/// x ↦ d ⊙ x; adjoint multiplies by conj(d).
LinearMap diagonal_map(const Tensor& d);
/// Dense matrix acting on the flattened domain.
LinearMap matrix_map(const Eigen::MatrixXd& m, Shape domain_shape = {}, Shape range_shape = {});

/// x ↦ A(B(x)).
LinearMap compose(const LinearMap& a, const LinearMap& b);
/// x ↦ αA(x) + βB(x).
LinearMap add_scaled(double alpha, const LinearMap& a, double beta, const LinearMap& b);
LinearMap scaled(double alpha, const LinearMap& a);
/// x ↦ (A(x), B(x)) flattened into one range vector.
LinearMap stack(const LinearMap& a, const LinearMap& b);

inline LinearMap operator*(const LinearMap& a, const LinearMap& b) { return compose(a, b); }
inline LinearMap operator*(double alpha, const LinearMap& a) { return scaled(alpha, a); }
inline LinearMap operator+(const LinearMap& a, const LinearMap& b) { return add_scaled(1.0, a, 1.0, b); }
inline LinearMap operator-(const LinearMap& a, const LinearMap& b) { return add_scaled(1.0, a, -1.0, b); }

/// Max over trials of |⟨Ax,u⟩ − ⟨x,Aᵀu⟩| / (‖Ax‖‖u‖ + ε) for unit random x, u.
double adjoint_test(const LinearMap& a, RngState& rng, int trials = 20);

/// Dense matrix of the operator on the flattened domain (columns A·e_j).
/// Intended for small operators in tests and diagnostics.
Eigen::MatrixXcd to_dense(const LinearMap& a);

} // namespace invkit
