#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "invkit/errors.hpp"

namespace invkit {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using Shape = std::vector<Index>;
using Vector = Eigen::VectorXcd;

using PlaneMap = Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstPlaneMap =
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

enum class DType { Real, Complex };

std::string to_string(const Shape& shape);
std::string to_string(DType dtype);
Index shape_size(const Shape& shape);

/// Dense row-major array with shape metadata.
///
/// Storage is always complex128; a Real tensor keeps every imaginary part at
/// zero, so a complex view of real data is exact. Image tensors are [H, W] or
/// [C, H, W]; per-plane image operators act on the two trailing axes.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, DType dtype = DType::Real);
  Tensor(Shape shape, Vector data, DType dtype);

  static Tensor zeros(Shape shape, DType dtype = DType::Real) { return Tensor(std::move(shape), dtype); }
  static Tensor constant(Shape shape, double value);
  static Tensor from_real(Shape shape, const Eigen::Ref<const Eigen::VectorXd>& values);
  static Tensor from_values(Shape shape, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  DType dtype() const { return dtype_; }
  bool is_complex() const { return dtype_ == DType::Complex; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }
  cplx& operator[](Index i) { return data_[i]; }
  const cplx& operator[](Index i) const { return data_[i]; }

  /// Real parts as a real vector.
  Eigen::VectorXd real() const { return data_.real(); }

  // Trailing two axes as an image plane.
  Index height() const;
  Index width() const;
  Index planes() const;
  PlaneMap plane(Index p);
  ConstPlaneMap plane(Index p) const;

  Tensor as_complex() const;
  /// Drops imaginary parts and marks the tensor Real.
  Tensor real_part() const;
  Tensor conj() const;
  Tensor abs() const;
  Tensor reshaped(Shape shape) const;
  Tensor zeros_like() const { return Tensor(shape_, dtype_); }

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s);
  Tensor& operator*=(cplx s);

private:
  Shape shape_;
  DType dtype_ = DType::Real;
  Vector data_;
};

DType promote(DType a, DType b);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);
Tensor operator*(double s, const Tensor& t);
Tensor operator*(const Tensor& t, double s);
Tensor operator*(cplx s, const Tensor& t);
Tensor hadamard(const Tensor& a, const Tensor& b);

/// Σ conj(a_i)·b_i.
cplx dot(const Tensor& a, const Tensor& b);
double norm(const Tensor& t);
double squared_norm(const Tensor& t);
bool all_finite(const Tensor& t);
double max_abs(const Tensor& t);

/// Rounds every real and imaginary part to the nearest float32.
Tensor quantize_f32(const Tensor& t);

} // namespace invkit
