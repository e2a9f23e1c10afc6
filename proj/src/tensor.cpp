#include "invkit/tensor.hpp"

#include <sstream>

namespace invkit {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::string to_string(DType dtype) { return dtype == DType::Real ? "real64" : "complex128"; }

Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) {
    if (d < 1) throw ShapeError("shape " + to_string(shape) + " has a non-positive extent");
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape, DType dtype)
    : shape_(std::move(shape)), dtype_(dtype), data_(Vector::Zero(shape_size(shape_))) {}

Tensor::Tensor(Shape shape, Vector data, DType dtype)
    : shape_(std::move(shape)), dtype_(dtype), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size())
    throw ShapeError("buffer length " + std::to_string(data_.size()) + " does not match shape " +
                     to_string(shape_));
  if (dtype_ == DType::Real) data_.imag().setZero();
}

Tensor Tensor::constant(Shape shape, double value) {
  Tensor t(std::move(shape));
  t.data_.setConstant(cplx(value, 0.0));
  return t;
}

Tensor Tensor::from_real(Shape shape, const Eigen::Ref<const Eigen::VectorXd>& values) {
  return Tensor(std::move(shape), values.cast<cplx>(), DType::Real);
}

Tensor Tensor::from_values(Shape shape, std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return from_real(std::move(shape), v);
}

Index Tensor::height() const {
  if (shape_.size() < 2) throw ShapeError("expected an image tensor, got shape " + to_string(shape_));
  return shape_[shape_.size() - 2];
}

Index Tensor::width() const {
  if (shape_.size() < 2) throw ShapeError("expected an image tensor, got shape " + to_string(shape_));
  return shape_.back();
}

Index Tensor::planes() const { return size() / (height() * width()); }

PlaneMap Tensor::plane(Index p) {
  const Index h = height(), w = width();
  return PlaneMap(data_.data() + p * h * w, h, w);
}

ConstPlaneMap Tensor::plane(Index p) const {
  const Index h = height(), w = width();
  return ConstPlaneMap(data_.data() + p * h * w, h, w);
}

Tensor Tensor::as_complex() const { return Tensor(shape_, data_, DType::Complex); }

Tensor Tensor::real_part() const { return Tensor(shape_, data_.real().cast<cplx>(), DType::Real); }

Tensor Tensor::conj() const { return Tensor(shape_, data_.conjugate(), dtype_); }

Tensor Tensor::abs() const { return Tensor(shape_, data_.cwiseAbs().cast<cplx>(), DType::Real); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size())
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  return Tensor(std::move(shape), data_, dtype_);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "addition");
  data_ += other.data_;
  dtype_ = promote(dtype_, other.dtype_);
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape(*this, other, "subtraction");
  data_ -= other.data_;
  dtype_ = promote(dtype_, other.dtype_);
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  data_ *= s;
  return *this;
}

Tensor& Tensor::operator*=(cplx s) {
  data_ *= s;
  if (s.imag() != 0.0) dtype_ = DType::Complex;
  return *this;
}

DType promote(DType a, DType b) {
  return (a == DType::Complex || b == DType::Complex) ? DType::Complex : DType::Real;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out += b;
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out -= b;
  return out;
}

Tensor operator-(const Tensor& a) { return Tensor(a.shape(), -a.data(), a.dtype()); }

Tensor operator*(double s, const Tensor& t) { return Tensor(t.shape(), s * t.data(), t.dtype()); }
Tensor operator*(const Tensor& t, double s) { return s * t; }

Tensor operator*(cplx s, const Tensor& t) {
  Tensor out = t;
  out *= s;
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "elementwise product");
  return Tensor(a.shape(), a.data().cwiseProduct(b.data()), promote(a.dtype(), b.dtype()));
}

cplx dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  return a.data().dot(b.data());
}

double norm(const Tensor& t) { return t.data().norm(); }
double squared_norm(const Tensor& t) { return t.data().squaredNorm(); }

bool all_finite(const Tensor& t) { return t.data().allFinite(); }

double max_abs(const Tensor& t) { return t.size() ? t.data().cwiseAbs().maxCoeff() : 0.0; }

Tensor quantize_f32(const Tensor& t) {
  Vector q(t.size());
  q.real() = t.data().real().cast<float>().cast<double>();
  q.imag() = t.data().imag().cast<float>().cast<double>();
  return Tensor(t.shape(), std::move(q), t.dtype());
}

} // namespace invkit
