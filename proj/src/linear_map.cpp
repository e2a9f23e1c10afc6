#include "invkit/linear_map.hpp"

#include <cmath>
#include <limits>

namespace invkit {

std::string to_string(const Space& s) { return to_string(s.shape) + " " + to_string(s.dtype); }

LinearMap::LinearMap(Space domain, Space range, Fn apply, Fn adjoint, MapTraits traits,
                     std::vector<Space> range_blocks)
    : domain_(std::move(domain)), range_(std::move(range)), apply_(std::move(apply)),
      adjoint_(std::move(adjoint)), traits_(std::move(traits)), blocks_(std::move(range_blocks)) {
  if (blocks_.empty()) blocks_.push_back(range_);
}

Tensor LinearMap::apply(const Tensor& x) const {
  if (x.shape() != domain_.shape)
    throw ShapeError("apply: input shape " + to_string(x.shape()) + " does not match domain " +
                     to_string(domain_.shape));
  return apply_(x);
}

Tensor LinearMap::adjoint(const Tensor& u) const {
  if (u.shape() != range_.shape)
    throw ShapeError("adjoint: input shape " + to_string(u.shape()) + " does not match range " +
                     to_string(range_.shape));
  return adjoint_(u);
}

LinearMap LinearMap::transposed() const {
  MapTraits t;
  t.is_unitary = traits_.is_unitary;
  t.is_projection = traits_.is_projection;
  return LinearMap(range_, domain_, adjoint_, apply_, t);
}

LinearMap identity_map(const Space& space) {
  MapTraits t;
  t.is_unitary = true;
  t.is_projection = true;
  t.adjoint_is_pinv = true;
  auto id = [](const Tensor& x) { return x; };
  return LinearMap(space, space, id, id, t);
}

LinearMap zero_map(const Space& domain, const Space& range) {
  return LinearMap(
      domain, range, [range](const Tensor& x) { return Tensor(range.shape, promote(range.dtype, x.dtype())); },
      [domain](const Tensor& u) { return Tensor(domain.shape, promote(domain.dtype, u.dtype())); });
}

LinearMap diagonal_map(const Tensor& d) {
  const Space space{d.shape(), d.dtype()};
  auto dp = std::make_shared<const Tensor>(d);
  auto dc = std::make_shared<const Tensor>(d.conj());
  return LinearMap(
      space, space, [dp](const Tensor& x) { return hadamard(*dp, x); },
      [dc](const Tensor& u) { return hadamard(*dc, u); });
}

LinearMap matrix_map(const Eigen::MatrixXd& m, Shape domain_shape, Shape range_shape) {
  if (domain_shape.empty()) domain_shape = {m.cols()};
  if (range_shape.empty()) range_shape = {m.rows()};
  if (shape_size(domain_shape) != m.cols() || shape_size(range_shape) != m.rows())
    throw ShapeError("matrix_map: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     " matrix does not fit shapes " + to_string(domain_shape) + " -> " + to_string(range_shape));
  auto mp = std::make_shared<const Eigen::MatrixXd>(m);
  return LinearMap(
      {domain_shape, DType::Real}, {range_shape, DType::Real},
      [mp, range_shape](const Tensor& x) {
        Vector y = mp->cast<cplx>() * x.data();
        return Tensor(range_shape, std::move(y), x.dtype());
      },
      [mp, domain_shape](const Tensor& u) {
        Vector x = mp->transpose().cast<cplx>() * u.data();
        return Tensor(domain_shape, std::move(x), u.dtype());
      });
}

LinearMap compose(const LinearMap& a, const LinearMap& b) {
  if (b.range().shape != a.domain().shape)
    throw ShapeError("compose: range of inner map " + to_string(b.range()) +
                     " does not match domain of outer map " + to_string(a.domain()));
  MapTraits t;
  t.is_unitary = a.traits().is_unitary && b.traits().is_unitary;
  return LinearMap(
      b.domain(), a.range(), [a, b](const Tensor& x) { return a.apply(b.apply(x)); },
      [a, b](const Tensor& u) { return b.adjoint(a.adjoint(u)); }, t, a.range_blocks());
}

LinearMap add_scaled(double alpha, const LinearMap& a, double beta, const LinearMap& b) {
  if (a.domain().shape != b.domain().shape || a.range().shape != b.range().shape)
    throw ShapeError("add_scaled: maps " + to_string(a.domain()) + " -> " + to_string(a.range()) + " and " +
                     to_string(b.domain()) + " -> " + to_string(b.range()) + " differ in shape");
  const Space domain{a.domain().shape, promote(a.domain().dtype, b.domain().dtype)};
  const Space range{a.range().shape, promote(a.range().dtype, b.range().dtype)};
  return LinearMap(
      domain, range, [=](const Tensor& x) { return alpha * a.apply(x) + beta * b.apply(x); },
      [=](const Tensor& u) { return alpha * a.adjoint(u) + beta * b.adjoint(u); }, {}, a.range_blocks());
}

LinearMap scaled(double alpha, const LinearMap& a) {
  MapTraits t;
  if (a.traits().spectral_diagonal) t.spectral_diagonal = alpha * *a.traits().spectral_diagonal;
  return LinearMap(
      a.domain(), a.range(), [=](const Tensor& x) { return alpha * a.apply(x); },
      [=](const Tensor& u) { return alpha * a.adjoint(u); }, t, a.range_blocks());
}

LinearMap stack(const LinearMap& a, const LinearMap& b) {
  if (a.domain().shape != b.domain().shape)
    throw ShapeError("stack: domains " + to_string(a.domain()) + " and " + to_string(b.domain()) + " differ");
  if (a.range().dtype != b.range().dtype)
    throw ShapeError("stack: ranges have different dtypes (" + to_string(a.range()) + ", " +
                     to_string(b.range()) + ")");
  const Index na = shape_size(a.range().shape);
  const Index nb = shape_size(b.range().shape);
  const Space range{{na + nb}, a.range().dtype};
  std::vector<Space> blocks = a.range_blocks();
  blocks.insert(blocks.end(), b.range_blocks().begin(), b.range_blocks().end());
  const Space domain{a.domain().shape, promote(a.domain().dtype, b.domain().dtype)};
  return LinearMap(
      domain, range,
      [=](const Tensor& x) {
        const Tensor ya = a.apply(x), yb = b.apply(x);
        Vector v(na + nb);
        v << ya.data(), yb.data();
        return Tensor({na + nb}, std::move(v), promote(ya.dtype(), yb.dtype()));
      },
      [=](const Tensor& u) {
        const Tensor ua(a.range().shape, u.data().head(na), u.dtype());
        const Tensor ub(b.range().shape, u.data().tail(nb), u.dtype());
        return a.adjoint(ua) + b.adjoint(ub);
      },
      {}, std::move(blocks));
}

double adjoint_test(const LinearMap& a, RngState& rng, int trials) {
  if (trials < 1) throw ValidationError("adjoint_test: trials must be >= 1");
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    Tensor x = randn(a.domain().shape, a.domain().dtype, rng);
    Tensor u = randn(a.range().shape, a.range().dtype, rng);
    x *= 1.0 / norm(x);
    u *= 1.0 / norm(u);
    const Tensor ax = a.apply(x);
    const Tensor atu = a.adjoint(u);
    const double err = std::abs(dot(ax, u) - dot(x, atu)) /
                       (norm(ax) * norm(u) + std::numeric_limits<double>::epsilon());
    worst = std::max(worst, err);
  }
  return worst;
}

Eigen::MatrixXcd to_dense(const LinearMap& a) {
  const Index n = shape_size(a.domain().shape);
  const Index m = shape_size(a.range().shape);
  Eigen::MatrixXcd out(m, n);
  Tensor e(a.domain().shape, a.domain().dtype);
  for (Index j = 0; j < n; ++j) {
    e.data().setZero();
    e[j] = 1.0;
    out.col(j) = a.apply(e).data();
  }
  return out;
}

} // namespace invkit
