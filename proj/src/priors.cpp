#include "invkit/priors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "invkit/generators.hpp"

namespace invkit {

Tensor soft_threshold(const Tensor& v, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("soft_threshold: tau must be >= 0");
  Tensor out = v;
  for (Index i = 0; i < out.size(); ++i) {
    const double mag = std::abs(out[i]);
    out[i] = mag > tau ? out[i] * ((mag - tau) / mag) : cplx(0.0);
  }
  return out;
}

namespace {

void require_dyadic(const Tensor& x, int levels) {
  if (levels < 0) throw ValidationError("haar: levels must be >= 0");
  const Index f = Index{1} << levels;
  if (x.height() % f != 0 || x.width() % f != 0)
    throw ValidationError("haar: image " + to_string(x.shape()) + " is not divisible by 2^" + std::to_string(levels));
}

} // namespace

Tensor haar_dwt(const Tensor& x, int levels) {
  require_dyadic(x, levels);
  Tensor out = x;
  const double s = 0.5;
  for (Index p = 0; p < out.planes(); ++p) {
    auto plane = out.plane(p);
    Index h = x.height(), w = x.width();
    for (int l = 0; l < levels; ++l, h /= 2, w /= 2) {
      const Eigen::MatrixXcd block = plane.topLeftCorner(h, w);
      const Index h2 = h / 2, w2 = w / 2;
      for (Index i = 0; i < h2; ++i)
        for (Index j = 0; j < w2; ++j) {
          const cplx a = block(2 * i, 2 * j), b = block(2 * i, 2 * j + 1);
          const cplx c = block(2 * i + 1, 2 * j), d = block(2 * i + 1, 2 * j + 1);
          plane(i, j) = s * (a + b + c + d);
          plane(i, j + w2) = s * (a - b + c - d);
          plane(i + h2, j) = s * (a + b - c - d);
          plane(i + h2, j + w2) = s * (a - b - c + d);
        }
    }
  }
  return out;
}

Tensor haar_idwt(const Tensor& coeffs, int levels) {
  require_dyadic(coeffs, levels);
  Tensor out = coeffs;
  const double s = 0.5;
  for (Index p = 0; p < out.planes(); ++p) {
    auto plane = out.plane(p);
    for (int l = levels - 1; l >= 0; --l) {
      const Index h = coeffs.height() >> l, w = coeffs.width() >> l;
      const Index h2 = h / 2, w2 = w / 2;
      const Eigen::MatrixXcd block = plane.topLeftCorner(h, w);
      for (Index i = 0; i < h2; ++i)
        for (Index j = 0; j < w2; ++j) {
          const cplx ll = block(i, j), lh = block(i, j + w2);
          const cplx hl = block(i + h2, j), hh = block(i + h2, j + w2);
          plane(2 * i, 2 * j) = s * (ll + lh + hl + hh);
          plane(2 * i, 2 * j + 1) = s * (ll - lh + hl - hh);
          plane(2 * i + 1, 2 * j) = s * (ll + lh - hl - hh);
          plane(2 * i + 1, 2 * j + 1) = s * (ll - lh - hl + hh);
        }
    }
  }
  return out;
}

Tensor image_gradient(const Tensor& x) {
  Shape gs = x.shape();
  gs.insert(gs.begin(), 2);
  Tensor g(gs, x.dtype());
  const Index n = x.size();
  const Index h = x.height(), w = x.width();
  for (Index p = 0; p < x.planes(); ++p) {
    auto src = x.plane(p);
    PlaneMap dy(g.data().data() + p * h * w, h, w);
    PlaneMap dx(g.data().data() + n + p * h * w, h, w);
    dy.setZero();
    dx.setZero();
    dy.topRows(h - 1) = src.bottomRows(h - 1) - src.topRows(h - 1);
    dx.leftCols(w - 1) = src.rightCols(w - 1) - src.leftCols(w - 1);
  }
  return g;
}

Tensor image_divergence(const Tensor& g) {
  Shape xs(g.shape().begin() + 1, g.shape().end());
  Tensor out(xs, g.dtype());
  const Index n = out.size();
  const Index h = out.height(), w = out.width();
  for (Index p = 0; p < out.planes(); ++p) {
    ConstPlaneMap py(g.data().data() + p * h * w, h, w);
    ConstPlaneMap px(g.data().data() + n + p * h * w, h, w);
    auto d = out.plane(p);
    // Adjoint of the forward difference with a zero last row/column.
    d.setZero();
    d.topRows(h - 1) += py.topRows(h - 1);
    d.bottomRows(h - 1) -= py.topRows(h - 1);
    d.leftCols(w - 1) += px.leftCols(w - 1);
    d.rightCols(w - 1) -= px.leftCols(w - 1);
  }
  return out;
}

double tv_value(const Tensor& x, double epsilon) {
  const Tensor g = image_gradient(x);
  const Index n = x.size();
  const double e2 = epsilon * epsilon;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += std::sqrt(std::norm(g[i]) + std::norm(g[n + i]) + e2);
  return total;
}

namespace {

// Dual iteration for tv_prox on flat plane-major buffers; T is double for real
// images and cplx otherwise. Returns the dual field (py, px).
template <typename T>
void tv_dual(const T* v, Index planes, Index h, Index w, double gamma, const TvProxOptions& opts,
             std::vector<T>& py, std::vector<T>& px) {
  const Index hw = h * w, n = planes * hw;
  std::vector<T> ry(py), rx(px), qy(py), qx(px), d(static_cast<std::size_t>(n));
  const double inv_gamma = 1.0 / gamma;
  double t = 1.0;
  for (int k = 0; k < opts.max_iter; ++k) {
    // d = div r + v/γ
    for (Index p = 0; p < planes; ++p)
      for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j) {
          const Index a = p * hw + i * w + j;
          T acc = v[a] * inv_gamma;
          if (i + 1 < h) acc += ry[a];
          if (i > 0) acc -= ry[a - w];
          if (j + 1 < w) acc += rx[a];
          if (j > 0) acc -= rx[a - 1];
          d[a] = acc;
        }
    // Dual objective ½‖v + γ div p‖²; projected gradient step 1/8 taken from
    // the extrapolated point r (Beck-Teboulle acceleration), with momentum
    // reset whenever the step points back against the last move.
    double change = 0.0, against = 0.0;
    for (Index p = 0; p < planes; ++p)
      for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j) {
          const Index a = p * hw + i * w + j;
          const T gy = i + 1 < h ? d[a + w] - d[a] : T(0);
          const T gx = j + 1 < w ? d[a + 1] - d[a] : T(0);
          T y = ry[a] + gy / 8.0;
          T x = rx[a] + gx / 8.0;
          const double mag = std::sqrt(std::norm(y) + std::norm(x));
          if (mag > 1.0) {
            y /= mag;
            x /= mag;
          }
          change = std::max({change, std::abs(y - py[a]), std::abs(x - px[a])});
          against += std::real(std::conj(ry[a] - y) * (y - py[a]) + std::conj(rx[a] - x) * (x - px[a]));
          qy[a] = y;
          qx[a] = x;
        }
    if (against > 0.0) t = 1.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (Index a = 0; a < n; ++a) {
      ry[a] = qy[a] + momentum * (qy[a] - py[a]);
      rx[a] = qx[a] + momentum * (qx[a] - px[a]);
    }
    py.swap(qy);
    px.swap(qx);
    t = t_next;
    if (change < opts.tol) break;
  }
}

} // namespace

Tensor tv_prox(const Tensor& v, double gamma, TvProxOptions opts) {
  if (gamma < 0.0) throw ValidationError("tv_prox: gamma must be >= 0");
  if (gamma == 0.0) return v;
  const Index n = v.size(), h = v.height(), w = v.width(), planes = v.planes();
  Shape gs = v.shape();
  gs.insert(gs.begin(), 2);
  Tensor p(gs, v.dtype());
  if (v.dtype() == DType::Real) {
    const Eigen::VectorXd vr = v.data().real();
    std::vector<double> py(static_cast<std::size_t>(n), 0.0), px(py);
    tv_dual(vr.data(), planes, h, w, gamma, opts, py, px);
    for (Index i = 0; i < n; ++i) {
      p[i] = py[static_cast<std::size_t>(i)];
      p[n + i] = px[static_cast<std::size_t>(i)];
    }
  } else {
    std::vector<cplx> py(static_cast<std::size_t>(n), cplx(0.0)), px(py);
    tv_dual(v.data().data(), planes, h, w, gamma, opts, py, px);
    for (Index i = 0; i < n; ++i) {
      p[i] = py[static_cast<std::size_t>(i)];
      p[n + i] = px[static_cast<std::size_t>(i)];
    }
  }
  return v + gamma * image_divergence(p);
}

std::string to_string(Prior::Kind kind) {
  switch (kind) {
  case Prior::Kind::Tv: return "tv";
  case Prior::Kind::WaveletL1: return "wavelet_l1";
  case Prior::Kind::L1: return "l1";
  case Prior::Kind::Tikhonov: return "tikhonov";
  }
  return "tv";
}

Prior::Kind prior_kind_from_string(const std::string& name) {
  for (auto k : {Prior::Kind::Tv, Prior::Kind::WaveletL1, Prior::Kind::L1, Prior::Kind::Tikhonov})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown prior '" + name + "'");
}

bool has_gradient(const Prior& p) { return p.kind == Prior::Kind::Tv || p.kind == Prior::Kind::Tikhonov; }

double prior_lipschitz(const Prior& p) {
  switch (p.kind) {
  case Prior::Kind::Tikhonov:
    return p.weight;
  case Prior::Kind::Tv:
    return 8.0 * p.weight / (p.tv_epsilon > 0.0 ? p.tv_epsilon : kDefaultTvGradEpsilon);
  default:
    throw CapabilityError("prior '" + to_string(p.kind) + "' has no gradient");
  }
}

double prior_eval(const Prior& p, const Tensor& x) {
  switch (p.kind) {
  case Prior::Kind::Tv:
    return p.weight * tv_value(x, p.tv_epsilon);
  case Prior::Kind::WaveletL1:
    return p.weight * haar_dwt(x, p.levels).data().cwiseAbs().sum();
  case Prior::Kind::L1:
    return p.weight * x.data().cwiseAbs().sum();
  case Prior::Kind::Tikhonov:
    return 0.5 * p.weight * squared_norm(x);
  }
  return 0.0;
}

Tensor prior_grad(const Prior& p, const Tensor& x) {
  switch (p.kind) {
  case Prior::Kind::Tikhonov:
    return p.weight * x;
  case Prior::Kind::Tv: {
    const double eps = p.tv_epsilon > 0.0 ? p.tv_epsilon : kDefaultTvGradEpsilon;
    Tensor g = image_gradient(x);
    const Index n = x.size();
    for (Index i = 0; i < n; ++i) {
      const double r = std::sqrt(std::norm(g[i]) + std::norm(g[n + i]) + eps * eps);
      g[i] /= r;
      g[n + i] /= r;
    }
    return -p.weight * image_divergence(g);
  }
  default:
    throw CapabilityError("prior '" + to_string(p.kind) + "' has no gradient");
  }
}

Tensor prior_prox(const Prior& p, const Tensor& v, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("prior_prox: gamma must be > 0");
  const double g = gamma * p.weight;
  switch (p.kind) {
  case Prior::Kind::Tv:
    return tv_prox(v, g, p.tv_opts);
  case Prior::Kind::WaveletL1:
    return haar_idwt(soft_threshold(haar_dwt(v, p.levels), g), p.levels);
  case Prior::Kind::L1:
    return soft_threshold(v, g);
  case Prior::Kind::Tikhonov:
    return (1.0 / (1.0 + g)) * v;
  }
  return v;
}

std::string to_string(Denoiser::Kind kind) {
  switch (kind) {
  case Denoiser::Kind::GaussianSmoother: return "gaussian_smoother";
  case Denoiser::Kind::Tv: return "tv_denoiser";
  case Denoiser::Kind::Median: return "median";
  }
  return "gaussian_smoother";
}

Denoiser::Kind denoiser_kind_from_string(const std::string& name) {
  for (auto k : {Denoiser::Kind::GaussianSmoother, Denoiser::Kind::Tv, Denoiser::Kind::Median})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown denoiser '" + name + "'");
}

Tensor convolve_circular(const Tensor& x, const Tensor& kernel) {
  const Index kh = kernel.height(), kw = kernel.width();
  if (kh % 2 == 0 || kw % 2 == 0) throw ValidationError("convolve_circular: kernel sides must be odd");
  const Index h = x.height(), w = x.width();
  const Index ch = kh / 2, cw = kw / 2;
  Tensor out(x.shape(), x.dtype());
  auto k = kernel.plane(0);
  for (Index p = 0; p < x.planes(); ++p) {
    auto src = x.plane(p);
    auto dst = out.plane(p);
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) {
        cplx acc = 0.0;
        for (Index a = 0; a < kh; ++a) {
          const Index si = ((i - (a - ch)) % h + h) % h;
          for (Index b = 0; b < kw; ++b) {
            const Index sj = ((j - (b - cw)) % w + w) % w;
            acc += k(a, b) * src(si, sj);
          }
        }
        dst(i, j) = acc;
      }
  }
  return out;
}

namespace {

Tensor median3x3(const Tensor& v) {
  Tensor out(v.shape(), v.dtype());
  const Index h = v.height(), w = v.width();
  std::array<double, 9> re{}, im{};
  for (Index p = 0; p < v.planes(); ++p) {
    auto src = v.plane(p);
    auto dst = out.plane(p);
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) {
        int n = 0;
        for (Index di = -1; di <= 1; ++di)
          for (Index dj = -1; dj <= 1; ++dj) {
            const cplx s = src(std::clamp<Index>(i + di, 0, h - 1), std::clamp<Index>(j + dj, 0, w - 1));
            re[n] = s.real();
            im[n] = s.imag();
            ++n;
          }
        std::nth_element(re.begin(), re.begin() + 4, re.end());
        std::nth_element(im.begin(), im.begin() + 4, im.end());
        dst(i, j) = cplx(re[4], im[4]);
      }
  }
  return out;
}

} // namespace

Tensor denoise(const Denoiser& d, const Tensor& v, double sigma) {
  if (sigma < 0.0) throw ValidationError("denoise: sigma must be >= 0");
  switch (d.kind) {
  case Denoiser::Kind::GaussianSmoother: {
    if (d.window_sigma <= 0.0) return v;
    Index side = 2 * static_cast<Index>(std::ceil(3.0 * d.window_sigma)) + 1;
    const Index limit = std::min(v.height(), v.width());
    if (side > limit) side = limit % 2 ? limit : limit - 1;
    return convolve_circular(v, gen_gaussian_kernel(d.window_sigma, side));
  }
  case Denoiser::Kind::Tv:
    return tv_prox(v, sigma * sigma * d.tv_lambda);
  case Denoiser::Kind::Median:
    return median3x3(v);
  }
  return v;
}

} // namespace invkit
