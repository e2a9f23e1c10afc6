#include "invkit/fft.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace invkit {

namespace {

// kissfft does not handle n == 1, which is the identity anyway.
void transform(Eigen::Ref<Vector> v, bool inverse) {
  const Index n = v.size();
  if (n <= 1) return;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<cplx> in(v.data(), v.data() + n), out;
  if (inverse)
    fft.inv(out, in);
  else
    fft.fwd(out, in);
  for (Index i = 0; i < n; ++i) v[i] = out[static_cast<std::size_t>(i)];
}

// out[(i + offset) mod n] = in[i] along both trailing axes.
Tensor roll2(const Tensor& t, Index dy, Index dx) {
  Tensor out(t.shape(), t.dtype());
  const Index h = t.height(), w = t.width();
  for (Index p = 0; p < t.planes(); ++p) {
    auto src = t.plane(p);
    auto dst = out.plane(p);
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) dst((i + dy) % h, (j + dx) % w) = src(i, j);
  }
  return out;
}

Tensor dft2(const Tensor& t, bool inverse) {
  Tensor out = ifftshift2(t).as_complex();
  const Index h = out.height(), w = out.width();
  const double scale = 1.0 / std::sqrt(static_cast<double>(h * w));
  Vector column(h);
  for (Index p = 0; p < out.planes(); ++p) {
    auto plane = out.plane(p);
    for (Index i = 0; i < h; ++i) {
      Vector row = plane.row(i).transpose();
      transform(row, inverse);
      plane.row(i) = row.transpose();
    }
    for (Index j = 0; j < w; ++j) {
      column = plane.col(j);
      transform(column, inverse);
      plane.col(j) = column;
    }
  }
  out.data() *= scale;
  return fftshift2(out);
}

} // namespace

Tensor fftshift2(const Tensor& t) { return roll2(t, t.height() / 2, t.width() / 2); }

Tensor ifftshift2(const Tensor& t) {
  const Index h = t.height(), w = t.width();
  return roll2(t, h - h / 2, w - w / 2);
}

Tensor fft2c(const Tensor& t) { return dft2(t, false); }
Tensor ifft2c(const Tensor& t) { return dft2(t, true); }

void fft1d(Eigen::Ref<Vector> v) { transform(v, false); }
void ifft1d(Eigen::Ref<Vector> v) { transform(v, true); }

} // namespace invkit
