#include "invkit/physics.hpp"

#include <cmath>
#include <numbers>

#include "invkit/fft.hpp"
#include "invkit/generators.hpp"

namespace invkit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_binary(const Tensor& mask, const char* what) {
  if (mask.is_complex()) throw ValidationError(std::string(what) + ": mask must be real");
  for (Index i = 0; i < mask.size(); ++i) {
    const double v = mask[i].real();
    if (v != 0.0 && v != 1.0)
      throw ValidationError(std::string(what) + ": mask is not binary (entry " + std::to_string(i) + " = " +
                            std::to_string(v) + ")");
  }
}

void require_image_shape(const Shape& shape, const char* what) {
  if (shape.size() < 2 || shape.size() > 3)
    throw ValidationError(std::string(what) + ": expected an image shape [H, W] or [C, H, W], got " + to_string(shape));
  shape_size(shape);
}

LinearMap denoising_map(const DenoisingParams& p) {
  require_image_shape(p.shape, "denoising");
  return identity_map({p.shape, DType::Real});
}

LinearMap inpainting_map(const InpaintingParams& p) {
  require_image_shape(p.mask.shape(), "inpainting");
  require_binary(p.mask, "inpainting");
  const LinearMap d = diagonal_map(p.mask);
  MapTraits t;
  t.is_projection = true;
  t.adjoint_is_pinv = true;
  t.is_unitary = p.mask.data().real().minCoeff() == 1.0;
  return LinearMap(d.domain(), d.range(), [d](const Tensor& x) { return d.apply(x); },
                   [d](const Tensor& u) { return d.apply(u); }, t);
}

LinearMap blur_map(const BlurParams& p) {
  require_image_shape(p.shape, "blur");
  if (p.kernel.shape().size() != 2) throw ValidationError("blur: kernel must be 2D, got " + to_string(p.kernel.shape()));
  const Index kh = p.kernel.height(), kw = p.kernel.width();
  if (kh % 2 == 0 || kw % 2 == 0)
    throw ValidationError("blur: kernel sides must be odd, got " + to_string(p.kernel.shape()));
  Tensor probe(p.shape);
  const Index h = probe.height(), w = probe.width();
  if (kh > h || kw > w) throw ValidationError("blur: kernel " + to_string(p.kernel.shape()) + " does not fit image");

  Tensor centered({h, w});
  centered.plane(0).block(h / 2 - kh / 2, w / 2 - kw / 2, kh, kw) = p.kernel.plane(0);
  const Tensor transfer = std::sqrt(static_cast<double>(h * w)) * fft2c(centered);
  Tensor diag(p.shape, DType::Complex);
  for (Index c = 0; c < diag.planes(); ++c) diag.plane(c) = transfer.plane(0);

  auto d = std::make_shared<const Tensor>(diag);
  auto dc = std::make_shared<const Tensor>(diag.conj());
  auto filter = [](const std::shared_ptr<const Tensor>& f) {
    return [f](const Tensor& x) {
      Tensor out = ifft2c(hadamard(*f, fft2c(x)));
      return x.is_complex() ? out : out.real_part();
    };
  };
  MapTraits t;
  t.spectral_diagonal = diag;
  return LinearMap({p.shape, DType::Real}, {p.shape, DType::Real}, filter(d), filter(dc), t);
}

LinearMap downsampling_map(const DownsamplingParams& p) {
  require_image_shape(p.shape, "downsampling");
  if (p.factor < 1) throw ValidationError("downsampling: factor must be >= 1");
  if (!(p.antialias_sigma >= 0.0)) throw ValidationError("downsampling: antialias sigma must be >= 0");
  Tensor probe(p.shape);
  const Index h = probe.height(), w = probe.width(), s = p.factor;
  if (h % s != 0 || w % s != 0)
    throw ValidationError("downsampling: factor " + std::to_string(s) + " does not divide image " + to_string(p.shape));
  Shape small = p.shape;
  small[small.size() - 2] = h / s;
  small[small.size() - 1] = w / s;
  const LinearMap decimate(
      {p.shape, DType::Real}, {small, DType::Real},
      [=](const Tensor& x) {
        Tensor out(small, x.dtype());
        for (Index c = 0; c < x.planes(); ++c) {
          auto src = x.plane(c);
          auto dst = out.plane(c);
          for (Index i = 0; i < h / s; ++i)
            for (Index j = 0; j < w / s; ++j) dst(i, j) = src(i * s, j * s);
        }
        return out;
      },
      [=](const Tensor& u) {
        Tensor out(p.shape, u.dtype());
        for (Index c = 0; c < u.planes(); ++c) {
          auto src = u.plane(c);
          auto dst = out.plane(c);
          for (Index i = 0; i < h / s; ++i)
            for (Index j = 0; j < w / s; ++j) dst(i * s, j * s) = src(i, j);
        }
        return out;
      });
  // Without anti-aliasing the blur is the identity; skip it so decimation stays exact.
  if (p.antialias_sigma == 0.0) return decimate;
  const Tensor kernel =
      gen_gaussian_kernel(p.antialias_sigma, 4 * static_cast<Index>(std::ceil(p.antialias_sigma)) + 1);
  return compose(decimate, blur_map({kernel, p.shape}));
}

LinearMap mri_map(const MriParams& p) {
  require_image_shape(p.mask.shape(), "mri");
  require_binary(p.mask, "mri");
  const Shape shape = p.mask.shape();
  auto m = std::make_shared<const Tensor>(p.mask);
  MapTraits t;
  t.adjoint_is_pinv = true;
  t.is_unitary = p.mask.data().real().minCoeff() == 1.0;
  t.spectral_diagonal = p.mask.as_complex();
  return LinearMap(
      {shape, DType::Complex}, {shape, DType::Complex},
      [m](const Tensor& x) {
        if (!x.is_complex())
          throw ValidationError("mri: the image must be complex; promote it with Tensor::as_complex()");
        return hadamard(*m, fft2c(x));
      },
      [m](const Tensor& y) { return ifft2c(hadamard(*m, y)); }, t);
}

struct RadonGeometry {
  Index size;
  Index detectors;
  std::vector<double> cos_t, sin_t;

  explicit RadonGeometry(const TomographyParams& p)
      : size(p.size), detectors(tomography_detector_count(p.size)) {
    for (double deg : p.angles_deg) {
      const double th = deg * std::numbers::pi / 180.0;
      cos_t.push_back(std::cos(th));
      sin_t.push_back(std::sin(th));
    }
  }

  // Calls f(angle, pixel, bin, weight) for both bilinear taps of every pixel.
  template <typename F>
  void for_each_tap(F&& f) const {
    const double c = 0.5 * static_cast<double>(size - 1);
    const double offset = 0.5 * static_cast<double>(detectors - 1);
    for (std::size_t a = 0; a < cos_t.size(); ++a) {
      for (Index i = 0; i < size; ++i) {
        const double yv = c - static_cast<double>(i);
        for (Index j = 0; j < size; ++j) {
          const double xv = static_cast<double>(j) - c;
          const double s = xv * cos_t[a] + yv * sin_t[a] + offset;
          const double fl = std::floor(s);
          const Index bin = static_cast<Index>(fl);
          const double frac = s - fl;
          const Index pixel = i * size + j;
          if (bin >= 0 && bin < detectors) f(static_cast<Index>(a), pixel, bin, 1.0 - frac);
          if (frac > 0.0 && bin + 1 >= 0 && bin + 1 < detectors) f(static_cast<Index>(a), pixel, bin + 1, frac);
        }
      }
    }
  }
};

LinearMap tomography_map(const TomographyParams& p) {
  if (p.size < 1) throw ValidationError("tomography: image size must be >= 1");
  if (p.angles_deg.empty()) throw ValidationError("tomography: at least one angle is required");
  auto geo = std::make_shared<const RadonGeometry>(p);
  const Index n_angles = static_cast<Index>(p.angles_deg.size());
  const Shape image{p.size, p.size};
  const Shape sino{n_angles, geo->detectors};
  return LinearMap(
      {image, DType::Real}, {sino, DType::Real},
      [geo, sino](const Tensor& x) {
        Tensor out(sino, x.dtype());
        const Index d = geo->detectors;
        geo->for_each_tap([&](Index a, Index px, Index bin, double wgt) { out[a * d + bin] += wgt * x[px]; });
        return out;
      },
      [geo, image](const Tensor& y) {
        Tensor out(image, y.dtype());
        const Index d = geo->detectors;
        geo->for_each_tap([&](Index a, Index px, Index bin, double wgt) { out[px] += wgt * y[a * d + bin]; });
        return out;
      });
}

Eigen::MatrixXd gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  RngState rng(seed);
  Eigen::MatrixXd a(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = scale * rng.normal();
  return a;
}

LinearMap compressed_sensing_map(CompressedSensingParams& p) {
  if (p.measurements < 1) throw ValidationError("compressed sensing: measurements must be >= 1");
  const Index n = shape_size(p.shape);
  if (p.matrix.size() == 0) p.matrix = gaussian_matrix(p.measurements, n, p.seed);
  if (p.matrix.rows() != p.measurements || p.matrix.cols() != n)
    throw ValidationError("compressed sensing: matrix does not match measurements × image size");
  return matrix_map(p.matrix, p.shape, {p.measurements});
}

LinearMap build_map(PhysicsParams& params) {
  return std::visit(overloaded{
                        [](const DenoisingParams& p) { return denoising_map(p); },
                        [](const InpaintingParams& p) { return inpainting_map(p); },
                        [](const BlurParams& p) { return blur_map(p); },
                        [](const DownsamplingParams& p) { return downsampling_map(p); },
                        [](const MriParams& p) { return mri_map(p); },
                        [](const TomographyParams& p) { return tomography_map(p); },
                        [](CompressedSensingParams& p) { return compressed_sensing_map(p); },
                    },
                    params);
}

} // namespace

std::string descriptor_of(const PhysicsParams& params) {
  return std::visit(overloaded{
                        [](const DenoisingParams&) { return std::string("denoising"); },
                        [](const InpaintingParams&) { return std::string("inpainting"); },
                        [](const BlurParams&) { return std::string("blur"); },
                        [](const DownsamplingParams&) { return std::string("downsampling"); },
                        [](const MriParams&) { return std::string("mri"); },
                        [](const TomographyParams&) { return std::string("tomography"); },
                        [](const CompressedSensingParams&) { return std::string("compressed_sensing"); },
                    },
                    params);
}

Index tomography_detector_count(Index size) {
  const Index d = static_cast<Index>(std::ceil(static_cast<double>(size) * std::numbers::sqrt2));
  return d % 2 ? d : d + 1;
}

Physics::Physics(PhysicsParams params, NoiseModel noise)
    : params_(std::move(params)), noise_(noise), map_(build_map(params_)) {
  noise_.validate();
}

Tensor Physics::forward(const Tensor& x, RngState& rng) const { return noise_apply(noise_, map_.apply(x), rng); }

bool Physics::is_maskable() const {
  return std::holds_alternative<InpaintingParams>(params_) || std::holds_alternative<MriParams>(params_);
}

const Tensor& Physics::mask() const {
  if (const auto* p = std::get_if<InpaintingParams>(&params_)) return p->mask;
  if (const auto* p = std::get_if<MriParams>(&params_)) return p->mask;
  throw CapabilityError("physics '" + descriptor() + "' has no pixelwise mask");
}

Physics Physics::with_mask(const Tensor& mask) const {
  if (std::holds_alternative<InpaintingParams>(params_)) return Physics(InpaintingParams{mask}, noise_);
  if (std::holds_alternative<MriParams>(params_)) return Physics(MriParams{mask}, noise_);
  throw CapabilityError("physics '" + descriptor() + "' has no pixelwise mask");
}

Physics make_denoising(const Shape& shape, NoiseModel noise) { return Physics(DenoisingParams{shape}, noise); }

Physics make_inpainting(const Tensor& mask, NoiseModel noise) { return Physics(InpaintingParams{mask}, noise); }

Physics make_blur(const Tensor& kernel, const Shape& image_shape, NoiseModel noise) {
  return Physics(BlurParams{kernel, image_shape}, noise);
}

Physics make_downsampling(Index factor, double antialias_sigma, const Shape& image_shape, NoiseModel noise) {
  return Physics(DownsamplingParams{factor, antialias_sigma, image_shape}, noise);
}

Physics make_mri(const Tensor& mask, NoiseModel noise) { return Physics(MriParams{mask}, noise); }

Physics make_tomography(const std::vector<double>& angles_deg, Index size, NoiseModel noise) {
  return Physics(TomographyParams{angles_deg, size}, noise);
}

Physics make_compressed_sensing(Index measurements, const Shape& image_shape, RngState& rng, NoiseModel noise) {
  return Physics(CompressedSensingParams{measurements, image_shape, rng.next_u64(), {}}, noise);
}

std::vector<double> uniform_angles(Index num) {
  std::vector<double> a;
  for (Index k = 0; k < num; ++k) a.push_back(180.0 * static_cast<double>(k) / static_cast<double>(num));
  return a;
}

Tensor fbp(const Physics& tomo, const Tensor& sinogram) {
  const auto* p = std::get_if<TomographyParams>(&tomo.params());
  if (!p) throw CapabilityError("fbp requires tomography physics, got '" + tomo.descriptor() + "'");
  if (sinogram.shape() != tomo.range().shape)
    throw ShapeError("fbp: sinogram " + to_string(sinogram.shape()) + " does not match " +
                     to_string(tomo.range().shape));
  const Index n_angles = sinogram.shape()[0], d = sinogram.shape()[1];
  Index pad = 64;
  while (pad < 2 * d) pad *= 2;

  // Ram-Lak response from its spatial kernel; the factor 2 matches the
  // π/(2·angles) normalization.
  Vector ramp = Vector::Zero(pad);
  for (Index k = 0; k < pad; ++k) {
    const Index n = k <= pad / 2 ? k : k - pad;
    if (n == 0)
      ramp[k] = 0.25;
    else if (n % 2 != 0)
      ramp[k] = -1.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(n * n));
  }
  fft1d(ramp);
  const Eigen::VectorXd response = 2.0 * ramp.real();

  Tensor filtered(sinogram.shape(), sinogram.dtype());
  Vector row(pad);
  for (Index a = 0; a < n_angles; ++a) {
    row.setZero();
    row.head(d) = sinogram.data().segment(a * d, d);
    fft1d(row);
    row = row.cwiseProduct(response.cast<cplx>());
    ifft1d(row);
    filtered.data().segment(a * d, d) = row.head(d) / static_cast<double>(pad);
  }
  if (!sinogram.is_complex()) filtered = filtered.real_part();
  return (std::numbers::pi / (2.0 * static_cast<double>(n_angles))) * tomo.adjoint(filtered);
}

} // namespace invkit
