#include "invkit/serialize.hpp"

namespace invkit {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + key + "' has the wrong type");
  }
}

} // namespace

json tensor_to_json(const Tensor& t) {
  if (t.is_complex()) throw ValidationError("tensor_to_json: complex tensors are not supported");
  const Eigen::VectorXd v = t.real();
  return {{"shape", t.shape()}, {"values", std::vector<double>(v.begin(), v.end())}};
}

Tensor tensor_from_json(const json& j) {
  const auto shape = field<Shape>(j, "shape");
  const auto values = field<std::vector<double>>(j, "values");
  if (static_cast<Index>(values.size()) != shape_size(shape))
    throw FormatError("tensor values do not match shape " + to_string(shape));
  return Tensor::from_real(shape, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size())));
}

json physics_params_to_json(const PhysicsParams& params) {
  json j;
  j["type"] = descriptor_of(params);
  if (const auto* p = std::get_if<DenoisingParams>(&params)) {
    j["shape"] = p->shape;
  } else if (const auto* p = std::get_if<InpaintingParams>(&params)) {
    j["mask"] = tensor_to_json(p->mask);
  } else if (const auto* p = std::get_if<BlurParams>(&params)) {
    j["kernel"] = tensor_to_json(p->kernel);
    j["shape"] = p->shape;
  } else if (const auto* p = std::get_if<DownsamplingParams>(&params)) {
    j["factor"] = p->factor;
    j["antialias_sigma"] = p->antialias_sigma;
    j["shape"] = p->shape;
  } else if (const auto* p = std::get_if<MriParams>(&params)) {
    j["mask"] = tensor_to_json(p->mask);
  } else if (const auto* p = std::get_if<TomographyParams>(&params)) {
    j["angles_deg"] = p->angles_deg;
    j["size"] = p->size;
  } else if (const auto* p = std::get_if<CompressedSensingParams>(&params)) {
    j["measurements"] = p->measurements;
    j["shape"] = p->shape;
    j["seed"] = p->seed;
  }
  return j;
}

PhysicsParams physics_params_from_json(const json& j) {
  const auto type = field<std::string>(j, "type");
  if (type == "denoising") return DenoisingParams{field<Shape>(j, "shape")};
  if (type == "inpainting") return InpaintingParams{tensor_from_json(j.at("mask"))};
  if (type == "blur") return BlurParams{tensor_from_json(field<json>(j, "kernel")), field<Shape>(j, "shape")};
  if (type == "downsampling")
    return DownsamplingParams{field<Index>(j, "factor"), field<double>(j, "antialias_sigma"), field<Shape>(j, "shape")};
  if (type == "mri") return MriParams{tensor_from_json(field<json>(j, "mask"))};
  if (type == "tomography") return TomographyParams{field<std::vector<double>>(j, "angles_deg"), field<Index>(j, "size")};
  if (type == "compressed_sensing")
    return CompressedSensingParams{field<Index>(j, "measurements"), field<Shape>(j, "shape"),
                                   field<std::uint64_t>(j, "seed"), {}};
  throw FormatError("unknown physics type '" + type + "'");
}

json noise_to_json(const NoiseModel& n) {
  json j{{"type", to_string(n.kind)}};
  switch (n.kind) {
  case NoiseModel::Kind::None: break;
  case NoiseModel::Kind::Gaussian: j["sigma"] = n.sigma; break;
  case NoiseModel::Kind::Poisson: j["gain"] = n.gain; break;
  case NoiseModel::Kind::PoissonGaussian:
    j["gain"] = n.gain;
    j["sigma"] = n.sigma;
    break;
  case NoiseModel::Kind::Uniform: j["amplitude"] = n.amplitude; break;
  case NoiseModel::Kind::Gamma: j["concentration"] = n.concentration; break;
  }
  return j;
}

NoiseModel noise_from_json(const json& j) {
  NoiseModel n;
  n.kind = noise_kind_from_string(field<std::string>(j, "type"));
  switch (n.kind) {
  case NoiseModel::Kind::None: break;
  case NoiseModel::Kind::Gaussian: n.sigma = field<double>(j, "sigma"); break;
  case NoiseModel::Kind::Poisson: n.gain = field<double>(j, "gain"); break;
  case NoiseModel::Kind::PoissonGaussian:
    n.gain = field<double>(j, "gain");
    n.sigma = field<double>(j, "sigma");
    break;
  case NoiseModel::Kind::Uniform: n.amplitude = field<double>(j, "amplitude"); break;
  case NoiseModel::Kind::Gamma: n.concentration = field<double>(j, "concentration"); break;
  }
  n.validate();
  return n;
}

} // namespace invkit
