#include "invkit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "invkit/generators.hpp"
#include "invkit/image_io.hpp"
#include "invkit/phantoms.hpp"
#include "invkit/serialize.hpp"

namespace invkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config reading -------------------------------------------------------

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(join(path, key) + ": unknown field");
  }
}

template <typename T>
T read_as(const json& v, const std::string& where) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
  }
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return read_as<T>(j.at(key), join(path, key));
}

template <typename T>
T require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(join(path, key) + ": required field is missing");
  return read_as<T>(j.at(key), join(path, key));
}

double positive(double v, const std::string& where) {
  if (!(v > 0.0)) throw ConfigError(where + ": must be > 0");
  return v;
}

// "auto" or a positive number.
std::optional<double> auto_or_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  return positive(read_as<double>(v, join(path, key)), join(path, key));
}

NoiseModel parse_noise(const json& j, const std::string& path) {
  check_object(j, path, {"type", "sigma", "gain", "amplitude", "concentration"});
  NoiseModel n;
  try {
    n.kind = noise_kind_from_string(require<std::string>(j, path, "type"));
  } catch (const ConfigError& e) {
    throw ConfigError(join(path, "type") + ": " + e.what());
  }
  n.sigma = get_or<double>(j, path, "sigma", 0.0);
  n.gain = get_or<double>(j, path, "gain", 1.0);
  n.amplitude = get_or<double>(j, path, "amplitude", 0.0);
  n.concentration = get_or<double>(j, path, "concentration", 1.0);
  try {
    n.validate();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return n;
}

DataFidelity parse_fidelity(const json& j, const std::string& path) {
  check_object(j, path, {"type", "weight", "background"});
  DataFidelity f;
  try {
    f.kind = fidelity_kind_from_string(get_or<std::string>(j, path, "type", "l2"));
  } catch (const ConfigError& e) {
    throw ConfigError(join(path, "type") + ": " + e.what());
  }
  f.weight = positive(get_or<double>(j, path, "weight", 1.0), join(path, "weight"));
  f.background = get_or<double>(j, path, "background", 0.0);
  if (f.background < 0.0) throw ConfigError(join(path, "background") + ": must be >= 0");
  return f;
}

Prior parse_prior(const json& j, const std::string& path) {
  check_object(j, path, {"type", "weight", "epsilon", "levels", "tv_max_iter", "tv_tol"});
  Prior p;
  try {
    p.kind = prior_kind_from_string(require<std::string>(j, path, "type"));
  } catch (const ConfigError& e) {
    throw ConfigError(join(path, "type") + ": " + e.what());
  }
  p.weight = get_or<double>(j, path, "weight", 1.0);
  if (p.weight < 0.0) throw ConfigError(join(path, "weight") + ": must be >= 0");
  p.tv_epsilon = get_or<double>(j, path, "epsilon", 0.0);
  if (p.tv_epsilon < 0.0) throw ConfigError(join(path, "epsilon") + ": must be >= 0");
  p.levels = get_or<int>(j, path, "levels", 1);
  if (p.levels < 1) throw ConfigError(join(path, "levels") + ": must be >= 1");
  p.tv_opts.max_iter = get_or<int>(j, path, "tv_max_iter", p.tv_opts.max_iter);
  p.tv_opts.tol = get_or<double>(j, path, "tv_tol", p.tv_opts.tol);
  return p;
}

// Returns the denoiser and the σ it is called with (negative = use the noise σ).
std::pair<Denoiser, double> parse_denoiser(const json& j, const std::string& path) {
  check_object(j, path, {"type", "window_sigma", "lambda", "sigma"});
  Denoiser d;
  try {
    d.kind = denoiser_kind_from_string(get_or<std::string>(j, path, "type", "gaussian_smoother"));
  } catch (const ConfigError& e) {
    throw ConfigError(join(path, "type") + ": " + e.what());
  }
  d.window_sigma = get_or<double>(j, path, "window_sigma", d.window_sigma);
  if (d.window_sigma < 0.0) throw ConfigError(join(path, "window_sigma") + ": must be >= 0");
  d.tv_lambda = positive(get_or<double>(j, path, "lambda", d.tv_lambda), join(path, "lambda"));
  const double sigma = get_or<double>(j, path, "sigma", -1.0);
  return {d, sigma};
}

const std::set<std::string> kAlgorithms{"pgd", "fista", "admm", "drs", "pdhg"};

MethodSpec parse_method(const json& j, const NoiseModel& noise) {
  const std::string path = "method";
  if (!j.is_object()) throw ConfigError("method: expected an object");
  MethodSpec m;
  m.name = require<std::string>(j, path, "name");
  const double noise_sigma = noise.kind == NoiseModel::Kind::Gaussian || noise.kind == NoiseModel::Kind::PoissonGaussian
                                 ? noise.sigma
                                 : 0.0;
  if (kAlgorithms.count(m.name)) {
    check_object(j, path,
                 {"name", "fidelity", "prior", "denoiser", "max_iter", "step", "rho", "tau", "sigma_dual", "tol",
                  "zero_init", "inner_tol", "inner_max_iter"});
    m.algo.algorithm = algorithm_from_string(m.name);
    if (j.contains("fidelity")) m.fidelity = parse_fidelity(j.at("fidelity"), "method.fidelity");
    if (j.contains("prior") && j.contains("denoiser"))
      throw ConfigError("method: give either 'prior' or 'denoiser', not both");
    if (j.contains("prior")) m.regularizer = parse_prior(j.at("prior"), "method.prior");
    if (j.contains("denoiser")) {
      auto [d, s] = parse_denoiser(j.at("denoiser"), "method.denoiser");
      m.regularizer = PnpDenoiser{d, s >= 0.0 ? s : noise_sigma};
    }
    m.algo.max_iter = get_or<int>(j, path, "max_iter", m.algo.max_iter);
    if (m.algo.max_iter < 1) throw ConfigError("method.max_iter: must be >= 1");
    m.algo.step = auto_or_number(j, path, "step");
    m.algo.rho = positive(get_or<double>(j, path, "rho", m.algo.rho), "method.rho");
    m.algo.tau = auto_or_number(j, path, "tau");
    m.algo.sigma_dual = auto_or_number(j, path, "sigma_dual");
    m.algo.tol = get_or<double>(j, path, "tol", m.algo.tol);
    if (m.algo.tol < 0.0) throw ConfigError("method.tol: must be >= 0");
    m.algo.zero_init = get_or<bool>(j, path, "zero_init", false);
    m.algo.inner.tol = positive(get_or<double>(j, path, "inner_tol", m.algo.inner.tol), "method.inner_tol");
    m.algo.inner.max_iter = get_or<int>(j, path, "inner_max_iter", m.algo.inner.max_iter);
    if ((m.name == "admm" || m.name == "drs") && m.fidelity.kind != DataFidelity::Kind::L2)
      throw ConfigError("method.fidelity: " + m.name + " requires the l2 fidelity");
    if ((m.name == "pgd" || m.name == "fista") && !is_smooth(m.fidelity))
      throw ConfigError("method.fidelity: " + m.name + " requires a smooth fidelity");
  } else if (m.name == "artifact_removal") {
    check_object(j, path, {"name", "denoiser", "mode"});
    auto [d, s] = parse_denoiser(j.contains("denoiser") ? j.at("denoiser") : json::object(), "method.denoiser");
    m.denoiser = d;
    m.denoiser_sigma = s >= 0.0 ? s : noise_sigma;
    const auto mode = get_or<std::string>(j, path, "mode", "adjoint");
    if (mode == "adjoint")
      m.mode = BackprojectionMode::Adjoint;
    else if (mode == "pinv")
      m.mode = BackprojectionMode::Pinv;
    else
      throw ConfigError("method.mode: expected 'adjoint' or 'pinv'");
  } else if (m.name == "ula") {
    check_object(j, path, {"name", "fidelity", "prior", "iterations", "step", "burn_in", "thinning"});
    if (j.contains("fidelity")) m.fidelity = parse_fidelity(j.at("fidelity"), "method.fidelity");
    if (!is_smooth(m.fidelity)) throw ConfigError("method.fidelity: ula requires a smooth fidelity");
    if (!j.contains("prior")) throw ConfigError("method.prior: required field is missing");
    m.prior = parse_prior(j.at("prior"), "method.prior");
    if (!has_gradient(m.prior)) throw ConfigError("method.prior: ula requires a smooth prior (tv or tikhonov)");
    m.chain.iterations = get_or<int>(j, path, "iterations", m.chain.iterations);
    if (m.chain.iterations < 2) throw ConfigError("method.iterations: must be >= 2");
    m.chain.step = auto_or_number(j, path, "step");
    if (j.contains("burn_in")) m.chain.burn_in = read_as<int>(j.at("burn_in"), "method.burn_in");
    m.chain.thinning = get_or<int>(j, path, "thinning", 1);
    if (m.chain.thinning < 1) throw ConfigError("method.thinning: must be >= 1");
  } else {
    throw ConfigError("method.name: unknown method '" + m.name +
                      "' (expected pgd, fista, admm, drs, pdhg, artifact_removal or ula)");
  }
  return m;
}

std::string method_label(const MethodSpec& m) {
  if (m.name == "artifact_removal")
    return m.name + "/" + (m.mode == BackprojectionMode::Adjoint ? "adjoint" : "pinv") + "/" + to_string(m.denoiser.kind);
  if (m.name == "ula") return "ula/" + to_string(m.prior.kind);
  if (const auto* p = std::get_if<Prior>(&m.regularizer)) return m.name + "/" + to_string(p->kind);
  if (const auto* d = std::get_if<PnpDenoiser>(&m.regularizer)) return m.name + "/pnp-" + to_string(d->denoiser.kind);
  return m.name;
}

LossSpec parse_loss(const json& j, const std::string& path) {
  if (j.is_string()) return parse_loss(json{{"type", j}}, path);
  check_object(j, path, {"type", "probes", "probe_step", "alpha", "draws", "split_ratio", "transforms"});
  LossSpec l;
  l.type = require<std::string>(j, path, "type");
  if (l.type == "sure_gaussian") {
    l.sure.probes = get_or<int>(j, path, "probes", 1);
    if (l.sure.probes < 1) throw ConfigError(join(path, "probes") + ": must be >= 1");
    if (j.contains("probe_step"))
      l.sure.probe_step = positive(read_as<double>(j.at("probe_step"), join(path, "probe_step")), join(path, "probe_step"));
  } else if (l.type == "r2r_gaussian") {
    l.alpha = positive(get_or<double>(j, path, "alpha", 0.5), join(path, "alpha"));
    l.draws = get_or<int>(j, path, "draws", 1);
    if (l.draws < 1) throw ConfigError(join(path, "draws") + ": must be >= 1");
  } else if (l.type == "splitting") {
    l.split_ratio = get_or<double>(j, path, "split_ratio", 0.9);
    if (!(l.split_ratio > 0.0 && l.split_ratio <= 1.0)) throw ConfigError(join(path, "split_ratio") + ": must be in (0, 1]");
  } else if (l.type == "ei") {
    if (j.contains("transforms")) {
      const auto names = read_as<std::vector<std::string>>(j.at("transforms"), join(path, "transforms"));
      try {
        l.transforms = transform_kinds_from_names(names);
      } catch (const ConfigError& e) {
        throw ConfigError(join(path, "transforms") + ": " + e.what());
      }
      if (names.empty()) throw ConfigError(join(path, "transforms") + ": at least one kind is required");
    }
  } else if (l.type != "sup_mse") {
    throw ConfigError(join(path, "type") + ": unknown loss '" + l.type +
                      "' (expected sup_mse, sure_gaussian, r2r_gaussian, splitting or ei)");
  }
  return l;
}

const std::set<std::string> kPhysicsTypes{"denoising", "inpainting", "blur", "downsampling",
                                          "mri", "tomography", "compressed_sensing"};

// ---- dataset --------------------------------------------------------------

std::vector<fs::path> source_files(const ExperimentConfig& cfg) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(cfg.dataset.source, ec)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".pfm")) files.push_back(entry.path());
  }
  if (ec) throw ConfigError("dataset.source: cannot read directory " + cfg.dataset.source.string());
  std::sort(files.begin(), files.end());
  return files;
}

Index sample_count(const ExperimentConfig& cfg) {
  if (!cfg.dataset.phantom.empty()) return cfg.dataset.count;
  const auto files = source_files(cfg);
  if (files.empty()) throw ConfigError("dataset.source: no .pgm or .pfm images in " + cfg.dataset.source.string());
  const Index available = static_cast<Index>(files.size());
  if (cfg.dataset.count > available)
    throw ConfigError("dataset.count: " + std::to_string(cfg.dataset.count) + " images requested, " +
                      std::to_string(available) + " available");
  return cfg.dataset.count > 0 ? cfg.dataset.count : available;
}

Tensor load_ground_truth(const ExperimentConfig& cfg, Index i, Index n) {
  const auto& ds = cfg.dataset;
  if (ds.phantom == "disc") return disc_phantom(ds.size);
  if (ds.phantom == "shepp") return shepp_phantom(ds.size);
  if (ds.phantom == "random_smooth") {
    RngState rng = derive_child(cfg.seed, static_cast<std::uint64_t>(2 * n + i));
    return random_smooth_phantom(ds.size, rng);
  }
  const auto files = source_files(cfg);
  try {
    return read_image(files.at(static_cast<std::size_t>(i)));
  } catch (const Error& e) {
    throw ConfigError("dataset.source: " + std::string(e.what()));
  }
}

Shape image_shape(const ExperimentConfig& cfg) {
  if (!cfg.dataset.phantom.empty()) return {cfg.dataset.size, cfg.dataset.size};
  return load_ground_truth(cfg, 0, sample_count(cfg)).shape();
}

bool image_is_complex(const std::string& physics_type) { return physics_type == "mri"; }

// Draws ξ from the generator settings; infeasible settings are config errors.
PhysicsParams generate_params(const PhysicsSection& ps, const Shape& shape, RngState& rng) {
  const json& s = ps.settings;
  const std::string path = "physics";
  try {
    if (ps.type == "denoising") return DenoisingParams{shape};
    if (ps.type == "inpainting") {
      const double density = get_or<double>(s, path, "density", 0.5);
      if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("physics.density: must be in [0, 1]");
      return InpaintingParams{gen_bernoulli_mask(shape, density, rng)};
    }
    if (ps.type == "blur") {
      const auto kind = get_or<std::string>(s, path, "kernel", "gaussian");
      if (kind == "gaussian") {
        const double sigma = positive(get_or<double>(s, path, "kernel_sigma", 1.0), "physics.kernel_sigma");
        const Index side = get_or<Index>(s, path, "kernel_size", 2 * static_cast<Index>(std::ceil(3.0 * sigma)) + 1);
        return BlurParams{gen_gaussian_kernel(sigma, side), shape};
      }
      if (kind == "motion") {
        const Index length = get_or<Index>(s, path, "motion_length", 5);
        return BlurParams{gen_motion_kernel(length, rng), shape};
      }
      throw ConfigError("physics.kernel: expected 'gaussian' or 'motion'");
    }
    if (ps.type == "downsampling")
      return DownsamplingParams{get_or<Index>(s, path, "factor", 2), get_or<double>(s, path, "antialias_sigma", 1.0),
                                shape};
    if (ps.type == "mri")
      return MriParams{gen_cartesian_mri_mask(shape, get_or<double>(s, path, "acceleration", 4.0),
                                              get_or<double>(s, path, "center_fraction", 0.08), rng)};
    if (ps.type == "tomography") {
      if (shape.size() != 2 || shape[0] != shape[1])
        throw ConfigError("physics.type: tomography needs square single-channel images, got " + to_string(shape));
      std::vector<double> angles;
      if (s.contains("angles_deg"))
        angles = read_as<std::vector<double>>(s.at("angles_deg"), "physics.angles_deg");
      else
        angles = uniform_angles(get_or<Index>(s, path, "angles", 60));
      return TomographyParams{angles, shape[0]};
    }
    if (ps.type == "compressed_sensing")
      return CompressedSensingParams{require<Index>(s, path, "measurements"), shape, rng.next_u64(), {}};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("physics: " + std::string(e.what()));
  }
  throw ConfigError("physics.type: unknown physics '" + ps.type + "'");
}

// Builds the operator, reporting invalid generated parameters as config errors.
Physics build_physics(PhysicsParams params, const NoiseModel& noise) {
  try {
    return Physics(std::move(params), noise);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("physics: " + std::string(e.what()));
  }
}

std::string sample_file(Index i, const char* suffix) { return "samples/" + std::to_string(i) + suffix; }

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---- results --------------------------------------------------------------

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct ResultRow {
  std::string id;
  std::vector<std::optional<double>> values; // metrics, then losses
  std::optional<double> wall_ms;
  std::string error;
};

void add_error(ResultRow& row, const std::string& what, const std::exception& e) {
  if (!row.error.empty()) row.error += "; ";
  row.error += what + ": " + e.what();
}

double gaussian_sigma(const NoiseModel& noise, const char* loss) {
  if (noise.kind != NoiseModel::Kind::Gaussian || !(noise.sigma > 0.0))
    throw CapabilityError(std::string(loss) + " needs gaussian noise with sigma > 0");
  return noise.sigma;
}

double evaluate_loss(const LossSpec& l, const MethodSpec& method, const Tensor& x, const Tensor& x_hat,
                     const Tensor& y, const Physics& physics, std::uint64_t method_seed, RngState& rng) {
  const Reconstructor model = [&](const Tensor& yy, const Physics& ph) { return run_method(method, yy, ph, method_seed); };
  if (l.type == "sup_mse") return sup_mse(x_hat, x).value;
  if (l.type == "sure_gaussian") {
    if (physics.descriptor() != "denoising") throw CapabilityError("sure_gaussian needs denoising physics");
    return sure_gaussian(model, y, gaussian_sigma(physics.noise(), "sure_gaussian"), rng, l.sure).value;
  }
  if (l.type == "r2r_gaussian")
    return r2r_gaussian(model, y, physics, gaussian_sigma(physics.noise(), "r2r_gaussian"), rng, l.alpha, l.draws).value;
  if (l.type == "splitting") return splitting_loss(model, y, physics, rng, l.split_ratio).value;
  // ei
  const Shape& shape = physics.domain().shape;
  const Index h = shape[shape.size() - 2], w = shape[shape.size() - 1];
  const TransformKinds kinds = l.transforms;
  return ei_loss(model, y, physics, [=](RngState& r) { return random_element(r, kinds, h, w); }, rng).value;
}

} // namespace

// ---- public ---------------------------------------------------------------

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  check_object(j, "", {"name", "seed", "output", "dataset", "physics", "method", "metrics", "metric_config", "losses",
                       "report_timing"});
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.name = get_or<std::string>(j, "", "name", cfg.name);
  cfg.seed = require<std::uint64_t>(j, "", "seed");
  cfg.output = base_dir / get_or<std::string>(j, "", "output", "output");
  cfg.report_timing = get_or<bool>(j, "", "report_timing", false);

  if (!j.contains("dataset")) throw ConfigError("dataset: required section is missing");
  const json& ds = j.at("dataset");
  check_object(ds, "dataset", {"phantom", "source", "size", "count"});
  if (ds.contains("phantom") == ds.contains("source"))
    throw ConfigError("dataset: give exactly one of 'phantom' or 'source'");
  if (ds.contains("phantom")) {
    cfg.dataset.phantom = read_as<std::string>(ds.at("phantom"), "dataset.phantom");
    if (cfg.dataset.phantom != "disc" && cfg.dataset.phantom != "shepp" && cfg.dataset.phantom != "random_smooth")
      throw ConfigError("dataset.phantom: unknown phantom '" + cfg.dataset.phantom +
                        "' (expected disc, shepp or random_smooth)");
    cfg.dataset.size = get_or<Index>(ds, "dataset", "size", 32);
    if (cfg.dataset.size < 1) throw ConfigError("dataset.size: must be >= 1");
    cfg.dataset.count = get_or<Index>(ds, "dataset", "count", 1);
    if (cfg.dataset.count < 1) throw ConfigError("dataset.count: must be >= 1");
  } else {
    cfg.dataset.source = base_dir / read_as<std::string>(ds.at("source"), "dataset.source");
    if (!fs::is_directory(cfg.dataset.source))
      throw ConfigError("dataset.source: not a directory: " + cfg.dataset.source.string());
    cfg.dataset.count = get_or<Index>(ds, "dataset", "count", 0);
    if (cfg.dataset.count < 0) throw ConfigError("dataset.count: must be >= 0");
  }

  if (!j.contains("physics")) throw ConfigError("physics: required section is missing");
  const json& ph = j.at("physics");
  check_object(ph, "physics",
               {"type", "noise", "per_sample", "density", "kernel", "kernel_sigma", "kernel_size", "motion_length",
                "factor", "antialias_sigma", "acceleration", "center_fraction", "angles", "angles_deg",
                "measurements"});
  cfg.physics.type = require<std::string>(ph, "physics", "type");
  if (!kPhysicsTypes.count(cfg.physics.type)) throw ConfigError("physics.type: unknown physics '" + cfg.physics.type + "'");
  cfg.physics.settings = ph;
  cfg.physics.per_sample = get_or<bool>(ph, "physics", "per_sample", false);
  if (ph.contains("noise")) cfg.physics.noise = parse_noise(ph.at("noise"), "physics.noise");

  if (!j.contains("method")) throw ConfigError("method: required section is missing");
  cfg.method = parse_method(j.at("method"), cfg.physics.noise);

  if (j.contains("metrics")) {
    cfg.metrics = read_as<std::vector<std::string>>(j.at("metrics"), "metrics");
    for (const auto& m : cfg.metrics)
      if (!is_metric_name(m)) throw ConfigError("metrics: unknown metric '" + m + "' (expected mse, mae, psnr or ssim)");
  }
  if (j.contains("metric_config")) {
    const json& mc = j.at("metric_config");
    check_object(mc, "metric_config", {"data_range", "normalize_inputs", "complex_magnitude"});
    cfg.metric_config.data_range = positive(get_or<double>(mc, "metric_config", "data_range", 1.0), "metric_config.data_range");
    cfg.metric_config.normalize_inputs = get_or<bool>(mc, "metric_config", "normalize_inputs", false);
    cfg.metric_config.complex_magnitude = get_or<bool>(mc, "metric_config", "complex_magnitude", false);
  }
  if (j.contains("losses")) {
    const json& ls = j.at("losses");
    if (!ls.is_array()) throw ConfigError("losses: expected an array");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < ls.size(); ++k) {
      cfg.losses.push_back(parse_loss(ls[k], "losses[" + std::to_string(k) + "]"));
      if (!seen.insert(cfg.losses.back().type).second)
        throw ConfigError("losses[" + std::to_string(k) + "]: duplicate loss '" + cfg.losses.back().type + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offsets from the parser are 1-based and point just past the error.
    const std::size_t end = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON (line " + std::to_string(line) + ", column " + std::to_string(col) + ")");
  }
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(j, base);
}

json dataset_generate(const ExperimentConfig& cfg) {
  const Index n = sample_count(cfg);
  const Shape shape = image_shape(cfg);
  const auto& ps = cfg.physics;

  std::optional<PhysicsParams> fixed;
  if (!ps.per_sample) {
    RngState gen = derive_child(cfg.seed, static_cast<std::uint64_t>(3 * n));
    fixed = generate_params(ps, shape, gen);
  }

  fs::create_directories(cfg.output / "samples");
  json samples = json::array();
  for (Index i = 0; i < n; ++i) {
    const Tensor x = quantize_f32(load_ground_truth(cfg, i, n));
    if (x.shape() != shape)
      throw ConfigError("dataset.source: image " + std::to_string(i) + " has shape " + to_string(x.shape()) +
                        ", expected " + to_string(shape));
    PhysicsParams params;
    if (fixed) {
      params = *fixed;
    } else {
      RngState gen = derive_child(cfg.seed, static_cast<std::uint64_t>(i));
      params = generate_params(ps, shape, gen);
    }
    const Physics physics = build_physics(params, ps.noise);
    RngState noise_rng = derive_child(cfg.seed, static_cast<std::uint64_t>(n + i));
    const Tensor y = physics.forward(image_is_complex(ps.type) ? x.as_complex() : x, noise_rng);

    json entry{{"id", i}, {"x", sample_file(i, "_x.pfm")}, {"y", sample_file(i, "_y.pfm")}};
    write_image(x, cfg.output / sample_file(i, "_x.pfm"));
    write_image(y, cfg.output / sample_file(i, "_y.pfm"));
    if (!fixed) {
      entry["params"] = sample_file(i, "_params.json");
      write_json(physics_params_to_json(physics.params()), cfg.output / sample_file(i, "_params.json"));
    }
    samples.push_back(entry);
  }

  json physics{{"descriptor", ps.type},
               {"policy", fixed ? "fixed" : "per_sample"},
               {"noise", noise_to_json(ps.noise)},
               {"complex_images", image_is_complex(ps.type)}};
  if (fixed) physics["params"] = physics_params_to_json(build_physics(*fixed, ps.noise).params());
  json manifest{{"name", cfg.name},
                {"seed", cfg.seed},
                {"count", n},
                {"image_shape", shape},
                {"physics", physics},
                {"samples", samples}};
  write_json(manifest, cfg.output / "manifest.json");
  return manifest;
}

Tensor run_method(const MethodSpec& m, const Tensor& y, const Physics& physics, std::uint64_t rng_seed) {
  if (m.name == "artifact_removal") return artifact_removal(m.denoiser, y, physics, m.denoiser_sigma, m.mode);
  if (m.name == "ula") {
    RngState rng(rng_seed);
    return ula_sample(y, physics, m.fidelity, m.prior, m.chain, rng).stats.mean;
  }
  return reconstruct(y, physics, m.fidelity, m.regularizer, m.algo).x;
}

void run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path manifest_path = cfg.output / "manifest.json";
  const json manifest = fs::exists(manifest_path) ? read_json(manifest_path) : dataset_generate(cfg);
  const Index n = manifest.at("count").get<Index>();
  const json& mp = manifest.at("physics");
  const NoiseModel noise = noise_from_json(mp.at("noise"));
  const bool fixed = mp.at("policy").get<std::string>() == "fixed";
  std::optional<PhysicsParams> fixed_params;
  if (fixed) fixed_params = physics_params_from_json(mp.at("params"));

  fs::create_directories(cfg.output / "recon");
  std::vector<ResultRow> rows;
  for (Index i = 0; i < n; ++i) {
    const json& s = manifest.at("samples").at(static_cast<std::size_t>(i));
    ResultRow row;
    row.id = std::to_string(i);
    row.values.assign(cfg.metrics.size() + cfg.losses.size(), std::nullopt);
    const std::uint64_t method_seed = child_seed(cfg.seed, static_cast<std::uint64_t>(5 * n + i));
    try {
      const Tensor x = read_image(cfg.output / s.at("x").get<std::string>());
      const Tensor y = read_image(cfg.output / s.at("y").get<std::string>());
      const Physics physics(fixed ? *fixed_params
                                  : physics_params_from_json(read_json(cfg.output / s.at("params").get<std::string>())),
                            noise);
      Tensor x_hat;
      try {
        const auto start = std::chrono::steady_clock::now();
        x_hat = run_method(cfg.method, y, physics, method_seed);
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      } catch (const std::exception& e) {
        add_error(row, "method", e);
      }
      if (!x_hat.empty()) {
        const std::string stem = std::to_string(i) + "_xhat";
        write_image(x_hat, cfg.output / "recon" / (stem + ".pfm"));
        if (x_hat.planes() == 1) write_image(x_hat.is_complex() ? x_hat.abs() : x_hat, cfg.output / "recon" / (stem + ".pgm"));

        MetricConfig mc = cfg.metric_config;
        if (x_hat.is_complex() || x.is_complex()) mc.complex_magnitude = true;
        for (std::size_t k = 0; k < cfg.metrics.size(); ++k) {
          try {
            row.values[k] = metric_by_name(cfg.metrics[k], x_hat, x, mc);
          } catch (const std::exception& e) {
            add_error(row, cfg.metrics[k], e);
          }
        }
        RngState loss_rng = derive_child(cfg.seed, static_cast<std::uint64_t>(4 * n + i));
        for (std::size_t k = 0; k < cfg.losses.size(); ++k) {
          try {
            row.values[cfg.metrics.size() + k] =
                evaluate_loss(cfg.losses[k], cfg.method, x, x_hat, y, physics, method_seed, loss_rng);
          } catch (const std::exception& e) {
            add_error(row, cfg.losses[k].type, e);
          }
        }
      }
    } catch (const std::exception& e) {
      add_error(row, "sample", e);
    }
    log << "sample " << i << (row.error.empty() ? " ok" : " error: " + row.error) << '\n';
    rows.push_back(std::move(row));
  }

  // Means skip missing cells; an infinite PSNR makes the mean infinite.
  ResultRow mean_row;
  mean_row.id = "mean";
  const std::size_t columns = cfg.metrics.size() + cfg.losses.size();
  for (std::size_t k = 0; k <= columns; ++k) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : rows) {
      const auto& v = k < columns ? r.values[k] : r.wall_ms;
      if (v) {
        sum += *v;
        ++count;
      }
    }
    const std::optional<double> mean = count ? std::optional<double>(sum / count) : std::nullopt;
    if (k < columns)
      mean_row.values.push_back(mean);
    else
      mean_row.wall_ms = mean;
  }

  std::ofstream csv(cfg.output / "results.csv", std::ios::binary);
  if (!csv) throw Error("cannot write " + (cfg.output / "results.csv").string());
  csv << "sample_id,method";
  for (const auto& m : cfg.metrics) csv << ',' << m;
  for (const auto& l : cfg.losses) csv << ',' << l.type;
  csv << ",wall_time_ms,error\n";
  const std::string label = method_label(cfg.method);
  rows.push_back(mean_row);
  for (const auto& r : rows) {
    csv << r.id << ',' << csv_escape(label);
    for (const auto& v : r.values) csv << ',' << (v ? format_value(*v) : "NA");
    csv << ',' << (cfg.report_timing && r.wall_ms ? format_value(*r.wall_ms) : "NA");
    csv << ',' << csv_escape(r.error) << '\n';
  }
}

double adjoint_check(const ExperimentConfig& cfg) {
  const Index n = sample_count(cfg);
  const Shape shape = image_shape(cfg);
  RngState gen = cfg.physics.per_sample ? derive_child(cfg.seed, 0)
                                        : derive_child(cfg.seed, static_cast<std::uint64_t>(3 * n));
  const Physics physics = build_physics(generate_params(cfg.physics, shape, gen), cfg.physics.noise);
  RngState rng(cfg.seed);
  return adjoint_test(physics.map(), rng, 20);
}

} // namespace invkit
