#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "invkit/losses.hpp"
#include "invkit/metrics.hpp"
#include "invkit/optim.hpp"
#include "invkit/sampling.hpp"

namespace invkit {

struct DatasetSection {
  std::string phantom;              // disc | shepp | random_smooth
  std::filesystem::path source;     // image directory, used when phantom is empty
  Index size = 32;
  Index count = 1;
};

struct PhysicsSection {
  std::string type;
  nlohmann::json settings; // type-specific generator settings
  NoiseModel noise;
  bool per_sample = false;
};

struct MethodSpec {
  std::string name; // pgd | fista | admm | drs | pdhg | artifact_removal | ula
  DataFidelity fidelity;
  Regularizer regularizer;
  AlgoConfig algo;
  Denoiser denoiser;
  double denoiser_sigma = 0.0;
  BackprojectionMode mode = BackprojectionMode::Adjoint;
  Prior prior; // ula
  ChainConfig chain;
};

struct LossSpec {
  std::string type; // sup_mse | sure_gaussian | r2r_gaussian | splitting | ei
  SureOptions sure;
  double alpha = 0.5;
  int draws = 1;
  double split_ratio = 0.9;
  TransformKinds transforms{false, true, true};
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;
  std::filesystem::path output;
  DatasetSection dataset;
  PhysicsSection physics;
  MethodSpec method;
  std::vector<std::string> metrics{"psnr", "ssim"};
  MetricConfig metric_config;
  std::vector<LossSpec> losses;
  bool report_timing = false;
};

/// Parses a config file; malformed JSON and invalid fields raise ConfigError
/// (with line/column or the offending field path).
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Simulates the paired dataset under <output>/samples and writes
/// <output>/manifest.json; returns the manifest.
nlohmann::json dataset_generate(const ExperimentConfig& cfg);

/// Reconstructs every sample, writing <output>/results.csv and
/// <output>/recon/. Generates the dataset first when no manifest exists.
void run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Worst dot-test error of the configured physics (sample 0).
double adjoint_check(const ExperimentConfig& cfg);

/// Applies a parsed method; rng only feeds ula.
Tensor run_method(const MethodSpec& method, const Tensor& y, const Physics& physics, std::uint64_t rng_seed);

} // namespace invkit
