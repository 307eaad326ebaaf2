#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "calderon/geometry.hpp"
#include "calderon/io.hpp"

namespace calderon {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct NoiseModel {
  enum class Kind { none, uniform, gaussian };
  Kind kind = Kind::none;
  double param = 0.0;  // half-width for uniform, standard deviation for gaussian
};

/// Runner configuration. Zeros mean "use the experiment's default"; the
/// effective values are echoed into the manifest.
struct ExperimentConfig {
  std::string experiment;
  int n = 0;
  int m = 0;
  BoxPrior box{0.5, 1.5};
  int grid_k = 5;
  int trials = 0;
  NoiseModel noise;
  bool noise_explicit = false;  // cfg.noise overrides the experiment default
  std::uint64_t seed = 20250808;
  std::filesystem::path out_dir = "out";
  std::string format = "csv";
  bool full_scale = false;
  unsigned threads = 0;
};

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

/// Everything an experiment produced: the per-trial summary rows, ordered
/// aggregate statistics, named CSV tables and SVG figures. Byte-identical
/// across reruns and thread counts; wall-clock timings live apart and go to
/// timings.json only.
struct RunManifest {
  ExperimentConfig config;
  std::string version = kArtifactVersion;
  std::vector<std::string> trial_columns;
  std::vector<std::vector<double>> trial_rows;
  std::vector<std::pair<std::string, double>> aggregates;
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, std::string>> figures;  // name -> svg
  std::vector<StageTiming> timings;

  double aggregate(const std::string& name) const;
};

const std::vector<std::string>& experiment_names();

/// Dispatches on cfg.experiment; unknown names raise invalid_input_error
/// (a usage error at the CLI).
RunManifest run_experiment(const ExperimentConfig& cfg);

/// Writes manifest.json, trials.csv, the per-figure CSVs and SVGs, and
/// timings.json under cfg.out_dir. format == "json" additionally embeds the
/// trial rows in the manifest.
void emit(const RunManifest& manifest, const std::string& format);

std::string manifest_to_json(const RunManifest& manifest, bool include_rows);

} // namespace calderon
