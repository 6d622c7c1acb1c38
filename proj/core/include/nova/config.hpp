#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nova/engine.hpp"

namespace nova {

enum class ExperimentKind { Run, Coverage, Contamination, Scaling, CumCost, Sustainability, Estimate };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

// c_gen lives in SimulationConfig::costs; the budget only sizes the batch.
struct CostsConfig {
  double budget = 0.0;  // > 0: batch size is the feasible batch under this budget
};

struct FitWindowConfig {
  double min_n = 0.0;  // occupancy window, 0 = unbounded
  double max_n = 0.0;
  double min_d = 10.0;  // cumulative-cost window
  double top_fraction = 0.1;
};

struct ThresholdsConfig {
  double m_low = 0.01;
  double r_low = 0.01;
  double f_critical = 0.1;
};

struct ContaminationConfig {
  std::vector<double> m_new_grid{0.2, 0.05, 0.01};
  std::vector<double> delta_grid{0.0005, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
  double u = 0.5;
  double r = 1.0;
  std::size_t window = 10;
  std::size_t n = 2000;
  // Matched-mass space: a flat tail of many tiny artifacts keeps M_new nearly
  // constant across the window.
  std::size_t n_valid = 500'000;
  std::size_t n_invalid = 1000;
  double alpha = 0.5;
};

struct ScalingConfig {
  std::vector<double> alphas{2.0};
  std::vector<std::size_t> n_grid{1'000, 10'000, 100'000, 1'000'000};
  std::size_t n_valid = 1'000'000;
};

struct SustainabilityConfig {
  std::vector<double> alphas{2.0, 1.5, 1.2, 1.05};
  double c0 = 1e6;
  double tau = 1.0;
  std::vector<double> t_grid{0, 1, 2, 4, 8, 16};
  double m_max = 100.0;
};

struct EstimateConfig {
  std::string batch_file;
  std::vector<double> s_values{1.0};
  std::vector<ArtifactId> discovered;
};

struct OutputConfig {
  std::string path = "out";
  std::string format = "csv";
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  ExperimentKind experiment = ExperimentKind::Run;
  std::string preset;  // name of the preset this config was derived from, if any
  bool has_space = false;
  SimulationConfig sim;
  CostsConfig costs;
  FitWindowConfig fit_window;
  ThresholdsConfig thresholds;
  ContaminationConfig contamination;
  ScalingConfig scaling;
  SustainabilityConfig sustainability;
  EstimateConfig estimate;
  OutputConfig output;
};

/// Parses a JSON config onto the documented defaults. `seed`, `space` and
/// `experiment` are required unless the document names a `preset`, in which
/// case the preset is the base. Unknown keys are rejected. Errors are
/// ErrorKind::Config with the offending key path in the message.
ExperimentConfig parse_config(std::string_view text);

/// Applies a JSON document on top of `base`; nothing is required.
ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base);

/// Cross-field validation; parse_config already calls it.
void validate(const ExperimentConfig& config);

std::string to_json_string(const ExperimentConfig& config);

std::vector<std::string> preset_names();

/// Canned scenarios. Throws ErrorKind::Config listing the known names.
ExperimentConfig preset(std::string_view name);

}  // namespace nova
