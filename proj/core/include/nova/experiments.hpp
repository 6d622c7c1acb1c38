#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nova/analysis.hpp"
#include "nova/config.hpp"
#include "nova/engine.hpp"

namespace nova {

/// %.17g, the round-trip format used in every CSV.
std::string format_double(double x);

/// Header of records.csv.
std::string_view records_csv_header();

/// One row per (replicate, iteration), replicates in order.
void write_records_csv(std::ostream& out, std::span<const RunResult> runs);

/// Runs replicates 0..reps-1 of (seed, replicate) concurrently; result i is replicate i.
std::vector<RunResult> run_replicates(const SimulationConfig& config, const KnowledgeSpace& space, std::uint64_t seed,
                                      std::size_t reps, std::size_t threads);

/// Terminal statistics of one replicate.
struct ReplicateStats {
  std::size_t iterations = 0;
  std::uint64_t g = 0;               // |K^+| after the last accumulation
  std::uint64_t final_discovered = 0;  // after the last retraining step
  std::uint64_t b = 0;
  std::uint64_t b_dedup = 0;
  std::optional<std::size_t> coverage_t;
  std::uint64_t hard_set_discovered = 0;    // discovered ids with r_k = 0
  std::uint64_t out_of_support_discovered = 0;  // discovered valid ids outside supp(Q_0)
  std::uint64_t sum_delta_g = 0;
  std::uint64_t sum_delta_g_human = 0;
  double e_new_total = 0.0;
  double cost_total = 0.0;
};

/// `q0` is the replicate's initial generator, which defines supp(Q_0).
ReplicateStats replicate_stats(const RunResult& run, const SimulationConfig& config, const GeneratorDistribution& q0);

/// Windowed contamination fraction at a matched starting new-valid mass.
struct ContaminationCell {
  double m_target = 0.0;
  double m_actual = 0.0;      // M_new at the start of the window
  double delta = 0.0;
  double formula = 0.0;       // f_marg_sparse at (delta, U, r, m_actual)
  double realized_mean = 0.0;   // mean over replicates of sum dB / sum (dG + dB)
  double realized_sd = 0.0;     // across replicates
  double realized_se = 0.0;
  double predicted_mean = 0.0;  // same ratio from each replicate's pre-batch masses
  std::size_t replicates = 0;
};

/// The matched-mass space and its fixed Static generator.
struct ContaminationBench {
  explicit ContaminationBench(const ContaminationConfig& config);

  /// Top ranks discovered until M_new <= m_target, mass cache primed.
  RetainedState matched_state(double m_target) const;

  ContaminationConfig config;
  KnowledgeSpace space;
  GeneratorDistribution q;
};

/// Runs `window` Static iterations per replicate from the matched state.
ContaminationCell contamination_cell(const ContaminationBench& bench, double m_target, double delta,
                                     std::size_t reps, std::uint64_t seed, std::size_t threads);
ContaminationCell contamination_cell(const ContaminationConfig& config, double m_target, double delta,
                                     std::size_t reps, std::uint64_t seed, std::size_t threads);

/// Runs the configured experiment, writing its files under config.output.path.
/// Returns 0 on success, 3 on a runtime error (reported on `err`).
int run_command(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Reads newline-delimited decimal artifact ids; blank lines are skipped.
std::vector<ArtifactId> read_batch_file(const std::filesystem::path& path);

}  // namespace nova
