#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nova/engine.hpp"

namespace nova {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;  // natural-log offset
  double r_squared = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
};

struct AmplificationReport {
  double a_guide = 1.0;
  double a_verify = 1.0;
  double a_gen = 1.0;
  double a_h = 1.0;
};

enum class Regime { Safe, ContaminationLimited, Collapse };
enum class Effort { Generation, Guidance, Verification };
std::string to_string(Regime regime);
std::string to_string(Effort effort);

/// Either a finite value or an unbounded flag (value is +inf then).
struct Bound {
  double value = 0.0;
  bool unbounded = false;
};

// Contamination

/// delta U / (r M + delta U).
double f_marg_sparse(double delta, double u, double r, double m_new);

/// r M f / (U (1 - f)); unbounded when U = 0.
Bound delta_star(double r, double m_new, double u, double f_critical);

Regime classify_regime(double delta, double delta_star_value, double m_new, double m_low_threshold = 0.01);

// Verification budgets

/// floor(budget / (c_gen + tau_mean)).
std::uint64_t feasible_batch(double budget, double c_gen, double tau_mean);

/// (a delta0 U w0^a c_gen / (r M))^{1/(a+1)}.
double w_star(double a, double delta0, double u, double w0, double c_gen, double r, double m_new);

// Human augmentation

AmplificationReport amplification(double n_ai, double n_h, double r, double r_eff, double rho_h, double m_new,
                                  double m_new_guided, double m_new_h);

Effort effort_allocation(double m_new, double r, double m_low_threshold = 0.01, double r_low_threshold = 0.01);

// Sustainability

/// (C0 / c_gen)^{1/alpha} 2^{t / (alpha tau)}.
double sustainability_bound(double c0, double c_gen, double alpha, double tau, double t);

/// (M_max / c_gen)^{1/(alpha - 1)}; unbounded at alpha = 1.
Bound marginal_frontier(double m_max, double c_gen, double alpha);

/// 2 P L.
double transformer_gen_cost(double params, double output_len);

// Fitting and scaling experiments

/// OLS on (ln x, ln y).
ScalingFit fit_power_law(std::span<const Point> points);

struct OccupancyOptions {
  std::size_t n_valid = 1'000'000;
  std::size_t threads = 0;  // 0: hardware concurrency
  // Fit window over N; 0 means unbounded on that side.
  double fit_min_n = 0.0;
  double fit_max_n = 0.0;
};

struct OccupancyResult {
  std::vector<Point> curve;        // (N, mean distinct)
  std::vector<double> std_error;   // per grid point
  ScalingFit fit;
  std::vector<std::string> warnings;
};

/// Mean number of distinct values among N i.i.d. Zipf(alpha) draws for each N
/// in the grid. Grid points above the pre-saturation guard n_valid^alpha / 10
/// are dropped with a warning.
OccupancyResult occupancy_experiment(double alpha, std::span<const std::size_t> n_grid, std::size_t reps,
                                     std::uint64_t seed, const OccupancyOptions& options = {});

struct CostFitWindow {
  double min_d = 10.0;
  double top_fraction_excluded = 0.1;
  std::size_t grid_points = 24;
};

struct CostCurve {
  std::vector<Point> exposure;   // (D, mean E_new)
  std::vector<Point> cost;       // (D, mean c_gen * E_new)
  std::vector<Point> raw_cost;   // (D, mean cumulative candidate cost)
  std::vector<Point> marginal;   // (D, dE_new/dD)
  std::vector<Point> raw_marginal;
  ScalingFit exposure_fit;
  ScalingFit marginal_fit;
  ScalingFit raw_cost_fit;
  ScalingFit raw_marginal_fit;
};

/// Discovery-cost curves averaged over replicates on a log-spaced D grid.
/// Each replicate contributes its (E_new, cost) at the point g reaches D,
/// interpolated within the crossing batch.
CostCurve cumulative_cost_curve(std::span<const std::vector<IterationRecord>> replicates, double c_gen,
                                const CostFitWindow& window = {});

}  // namespace nova
