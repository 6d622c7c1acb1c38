#include "nova/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nova/error.hpp"
#include "nova/knowledge.hpp"
#include "nova/numeric.hpp"
#include "nova/parallel.hpp"
#include "nova/sampler.hpp"

namespace nova {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Safe: return "safe";
    case Regime::ContaminationLimited: return "contamination_limited";
    case Regime::Collapse: return "collapse";
  }
  return "unknown";
}

std::string to_string(Effort effort) {
  switch (effort) {
    case Effort::Generation: return "generation";
    case Effort::Guidance: return "guidance";
    case Effort::Verification: return "verification";
  }
  return "unknown";
}

double f_marg_sparse(double delta, double u, double r, double m_new) {
  const double bad = delta * u;
  const double denom = r * m_new + bad;
  if (!(denom > 0.0)) throw Error(ErrorKind::UndefinedFraction, "r*m_new + delta*u must be positive");
  return bad / denom;
}

Bound delta_star(double r, double m_new, double u, double f_critical) {
  if (!(f_critical > 0.0 && f_critical < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "f_critical must lie in (0,1)");
  }
  if (u == 0.0) return {std::numeric_limits<double>::infinity(), true};
  if (!(u > 0.0)) throw Error(ErrorKind::InvalidParameter, "invalid mass must be non-negative");
  return {r * m_new * f_critical / (u * (1.0 - f_critical)), false};
}

Regime classify_regime(double delta, double delta_star_value, double m_new, double m_low_threshold) {
  if (delta >= delta_star_value) return Regime::Collapse;
  if (m_new <= m_low_threshold) return Regime::ContaminationLimited;
  return Regime::Safe;
}

std::uint64_t feasible_batch(double budget, double c_gen, double tau_mean) {
  const double per_candidate = c_gen + tau_mean;
  if (!(per_candidate > 0.0)) throw Error(ErrorKind::InvalidParameter, "per-candidate cost must be positive");
  if (!(budget >= 0.0)) throw Error(ErrorKind::InvalidParameter, "budget must be non-negative");
  return static_cast<std::uint64_t>(std::floor(budget / per_candidate));
}

double w_star(double a, double delta0, double u, double w0, double c_gen, double r, double m_new) {
  if (m_new == 0.0) throw Error(ErrorKind::FrontierDegenerate, "w* is undefined at zero new-valid mass");
  if (!(a > 0.0 && delta0 > 0.0 && u > 0.0 && w0 > 0.0 && c_gen > 0.0 && r > 0.0 && m_new > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "w* parameters must all be positive");
  }
  return std::pow(a * delta0 * u * std::pow(w0, a) * c_gen / (r * m_new), 1.0 / (a + 1.0));
}

AmplificationReport amplification(double n_ai, double n_h, double r, double r_eff, double rho_h, double m_new,
                                  double m_new_guided, double m_new_h) {
  const double guided_rate = n_ai * r_eff * m_new_guided;
  if (!(m_new > 0.0) || !(r > 0.0) || !(guided_rate > 0.0)) {
    throw Error(ErrorKind::DegenerateBaseline, "amplification needs positive m_new, r and guided AI rate");
  }
  AmplificationReport rep;
  rep.a_guide = m_new_guided / m_new;
  rep.a_verify = r_eff / r;
  rep.a_gen = 1.0 + n_h * rho_h * m_new_h / guided_rate;
  rep.a_h = rep.a_guide * rep.a_verify * rep.a_gen;
  return rep;
}

Effort effort_allocation(double m_new, double r, double m_low_threshold, double r_low_threshold) {
  if (r <= r_low_threshold) return Effort::Verification;
  if (m_new <= m_low_threshold) return Effort::Guidance;
  return Effort::Generation;
}

double sustainability_bound(double c0, double c_gen, double alpha, double tau, double t) {
  if (!(alpha > 1.0)) throw Error(ErrorKind::InvalidParameter, "sustainability bound requires alpha > 1");
  if (!(c0 > 0.0 && c_gen > 0.0 && tau > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "C0, c_gen and tau must be positive");
  }
  return std::pow(c0 / c_gen, 1.0 / alpha) * std::exp2(t / (alpha * tau));
}

Bound marginal_frontier(double m_max, double c_gen, double alpha) {
  if (!(m_max > 0.0 && c_gen > 0.0)) throw Error(ErrorKind::InvalidParameter, "m_max and c_gen must be positive");
  if (alpha < 1.0) throw Error(ErrorKind::InvalidParameter, "marginal frontier requires alpha >= 1");
  if (alpha == 1.0) return {std::numeric_limits<double>::infinity(), true};
  return {std::pow(m_max / c_gen, 1.0 / (alpha - 1.0)), false};
}

double transformer_gen_cost(double params, double output_len) { return 2.0 * params * output_len; }

ScalingFit fit_power_law(std::span<const Point> points) {
  if (points.size() < 3) throw Error(ErrorKind::Underdetermined, "power-law fit needs at least 3 points");
  CompensatedSum sx, sy;
  for (const auto& p : points) {
    if (!(p.x > 0.0 && p.y > 0.0)) throw Error(ErrorKind::InvalidParameter, "power-law fit needs positive points");
    sx.add(std::log(p.x));
    sy.add(std::log(p.y));
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  double x_min = points.front().x, x_max = points.front().x;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx;
    const double dy = std::log(p.y) - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
  }
  if (!(sxx.value() > 0.0)) throw Error(ErrorKind::Underdetermined, "power-law fit needs distinct abscissae");
  ScalingFit fit;
  fit.exponent = sxy.value() / sxx.value();
  fit.intercept = my - fit.exponent * mx;
  fit.r_squared = syy.value() > 0.0 ? std::clamp(sxy.value() * sxy.value() / (sxx.value() * syy.value()), 0.0, 1.0)
                                    : 1.0;
  fit.x_min = x_min;
  fit.x_max = x_max;
  return fit;
}

OccupancyResult occupancy_experiment(double alpha, std::span<const std::size_t> n_grid, std::size_t reps,
                                     std::uint64_t seed, const OccupancyOptions& options) {
  if (!(alpha > 1.0)) throw Error(ErrorKind::InvalidParameter, "occupancy experiment requires alpha > 1");
  if (reps == 0) throw Error(ErrorKind::InvalidParameter, "occupancy experiment needs at least one replicate");
  if (n_grid.empty()) throw Error(ErrorKind::InvalidParameter, "occupancy grid is empty");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() == 0) {
    throw Error(ErrorKind::InvalidParameter, "occupancy grid must be ascending and positive");
  }

  OccupancyResult result;
  const double guard = std::pow(static_cast<double>(options.n_valid), alpha) / 10.0;
  std::vector<std::size_t> grid;
  for (std::size_t n : n_grid) {
    if (static_cast<double>(n) <= guard) {
      grid.push_back(n);
    } else {
      result.warnings.push_back("dropped N=" + std::to_string(n) + " above the pre-saturation guard");
    }
  }
  if (grid.empty()) throw Error(ErrorKind::InvalidParameter, "every grid point violates the pre-saturation guard");

  const WeightedSampler sampler(zipf_probabilities(options.n_valid, alpha));
  // counts[rep][g] = distinct values among the first grid[g] draws. Prefixes
  // of one i.i.d. sequence are themselves i.i.d. samples of each size.
  std::vector<std::vector<double>> counts(reps, std::vector<double>(grid.size()));
  const std::size_t threads = options.threads ? options.threads : default_threads();
  parallel_for(reps, threads, [&](std::size_t rep) {
    Rng rng = Rng::stream(seed, rep);
    std::vector<std::uint8_t> seen(options.n_valid, 0);
    std::size_t drawn = 0;
    std::size_t distinct = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (; drawn < grid[g]; ++drawn) {
        const ArtifactId id = sampler.sample(rng);
        if (!seen[id]) {
          seen[id] = 1;
          ++distinct;
        }
      }
      counts[rep][g] = static_cast<double>(distinct);
    }
  });

  std::vector<Point> fit_points;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CompensatedSum s, s2;
    for (std::size_t rep = 0; rep < reps; ++rep) s.add(counts[rep][g]);
    const double mean = s.value() / static_cast<double>(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) s2.add((counts[rep][g] - mean) * (counts[rep][g] - mean));
    const double var = reps > 1 ? s2.value() / static_cast<double>(reps - 1) : 0.0;
    const Point p{static_cast<double>(grid[g]), mean};
    result.curve.push_back(p);
    result.std_error.push_back(std::sqrt(var / static_cast<double>(reps)));
    const bool above_min = options.fit_min_n <= 0.0 || p.x >= options.fit_min_n;
    const bool below_max = options.fit_max_n <= 0.0 || p.x <= options.fit_max_n;
    if (above_min && below_max) fit_points.push_back(p);
  }
  result.fit = fit_power_law(fit_points);
  return result;
}

namespace {
ScalingFit fit_window(const std::vector<Point>& pts, double lo, double hi) {
  std::vector<Point> window;
  for (const auto& p : pts) {
    if (p.x >= lo && p.x <= hi && p.y > 0.0) window.push_back(p);
  }
  return fit_power_law(window);
}

// (E_new, cost) at the moment g reaches d, interpolated linearly inside the
// batch that crossed d.
Point interpolate_at(const std::vector<IterationRecord>& recs, std::uint64_t d) {
  auto it = std::find_if(recs.begin(), recs.end(), [d](const IterationRecord& r) { return r.g >= d; });
  if (it == recs.begin()) return {it->e_new_total, it->cost_total};
  const auto& prev = *std::prev(it);
  const double span = static_cast<double>(it->g - prev.g);
  const double frac = span > 0.0 ? static_cast<double>(d - prev.g) / span : 1.0;
  return {prev.e_new_total + frac * (it->e_new_total - prev.e_new_total),
          prev.cost_total + frac * (it->cost_total - prev.cost_total)};
}

std::vector<Point> finite_difference(const std::vector<Point>& pts) {
  std::vector<Point> out;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dx = pts[i].x - pts[i - 1].x;
    if (dx <= 0.0) continue;
    out.push_back({std::sqrt(pts[i].x * pts[i - 1].x), (pts[i].y - pts[i - 1].y) / dx});
  }
  return out;
}
}  // namespace

CostCurve cumulative_cost_curve(std::span<const std::vector<IterationRecord>> replicates, double c_gen,
                                const CostFitWindow& window) {
  if (replicates.empty()) throw Error(ErrorKind::Underdetermined, "no replicates supplied");
  std::uint64_t d_max = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t d_min = 1;
  for (const auto& recs : replicates) {
    if (recs.empty()) throw Error(ErrorKind::Underdetermined, "empty record sequence");
    d_max = std::min(d_max, recs.back().g);
    // Below the first batch's yield every D maps to the same record.
    d_min = std::max(d_min, recs.front().g);
  }
  if (d_max < 2 || d_min >= d_max) throw Error(ErrorKind::Underdetermined, "too few discoveries for a cost curve");

  // Log-spaced integer D grid in [d_min, d_max].
  std::vector<std::uint64_t> grid;
  const std::size_t steps = std::max<std::size_t>(window.grid_points, 2);
  const double log_lo = std::log(static_cast<double>(d_min));
  const double log_hi = std::log(static_cast<double>(d_max));
  for (std::size_t i = 0; i < steps; ++i) {
    const double d = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
    const auto di = static_cast<std::uint64_t>(std::llround(d));
    if (grid.empty() || di > grid.back()) grid.push_back(di);
  }

  CostCurve curve;
  for (std::uint64_t d : grid) {
    CompensatedSum e, raw;
    for (const auto& recs : replicates) {
      const auto at = interpolate_at(recs, d);
      e.add(at.x);
      raw.add(at.y);
    }
    const double n = static_cast<double>(replicates.size());
    const double dd = static_cast<double>(d);
    curve.exposure.push_back({dd, e.value() / n});
    curve.cost.push_back({dd, c_gen * e.value() / n});
    curve.raw_cost.push_back({dd, raw.value() / n});
  }
  curve.marginal = finite_difference(curve.exposure);
  curve.raw_marginal = finite_difference(curve.raw_cost);

  const double hi = (1.0 - window.top_fraction_excluded) * static_cast<double>(d_max);
  curve.exposure_fit = fit_window(curve.exposure, window.min_d, hi);
  curve.raw_cost_fit = fit_window(curve.raw_cost, window.min_d, hi);
  curve.marginal_fit = fit_window(curve.marginal, window.min_d, hi);
  curve.raw_marginal_fit = fit_window(curve.raw_marginal, window.min_d, hi);
  return curve;
}

}  // namespace nova
