#include "nova/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "nova/error.hpp"
#include "nova/estimators.hpp"
#include "nova/numeric.hpp"
#include "nova/parallel.hpp"

namespace nova {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string_view records_csv_header() {
  return "replicate,t,m_new,a_mass,u_mass,delta_g,delta_b,delta_b_dedup,g,b,f_marg,gt_estimate,exact_batch_unseen,"
         "e_new_total,cost_total";
}

void write_records_csv(std::ostream& out, std::span<const RunResult> runs) {
  out << records_csv_header() << '\n';
  for (std::size_t rep = 0; rep < runs.size(); ++rep) {
    for (const auto& r : runs[rep].records) {
      out << rep << ',' << r.t << ',' << format_double(r.m_new) << ',' << format_double(r.a_mass) << ','
          << format_double(r.u_mass) << ',' << r.delta_g << ',' << r.delta_b << ',' << r.delta_b_dedup << ','
          << r.g << ',' << r.b << ',' << (r.f_marg ? format_double(*r.f_marg) : std::string()) << ','
          << format_double(r.gt_estimate) << ',' << format_double(r.exact_batch_unseen) << ','
          << format_double(r.e_new_total) << ',' << format_double(r.cost_total) << '\n';
    }
  }
}

std::vector<RunResult> run_replicates(const SimulationConfig& config, const KnowledgeSpace& space, std::uint64_t seed,
                                      std::size_t reps, std::size_t threads) {
  std::vector<RunResult> runs(reps);
  parallel_for(reps, threads == 0 ? default_threads() : threads,
               [&](std::size_t i) { runs[i] = run_experiment(config, space, seed, i); });
  return runs;
}

ReplicateStats replicate_stats(const RunResult& run, const SimulationConfig& config, const GeneratorDistribution& q0) {
  ReplicateStats s;
  s.iterations = run.records.size();
  s.final_discovered = run.final_state.discovered.size();
  s.b_dedup = run.final_state.b_dedup.size();
  s.coverage_t = run.coverage_t;
  if (!run.records.empty()) {
    s.g = run.records.back().g;
    s.b = run.records.back().b;
    s.e_new_total = run.records.back().e_new_total;
    s.cost_total = run.records.back().cost_total;
  }
  for (const auto& r : run.records) {
    s.sum_delta_g += r.delta_g;
    s.sum_delta_g_human += r.delta_g_human;
  }
  for (ArtifactId id : run.final_state.discovered.to_vector()) {
    if (!q0.in_support(id)) ++s.out_of_support_discovered;
    if (config.verifier.rate(id) == 0.0) ++s.hard_set_discovered;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Contamination at matched masses

ContaminationBench::ContaminationBench(const ContaminationConfig& c)
    : config(c),
      space(build_zipf_space(c.n_valid, c.n_invalid, c.alpha)),
      q(GeneratorDistribution::from_space(space, GeneratorInit{c.u, 1.0, InvalidShape::Zipf})) {}

RetainedState ContaminationBench::matched_state(double m_target) const {
  RetainedState start = RetainedState::empty(space);
  CompensatedSum valid_left;
  for (std::size_t i = 0; i < space.n_valid(); ++i) valid_left.add(q.sampler().weight(static_cast<ArtifactId>(i)));
  double left = valid_left.value();
  const double total = q.total();
  for (std::size_t i = 0; i < space.n_valid() && left / total > m_target; ++i) {
    start.discovered.insert(static_cast<ArtifactId>(i));
    left -= q.sampler().weight(static_cast<ArtifactId>(i));
  }
  if (start.discovered.size() == space.n_valid()) {
    throw Error(ErrorKind::InvalidParameter, "m_new target unreachable in the contamination space");
  }
  tracked_mass_decomposition(q, start, space);
  return start;
}

ContaminationCell contamination_cell(const ContaminationConfig& config, double m_target, double delta,
                                     std::size_t reps, std::uint64_t seed, std::size_t threads) {
  return contamination_cell(ContaminationBench(config), m_target, delta, reps, seed, threads);
}

ContaminationCell contamination_cell(const ContaminationBench& bench, double m_target, double delta,
                                     std::size_t reps, std::uint64_t seed, std::size_t threads) {
  if (reps == 0) throw Error(ErrorKind::InvalidParameter, "contamination cell needs at least one replicate");
  const auto& config = bench.config;
  const auto& space = bench.space;
  const auto& q = bench.q;
  VerifierSpec verifier;
  verifier.r_default = config.r;
  verifier.delta = delta;
  const RetainedState start = bench.matched_state(m_target);
  const auto md0 = mass_decomposition(q, start, space);

  std::vector<double> realized(reps), predicted(reps);
  parallel_for(reps, threads == 0 ? default_threads() : threads, [&](std::size_t rep) {
    Rng rng = Rng::stream(seed, rep);
    RetainedState state = start;
    std::uint64_t sum_g = 0, sum_b = 0;
    double expected_b = 0.0, expected_total = 0.0;
    for (std::size_t t = 0; t < config.window; ++t) {
      const auto rec = run_iteration(state, q, verifier, space, config.n, rng);
      sum_g += rec.delta_g;
      sum_b += rec.delta_b;
      const double n = static_cast<double>(config.n);
      expected_b += n * delta * rec.u_mass;
      expected_total += n * config.r * rec.m_new + n * delta * rec.u_mass;
    }
    realized[rep] = sum_g + sum_b > 0 ? static_cast<double>(sum_b) / static_cast<double>(sum_g + sum_b) : 0.0;
    predicted[rep] = expected_total > 0.0 ? expected_b / expected_total : 0.0;
  });

  ContaminationCell cell;
  cell.m_target = m_target;
  cell.m_actual = md0.m_new;
  cell.delta = delta;
  cell.formula = f_marg_sparse(delta, md0.u_mass, config.r, md0.m_new);
  cell.replicates = reps;
  CompensatedSum sr, sp;
  for (std::size_t i = 0; i < reps; ++i) {
    sr.add(realized[i]);
    sp.add(predicted[i]);
  }
  cell.realized_mean = sr.value() / static_cast<double>(reps);
  cell.predicted_mean = sp.value() / static_cast<double>(reps);
  if (reps > 1) {
    CompensatedSum ss;
    for (double x : realized) ss.add((x - cell.realized_mean) * (x - cell.realized_mean));
    cell.realized_sd = std::sqrt(ss.value() / static_cast<double>(reps - 1));
    cell.realized_se = cell.realized_sd / std::sqrt(static_cast<double>(reps));
  }
  return cell;
}

std::vector<ArtifactId> read_batch_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open batch file " + path.string());
  std::vector<ArtifactId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    std::uint64_t value = 0;
    bool ok = !token.empty();
    for (char c : token) {
      if (c < '0' || c > '9') {
        ok = false;
        break;
      }
      value = value * 10 + static_cast<std::uint64_t>(c - '0');
      if (value > std::numeric_limits<ArtifactId>::max()) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      throw Error(ErrorKind::Io,
                  path.string() + ":" + std::to_string(line_no) + ": expected a decimal artifact id, got `" + token + "`");
    }
    ids.push_back(static_cast<ArtifactId>(value));
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

json fit_json(const ScalingFit& f) {
  return {{"exponent", f.exponent}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
          {"x_min", f.x_min},       {"x_max", f.x_max}};
}

json conditions_json(const SimulationConfig& sim) {
  const auto c = check_conditions(sim);
  return {{"c1_monotone_accumulation", std::string(to_string(c.c1))},
          {"c2_persistent_exposure", std::string(to_string(c.c2))},
          {"c3_positive_acceptance", std::string(to_string(c.c3))},
          {"c4_no_false_positives", std::string(to_string(c.c4))}};
}

class Output {
 public:
  explicit Output(const fs::path& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw Error(ErrorKind::Io, "cannot create output directory " + dir_.string());
  }

  // Writes atomically enough for our purposes: whole string, then close.
  void write(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
    out << content;
    out.close();
    if (!out) throw Error(ErrorKind::Io, "failed writing " + p.string());
  }

 private:
  fs::path dir_;
};

std::size_t thread_count(const ExperimentConfig& cfg) { return cfg.threads == 0 ? default_threads() : cfg.threads; }

// Q_0-weighted mean per-candidate verification cost.
double mean_verification_cost(const KnowledgeSpace& space, const GeneratorDistribution& q, const VerifierSpec& v) {
  CompensatedSum s;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double p = q.prob(static_cast<ArtifactId>(i));
    if (p > 0.0) s.add(p * verification_cost(space.length(static_cast<ArtifactId>(i)), v));
  }
  return s.value() + v.w.value_or(0.0);
}

json replicate_json(std::size_t rep, const ReplicateStats& s) {
  json j = {{"replicate", rep},
            {"iterations", s.iterations},
            {"g", s.g},
            {"final_discovered", s.final_discovered},
            {"b", s.b},
            {"b_dedup", s.b_dedup},
            {"sum_delta_g", s.sum_delta_g},
            {"sum_delta_g_human", s.sum_delta_g_human},
            {"hard_set_discovered", s.hard_set_discovered},
            {"out_of_support_discovered", s.out_of_support_discovered},
            {"e_new_total", s.e_new_total},
            {"cost_total", s.cost_total}};
  j["coverage_t"] = s.coverage_t ? json(*s.coverage_t) : json(nullptr);
  return j;
}

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : compensated_sum(xs) / static_cast<double>(xs.size());
}

double se_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  CompensatedSum ss;
  for (double x : xs) ss.add((x - m) * (x - m));
  return std::sqrt(ss.value() / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

void run_simulation(const ExperimentConfig& cfg, const Output& out, json& summary) {
  SimulationConfig sim = cfg.sim;
  const KnowledgeSpace space = build_space(sim.space);
  if (cfg.costs.budget > 0.0) {
    const auto q0 = GeneratorDistribution::from_space(space, sim.q0);
    sim.n = feasible_batch(cfg.costs.budget, sim.costs.c_gen, mean_verification_cost(space, q0, sim.verifier));
    if (sim.n == 0) throw Error(ErrorKind::InvalidParameter, "budget does not cover a single candidate");
    summary["batch_from_budget"] = sim.n;
  }

  const auto runs = run_replicates(sim, space, cfg.seed, cfg.replicates, thread_count(cfg));
  const auto q0 = GeneratorDistribution::from_space(space, sim.q0);
  std::ostringstream csv;
  write_records_csv(csv, runs);
  out.write("records.csv", csv.str());

  json reps = json::array();
  std::size_t covered = 0, sustained = 0, with_b = 0, rows = 0;
  std::uint64_t hard_found = 0, outside_found = 0;
  std::vector<double> coverage_times, delta_g_first;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto s = replicate_stats(runs[i], sim, q0);
    reps.push_back(replicate_json(i, s));
    rows += runs[i].records.size();
    if (s.coverage_t) {
      ++covered;
      coverage_times.push_back(static_cast<double>(*s.coverage_t));
    }
    if (s.final_discovered == space.n_valid()) ++sustained;
    if (s.b > 0) ++with_b;
    hard_found += s.hard_set_discovered;
    outside_found += s.out_of_support_discovered;
    delta_g_first.push_back(static_cast<double>(s.sum_delta_g));
  }
  const double r = static_cast<double>(runs.size());
  summary["rows"] = rows;
  summary["coverage_fraction"] = static_cast<double>(covered) / r;
  summary["sustained_coverage_fraction"] = static_cast<double>(sustained) / r;
  summary["contaminated_fraction"] = static_cast<double>(with_b) / r;
  summary["hard_set_discovered_total"] = hard_found;
  summary["out_of_support_discovered_total"] = outside_found;
  summary["mean_coverage_t"] = coverage_times.empty() ? json(nullptr) : json(mean_of(coverage_times));
  summary["mean_sum_delta_g"] = mean_of(delta_g_first);
  summary["per_replicate"] = reps;
  summary["conditions"] = conditions_json(sim);

  if (sim.human) {
    // Autonomous twin: same seed, same generator, no expert.
    SimulationConfig twin = sim;
    twin.human.reset();
    const auto twin_runs = run_replicates(twin, space, cfg.seed, cfg.replicates, thread_count(cfg));
    std::vector<double> twin_g;
    std::uint64_t twin_outside = 0;
    for (const auto& run : twin_runs) {
      const auto s = replicate_stats(run, twin, q0);
      twin_g.push_back(static_cast<double>(s.sum_delta_g));
      twin_outside += s.out_of_support_discovered;
    }
    const auto expert = make_expert(*sim.human, space);
    const auto guided = guided_distribution(q0, expert);
    const auto empty = RetainedState::empty(space);
    const double m = mass_decomposition(q0, empty, space).m_new;
    const double m_guided = mass_decomposition(guided, empty, space).m_new;
    double m_h = 0.0;
    for (std::size_t i = 0; i < space.n_valid(); ++i) m_h += expert.proposal_probs[i];
    const auto amp = amplification(static_cast<double>(sim.n), static_cast<double>(expert.n_h),
                                   sim.verifier.r_default, expert.r_eff, expert.rho_h, m, m_guided, m_h);
    const double aug_mean = mean_of(delta_g_first), twin_mean = mean_of(twin_g);
    const double ratio = twin_mean > 0.0 ? aug_mean / twin_mean : std::numeric_limits<double>::quiet_NaN();
    // Delta-method standard error of the ratio of independent means.
    const double ratio_se = twin_mean > 0.0 ? ratio * std::sqrt(std::pow(se_of(delta_g_first) / aug_mean, 2) +
                                                                std::pow(se_of(twin_g) / twin_mean, 2))
                                            : 0.0;
    summary["amplification"] = {{"a_guide", amp.a_guide},
                                {"a_verify", amp.a_verify},
                                {"a_gen", amp.a_gen},
                                {"a_h", amp.a_h},
                                {"augmented_mean_delta_g", aug_mean},
                                {"autonomous_mean_delta_g", twin_mean},
                                {"simulated_ratio", ratio},
                                {"simulated_ratio_se", ratio_se},
                                {"autonomous_out_of_support_discovered_total", twin_outside}};
  }

  if (cfg.experiment == ExperimentKind::CumCost) {
    std::vector<std::vector<IterationRecord>> records;
    records.reserve(runs.size());
    for (const auto& run : runs) records.push_back(run.records);
    const auto curve = cumulative_cost_curve(records, sim.costs.c_gen,
                                             CostFitWindow{cfg.fit_window.min_d, cfg.fit_window.top_fraction, 24});
    std::ostringstream cc;
    cc << "series,d,value\n";
    const auto emit = [&](const char* name, const std::vector<Point>& pts) {
      for (const auto& p : pts) cc << name << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
    };
    emit("exposure", curve.exposure);
    emit("cost", curve.cost);
    emit("raw_cost", curve.raw_cost);
    emit("marginal", curve.marginal);
    emit("raw_marginal", curve.raw_marginal);
    out.write("cost_curve.csv", cc.str());
    summary["fits"] = {{"exposure", fit_json(curve.exposure_fit)},
                       {"marginal", fit_json(curve.marginal_fit)},
                       {"raw_cost", fit_json(curve.raw_cost_fit)},
                       {"raw_marginal", fit_json(curve.raw_marginal_fit)}};
  }
}

void run_contamination(const ExperimentConfig& cfg, const Output& out, json& summary) {
  const auto& c = cfg.contamination;
  std::ostringstream curves;
  curves << "m_new,delta,f_marg,delta_star,regime\n";
  for (double m : c.m_new_grid) {
    const auto ds = delta_star(c.r, m, c.u, cfg.thresholds.f_critical);
    for (double d : c.delta_grid) {
      curves << format_double(m) << ',' << format_double(d) << ',' << format_double(f_marg_sparse(d, c.u, c.r, m))
             << ',' << format_double(ds.value) << ','
             << to_string(classify_regime(d, ds.value, m, cfg.thresholds.m_low)) << '\n';
    }
  }
  out.write("contamination_curves.csv", curves.str());

  std::ostringstream sim;
  sim << "kind,m_target,m_actual,delta,replicates,formula,predicted_mean,realized_mean,realized_se,realized_sd\n";
  json cells = json::array();
  std::uint64_t cell_index = 0;
  const ContaminationBench bench(c);
  const auto emit = [&](const char* kind, const ContaminationCell& cell) {
    sim << kind << ',' << format_double(cell.m_target) << ',' << format_double(cell.m_actual) << ','
        << format_double(cell.delta) << ',' << cell.replicates << ',' << format_double(cell.formula) << ','
        << format_double(cell.predicted_mean) << ',' << format_double(cell.realized_mean) << ','
        << format_double(cell.realized_se) << ',' << format_double(cell.realized_sd) << '\n';
    cells.push_back({{"kind", kind},
                     {"m_target", cell.m_target},
                     {"m_actual", cell.m_actual},
                     {"delta", cell.delta},
                     {"formula", cell.formula},
                     {"predicted_mean", cell.predicted_mean},
                     {"realized_mean", cell.realized_mean},
                     {"realized_se", cell.realized_se},
                     {"realized_sd", cell.realized_sd}});
  };
  const auto cell_seed = [&] { return Rng::stream(cfg.seed, cell_index++)(); };
  for (double m : c.m_new_grid) {
    for (double d : c.delta_grid) {
      emit("grid", contamination_cell(bench, m, d, cfg.replicates, cell_seed(), thread_count(cfg)));
    }
    // Probe at the critical rate for the realized starting mass.
    const double m_actual = mass_decomposition(bench.q, bench.matched_state(m), bench.space).m_new;
    const auto ds = delta_star(c.r, m_actual, c.u, cfg.thresholds.f_critical);
    if (!ds.unbounded && ds.value <= 1.0) {
      emit("delta_star", contamination_cell(bench, m, ds.value, cfg.replicates, cell_seed(), thread_count(cfg)));
    }
  }
  out.write("contamination_sim.csv", sim.str());
  summary["cells"] = cells;
}

void run_scaling(const ExperimentConfig& cfg, const Output& out, json& summary) {
  std::ostringstream csv;
  csv << "alpha,n,mean_distinct,std_error\n";
  json fits = json::array();
  for (double alpha : cfg.scaling.alphas) {
    OccupancyOptions opts;
    opts.n_valid = cfg.scaling.n_valid;
    opts.threads = thread_count(cfg);
    opts.fit_min_n = cfg.fit_window.min_n;
    opts.fit_max_n = cfg.fit_window.max_n;
    const auto res = occupancy_experiment(alpha, cfg.scaling.n_grid, cfg.replicates, cfg.seed, opts);
    for (std::size_t i = 0; i < res.curve.size(); ++i) {
      csv << format_double(alpha) << ',' << format_double(res.curve[i].x) << ',' << format_double(res.curve[i].y)
          << ',' << format_double(res.std_error[i]) << '\n';
    }
    json f = fit_json(res.fit);
    f["alpha"] = alpha;
    f["predicted_exponent"] = 1.0 / alpha;
    f["warnings"] = res.warnings;
    fits.push_back(f);
  }
  out.write("occupancy.csv", csv.str());
  summary["fits"] = fits;
}

void run_sustainability(const ExperimentConfig& cfg, const Output& out, json& summary) {
  const auto& s = cfg.sustainability;
  const double c_gen = cfg.sim.costs.c_gen;
  std::ostringstream csv;
  csv << "alpha,t,sustainable_d,marginal_frontier,frontier_unbounded\n";
  json rows = json::array();
  for (double alpha : s.alphas) {
    const auto frontier = marginal_frontier(s.m_max, c_gen, alpha);
    for (double t : s.t_grid) {
      const double d = sustainability_bound(s.c0, c_gen, alpha, s.tau, t);
      csv << format_double(alpha) << ',' << format_double(t) << ',' << format_double(d) << ','
          << format_double(frontier.value) << ',' << (frontier.unbounded ? "true" : "false") << '\n';
    }
    rows.push_back({{"alpha", alpha},
                    {"marginal_frontier", frontier.value},
                    {"doubling_time", alpha * s.tau},
                    {"d_at_t0", sustainability_bound(s.c0, c_gen, alpha, s.tau, 0.0)}});
  }
  out.write("sustainability.csv", csv.str());
  summary["table"] = rows;
}

void run_estimate(const ExperimentConfig& cfg, const Output& out, std::ostream& stream, json& summary) {
  const auto batch = read_batch_file(cfg.estimate.batch_file);
  const auto profile = frequency_profile(batch);
  json record;
  record["n"] = profile.n;
  record["distinct"] = profile.distinct();
  json prof = json::object();
  for (const auto& [r, count] : profile.f) prof[std::to_string(r)] = count;
  record["profile"] = prof;
  record["good_turing"] = batch.empty() ? json(nullptr) : json(good_turing(profile));
  json gt = json::array();
  for (double s : cfg.estimate.s_values) {
    const auto e = good_toulmin(profile, s);
    gt.push_back({{"s", s}, {"value", e.value}, {"unstable", e.unstable}});
  }
  record["good_toulmin"] = gt;
  if (cfg.has_space) {
    const KnowledgeSpace space = build_space(cfg.sim.space);
    IdSet discovered(space.n_total());
    for (ArtifactId id : cfg.estimate.discovered) discovered.insert(id);
    for (ArtifactId id : batch) {
      if (id >= space.n_total()) {
        throw Error(ErrorKind::InvalidParameter, "batch id " + std::to_string(id) + " outside the ambient space");
      }
    }
    record["mc_new_valid_mass"] = batch.empty() ? json(nullptr) : json(mc_new_valid_mass(batch, space, discovered));
  }
  out.write("estimate.json", record.dump(2) + "\n");
  stream << record.dump() << '\n';
  summary["estimate"] = record;
}

}  // namespace

int run_command(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    const Output output(config.output.path);
    json summary;
    summary["config"] = json::parse(to_json_string(config));
    switch (config.experiment) {
      case ExperimentKind::Run:
      case ExperimentKind::Coverage:
      case ExperimentKind::CumCost:
        run_simulation(config, output, summary);
        break;
      case ExperimentKind::Contamination:
        run_contamination(config, output, summary);
        break;
      case ExperimentKind::Scaling:
        run_scaling(config, output, summary);
        break;
      case ExperimentKind::Sustainability:
        run_sustainability(config, output, summary);
        break;
      case ExperimentKind::Estimate:
        run_estimate(config, output, out, summary);
        break;
    }
    summary["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    output.write("summary.json", summary.dump(2) + "\n");
    return 0;
  } catch (const Error& e) {
    err << "nova-sim: " << e.what() << '\n';
    return e.kind() == ErrorKind::Config ? 2 : 3;
  } catch (const std::exception& e) {
    err << "nova-sim: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace nova
