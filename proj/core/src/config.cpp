#include "nova/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"
#include "nova/error.hpp"

namespace nova {

using json = nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kExperimentNames{{
    {ExperimentKind::Run, "run"},
    {ExperimentKind::Coverage, "coverage"},
    {ExperimentKind::Contamination, "contamination"},
    {ExperimentKind::Scaling, "scaling"},
    {ExperimentKind::CumCost, "cumcost"},
    {ExperimentKind::Sustainability, "sustainability"},
    {ExperimentKind::Estimate, "estimate"},
}};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::Config, "`" + path + "`: " + message);
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) fail(path, message);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

/// Strict view over one JSON object: every key must be in `allowed`.
class Section {
 public:
  Section(const json& node, std::string path, std::initializer_list<std::string_view> allowed)
      : node_(node), path_(std::move(path)) {
    require(node_.is_object(), path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, value] : node_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      std::string message = "unknown key";
      std::string_view best;
      std::size_t best_distance = std::numeric_limits<std::size_t>::max();
      for (auto candidate : allowed) {
        const auto d = edit_distance(key, candidate);
        if (d < best_distance) {
          best_distance = d;
          best = candidate;
        }
      }
      if (best_distance <= 3) message += "; did you mean `" + join(path_, best) + "`?";
      fail(join(path_, key), message);
    }
  }

  bool has(std::string_view key) const { return node_.contains(std::string(key)); }
  std::string path(std::string_view key) const { return join(path_, key); }
  const json& at(std::string_view key) const { return node_.at(std::string(key)); }

  void read(std::string_view key, double& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    require(v.is_number(), path(key), "expected a number");
    out = v.get<double>();
    require(std::isfinite(out), path(key), "must be finite");
  }

  template <typename T>
    requires std::is_unsigned_v<T>
  void read(std::string_view key, T& out) const {
    if (!has(key)) return;
    const auto v = read_unsigned(key);
    require(v <= std::numeric_limits<T>::max(), path(key), "out of range");
    out = static_cast<T>(v);
  }

  void read(std::string_view key, bool& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    require(v.is_boolean(), path(key), "expected a boolean");
    out = v.get<bool>();
  }

  void read(std::string_view key, std::string& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    require(v.is_string(), path(key), "expected a string");
    out = v.get<std::string>();
  }

  void read(std::string_view key, std::optional<double>& out) const {
    if (!has(key)) return;
    if (at(key).is_null()) {
      out.reset();
      return;
    }
    double v = 0.0;
    read(key, v);
    out = v;
  }

  void read(std::string_view key, std::vector<double>& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    require(v.is_array(), path(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto item_path = path(key) + "[" + std::to_string(i) + "]";
      require(v[i].is_number(), item_path, "expected a number");
      out.push_back(v[i].get<double>());
    }
  }

  void read(std::string_view key, std::vector<std::size_t>& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    require(v.is_array(), path(key), "expected an array of non-negative integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(static_cast<std::size_t>(unsigned_value(v[i], path(key) + "[" + std::to_string(i) + "]")));
    }
  }

  void read(std::string_view key, std::vector<ArtifactId>& out) const {
    std::vector<std::size_t> wide;
    read(key, wide);
    if (!has(key)) return;
    out.clear();
    for (auto x : wide) {
      require(x <= std::numeric_limits<ArtifactId>::max(), path(key), "id out of range");
      out.push_back(static_cast<ArtifactId>(x));
    }
  }

  /// Array of {"id": int, <value_key>: number} objects.
  void read_id_map(std::string_view key, std::string_view value_key, std::map<ArtifactId, double>& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    require(v.is_array(), path(key), "expected an array of objects");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto item_path = path(key) + "[" + std::to_string(i) + "]";
      Section item(v[i], item_path, {"id", value_key});
      require(item.has("id") && item.has(value_key), item_path,
              "needs both `id` and `" + std::string(value_key) + "`");
      std::size_t id = 0;
      double value = 0.0;
      item.read("id", id);
      item.read(value_key, value);
      require(id <= std::numeric_limits<ArtifactId>::max(), item.path("id"), "id out of range");
      out[static_cast<ArtifactId>(id)] = value;
    }
  }

 private:
  std::uint64_t read_unsigned(std::string_view key) const { return unsigned_value(at(key), path(key)); }

  static std::uint64_t unsigned_value(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      require(v.get<std::int64_t>() >= 0, path, "must be non-negative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      require(d >= 0.0 && d == std::floor(d) && d < 1.8e19, path, "expected a non-negative integer");
      return static_cast<std::uint64_t>(d);
    }
    fail(path, "expected a non-negative integer");
  }

  const json& node_;
  std::string path_;
};

void apply_policy(const Section& root, ExperimentConfig& cfg) {
  if (!root.has("policy")) return;
  Section s(root.at("policy"), "policy", {"kind", "w_min", "w_max", "gamma", "p_drop", "epsilon"});
  std::string kind(policy_name(cfg.sim.policy));
  s.read("kind", kind);
  if (kind == "static") {
    cfg.sim.policy = policy::Static{};
  } else if (kind == "tail_reweight") {
    policy::TailReweight p;
    if (auto* cur = std::get_if<policy::TailReweight>(&cfg.sim.policy)) p = *cur;
    s.read("w_min", p.w_min);
    s.read("w_max", p.w_max);
    require(p.w_min > 0.0, "policy.w_min", "must be > 0");
    require(p.w_max >= p.w_min, "policy.w_max", "must be >= w_min");
    cfg.sim.policy = p;
  } else if (kind == "reinforce") {
    policy::Reinforce p;
    if (auto* cur = std::get_if<policy::Reinforce>(&cfg.sim.policy)) p = *cur;
    s.read("gamma", p.gamma);
    require(p.gamma >= 1.0, "policy.gamma", "must be >= 1");
    cfg.sim.policy = p;
  } else if (kind == "forgetful") {
    policy::Forgetful p;
    if (auto* cur = std::get_if<policy::Forgetful>(&cfg.sim.policy)) p = *cur;
    s.read("p_drop", p.p_drop);
    require(p.p_drop >= 0.0 && p.p_drop <= 1.0, "policy.p_drop", "must lie in [0,1]");
    cfg.sim.policy = p;
  } else if (kind == "support_prune") {
    policy::SupportPrune p;
    if (auto* cur = std::get_if<policy::SupportPrune>(&cfg.sim.policy)) p = *cur;
    s.read("epsilon", p.epsilon);
    require(p.epsilon >= 0.0 && p.epsilon < 1.0, "policy.epsilon", "must lie in [0,1)");
    cfg.sim.policy = p;
  } else {
    fail("policy.kind", "unknown policy `" + kind +
                            "` (expected static, tail_reweight, reinforce, forgetful or support_prune)");
  }
  // Parameters belonging to a different kind are a config mistake.
  const std::map<std::string, std::vector<std::string>> owned{
      {"static", {}}, {"tail_reweight", {"w_min", "w_max"}}, {"reinforce", {"gamma"}},
      {"forgetful", {"p_drop"}}, {"support_prune", {"epsilon"}}};
  for (const char* key : {"w_min", "w_max", "gamma", "p_drop", "epsilon"}) {
    const auto& mine = owned.at(kind);
    if (s.has(key) && std::find(mine.begin(), mine.end(), key) == mine.end()) {
      fail(s.path(key), "not a parameter of policy `" + kind + "`");
    }
  }
}

void apply(const json& doc, ExperimentConfig& cfg) {
  Section root(doc, "",
               {"seed", "replicates", "threads", "n", "t_max", "stop_at_coverage", "experiment", "preset", "space",
                "q0", "policy", "verifier", "human", "costs", "fit_window", "thresholds", "contamination", "scaling",
                "sustainability", "estimate", "output"});
  root.read("seed", cfg.seed);
  root.read("replicates", cfg.replicates);
  root.read("threads", cfg.threads);
  root.read("n", cfg.sim.n);
  root.read("t_max", cfg.sim.t_max);
  root.read("stop_at_coverage", cfg.sim.stop_at_coverage);
  root.read("preset", cfg.preset);
  if (root.has("experiment")) {
    std::string name;
    root.read("experiment", name);
    const auto kind = parse_experiment_kind(name);
    if (!kind) fail("experiment", "unknown experiment `" + name + "`");
    cfg.experiment = *kind;
  }

  if (root.has("space")) {
    Section s(root.at("space"), "space", {"n_valid", "n_invalid", "alpha"});
    s.read("n_valid", cfg.sim.space.n_valid);
    s.read("n_invalid", cfg.sim.space.n_invalid);
    s.read("alpha", cfg.sim.space.alpha);
    require(cfg.sim.space.n_valid >= 1, "space.n_valid", "must be >= 1");
    require(cfg.sim.space.alpha > 0.0, "space.alpha", "must be > 0");
    cfg.has_space = true;
  }

  if (root.has("q0")) {
    Section s(root.at("q0"), "q0", {"u0", "s0", "invalid_shape"});
    s.read("u0", cfg.sim.q0.u0);
    s.read("s0", cfg.sim.q0.s0);
    require(cfg.sim.q0.u0 >= 0.0 && cfg.sim.q0.u0 < 1.0, "q0.u0", "must lie in [0,1)");
    require(cfg.sim.q0.s0 > 0.0 && cfg.sim.q0.s0 <= 1.0, "q0.s0", "must lie in (0,1]");
    if (s.has("invalid_shape")) {
      std::string shape;
      s.read("invalid_shape", shape);
      if (shape == "zipf") {
        cfg.sim.q0.invalid_shape = InvalidShape::Zipf;
      } else if (shape == "uniform") {
        cfg.sim.q0.invalid_shape = InvalidShape::Uniform;
      } else {
        fail("q0.invalid_shape", "expected `zipf` or `uniform`");
      }
    }
  }

  apply_policy(root, cfg);

  if (root.has("verifier")) {
    Section s(root.at("verifier"), "verifier", {"r", "hard_set", "delta", "tau0", "beta", "delta0", "w0", "a", "w"});
    auto& v = cfg.sim.verifier;
    s.read("r", v.r_default);
    s.read_id_map("hard_set", "r", v.hard_set);
    s.read("delta", v.delta);
    s.read("tau0", v.tau0);
    s.read("beta", v.beta);
    s.read("delta0", v.delta0);
    s.read("w0", v.w0);
    s.read("a", v.a);
    s.read("w", v.w);
    require(v.r_default >= 0.0 && v.r_default <= 1.0, "verifier.r", "must lie in [0,1]");
    for (const auto& [id, r] : v.hard_set) {
      require(r >= 0.0 && r <= 1.0, "verifier.hard_set", "rate for id " + std::to_string(id) + " must lie in [0,1]");
    }
    require(v.delta >= 0.0 && v.delta <= 1.0, "verifier.delta", "must lie in [0,1]");
    require(v.tau0 >= 0.0, "verifier.tau0", "must be >= 0");
    require(v.beta >= 1.0, "verifier.beta", "must be >= 1");
    require(v.delta0 >= 0.0 && v.delta0 <= 1.0, "verifier.delta0", "must lie in [0,1]");
    require(v.w0 > 0.0, "verifier.w0", "must be > 0");
    require(v.a > 0.0, "verifier.a", "must be > 0");
    require(!v.w || *v.w > 0.0, "verifier.w", "must be > 0");
  }

  if (root.has("human")) {
    if (root.at("human").is_null()) {
      cfg.sim.human.reset();
    } else {
      Section s(root.at("human"), "human",
                {"proposal", "n_h", "rho_h", "r_eff", "boost_valid", "boost", "additions"});
      HumanConfig h = cfg.sim.human.value_or(HumanConfig{});
      if (s.has("proposal")) {
        std::string proposal;
        s.read("proposal", proposal);
        if (proposal == "ideal") {
          h.proposal = HumanConfig::Proposal::Ideal;
        } else if (proposal == "uniform_valid") {
          h.proposal = HumanConfig::Proposal::UniformValid;
        } else {
          fail("human.proposal", "expected `ideal` or `uniform_valid`");
        }
      }
      s.read("n_h", h.n_h);
      s.read("rho_h", h.rho_h);
      s.read("r_eff", h.r_eff);
      s.read("boost_valid", h.boost_valid);
      s.read_id_map("boost", "factor", h.boost);
      s.read_id_map("additions", "mass", h.additions);
      require(h.rho_h >= 0.0 && h.rho_h <= 1.0, "human.rho_h", "must lie in [0,1]");
      require(h.r_eff >= 0.0 && h.r_eff <= 1.0, "human.r_eff", "must lie in [0,1]");
      require(h.boost_valid > 0.0, "human.boost_valid", "must be > 0");
      for (const auto& [id, f] : h.boost) require(f > 0.0, "human.boost", "factors must be > 0");
      double added = 0.0;
      for (const auto& [id, m] : h.additions) {
        require(m > 0.0, "human.additions", "masses must be > 0");
        added += m;
      }
      require(added < 1.0, "human.additions", "masses must total less than 1");
      cfg.sim.human = h;
    }
  }

  if (root.has("costs")) {
    Section s(root.at("costs"), "costs", {"c_gen", "budget"});
    s.read("c_gen", cfg.sim.costs.c_gen);
    s.read("budget", cfg.costs.budget);
    require(cfg.sim.costs.c_gen >= 0.0, "costs.c_gen", "must be >= 0");
    require(cfg.costs.budget >= 0.0, "costs.budget", "must be >= 0");
  }

  if (root.has("fit_window")) {
    Section s(root.at("fit_window"), "fit_window", {"min_n", "max_n", "min_d", "top_fraction"});
    s.read("min_n", cfg.fit_window.min_n);
    s.read("max_n", cfg.fit_window.max_n);
    s.read("min_d", cfg.fit_window.min_d);
    s.read("top_fraction", cfg.fit_window.top_fraction);
    require(cfg.fit_window.top_fraction >= 0.0 && cfg.fit_window.top_fraction < 1.0, "fit_window.top_fraction",
            "must lie in [0,1)");
  }

  if (root.has("thresholds")) {
    Section s(root.at("thresholds"), "thresholds", {"m_low", "r_low", "f_critical"});
    s.read("m_low", cfg.thresholds.m_low);
    s.read("r_low", cfg.thresholds.r_low);
    s.read("f_critical", cfg.thresholds.f_critical);
    require(cfg.thresholds.m_low > 0.0 && cfg.thresholds.m_low < 1.0, "thresholds.m_low", "must lie in (0,1)");
    require(cfg.thresholds.r_low > 0.0 && cfg.thresholds.r_low < 1.0, "thresholds.r_low", "must lie in (0,1)");
    require(cfg.thresholds.f_critical > 0.0 && cfg.thresholds.f_critical < 1.0, "thresholds.f_critical",
            "must lie in (0,1)");
  }

  if (root.has("contamination")) {
    Section s(root.at("contamination"), "contamination",
              {"m_new_grid", "delta_grid", "u", "r", "window", "n", "n_valid", "n_invalid", "alpha"});
    auto& c = cfg.contamination;
    s.read("m_new_grid", c.m_new_grid);
    s.read("delta_grid", c.delta_grid);
    s.read("u", c.u);
    s.read("r", c.r);
    s.read("window", c.window);
    s.read("n", c.n);
    s.read("n_valid", c.n_valid);
    s.read("n_invalid", c.n_invalid);
    s.read("alpha", c.alpha);
    for (double m : c.m_new_grid) require(m > 0.0 && m < 1.0, "contamination.m_new_grid", "entries must lie in (0,1)");
    for (double d : c.delta_grid) require(d >= 0.0 && d <= 1.0, "contamination.delta_grid", "entries must lie in [0,1]");
    require(c.u > 0.0 && c.u < 1.0, "contamination.u", "must lie in (0,1)");
    require(c.r > 0.0 && c.r <= 1.0, "contamination.r", "must lie in (0,1]");
    require(c.window >= 1, "contamination.window", "must be >= 1");
    require(c.n >= 1, "contamination.n", "must be >= 1");
    require(c.alpha > 0.0, "contamination.alpha", "must be > 0");
    require(c.n_invalid >= 1, "contamination.n_invalid", "must be >= 1");
  }

  if (root.has("scaling")) {
    Section s(root.at("scaling"), "scaling", {"alphas", "n_grid", "n_valid"});
    s.read("alphas", cfg.scaling.alphas);
    s.read("n_grid", cfg.scaling.n_grid);
    s.read("n_valid", cfg.scaling.n_valid);
    for (double a : cfg.scaling.alphas) require(a > 1.0, "scaling.alphas", "entries must be > 1");
    require(!cfg.scaling.n_grid.empty(), "scaling.n_grid", "must not be empty");
    require(std::is_sorted(cfg.scaling.n_grid.begin(), cfg.scaling.n_grid.end()) && cfg.scaling.n_grid.front() > 0,
            "scaling.n_grid", "must be ascending and positive");
    require(cfg.scaling.n_valid >= 1, "scaling.n_valid", "must be >= 1");
  }

  if (root.has("sustainability")) {
    Section s(root.at("sustainability"), "sustainability", {"alphas", "c0", "tau", "t_grid", "m_max"});
    s.read("alphas", cfg.sustainability.alphas);
    s.read("c0", cfg.sustainability.c0);
    s.read("tau", cfg.sustainability.tau);
    s.read("t_grid", cfg.sustainability.t_grid);
    s.read("m_max", cfg.sustainability.m_max);
    for (double a : cfg.sustainability.alphas) require(a > 1.0, "sustainability.alphas", "entries must be > 1");
    require(cfg.sustainability.c0 > 0.0, "sustainability.c0", "must be > 0");
    require(cfg.sustainability.tau > 0.0, "sustainability.tau", "must be > 0");
    require(cfg.sustainability.m_max > 0.0, "sustainability.m_max", "must be > 0");
  }

  if (root.has("estimate")) {
    Section s(root.at("estimate"), "estimate", {"batch_file", "s", "discovered"});
    s.read("batch_file", cfg.estimate.batch_file);
    s.read("s", cfg.estimate.s_values);
    s.read("discovered", cfg.estimate.discovered);
    for (double x : cfg.estimate.s_values) require(x > 0.0, "estimate.s", "entries must be > 0");
  }

  if (root.has("output")) {
    Section s(root.at("output"), "output", {"path", "format"});
    s.read("path", cfg.output.path);
    s.read("format", cfg.output.format);
    require(cfg.output.format == "csv" || cfg.output.format == "json", "output.format", "expected `csv` or `json`");
  }
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void validate(const ExperimentConfig& cfg) {
  require(cfg.replicates >= 1, "replicates", "must be >= 1");
  const auto& sim = cfg.sim;
  if (sim.q0.u0 > 0.0) require(sim.space.n_invalid >= 1, "q0.u0", "needs space.n_invalid >= 1 when positive");
  for (const auto& [id, r] : sim.verifier.hard_set) {
    require(id < sim.space.n_valid, "verifier.hard_set", "id " + std::to_string(id) + " is not a valid artifact");
  }
  const std::size_t n_total = sim.space.n_valid + sim.space.n_invalid;
  if (sim.human) {
    for (const auto& [id, f] : sim.human->boost) {
      require(id < n_total, "human.boost", "id " + std::to_string(id) + " outside the ambient space");
    }
    for (const auto& [id, m] : sim.human->additions) {
      require(id < n_total, "human.additions", "id " + std::to_string(id) + " outside the ambient space");
    }
  }
  for (ArtifactId id : cfg.estimate.discovered) {
    require(id < sim.space.n_valid, "estimate.discovered", "id " + std::to_string(id) + " is not a valid artifact");
  }
  const bool needs_iterations = cfg.experiment == ExperimentKind::Run || cfg.experiment == ExperimentKind::Coverage ||
                                cfg.experiment == ExperimentKind::CumCost;
  if (needs_iterations && cfg.costs.budget <= 0.0) require(sim.n >= 1, "n", "must be >= 1");
  if (cfg.experiment == ExperimentKind::CumCost) {
    require(sim.verifier.delta == 0.0 && !sim.verifier.w, "verifier.delta",
            "cumulative cost curves need a zero false-positive rate");
    require(std::holds_alternative<policy::Static>(sim.policy) ||
                std::holds_alternative<policy::TailReweight>(sim.policy),
            "policy.kind", "cumulative cost curves need a static or tail_reweight policy");
  }
  if (cfg.experiment == ExperimentKind::Estimate) {
    require(!cfg.estimate.batch_file.empty(), "estimate.batch_file", "required for the estimate experiment");
  }
}

ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base) {
  const json doc = parse_document(text);
  ExperimentConfig cfg = base;
  apply(doc, cfg);
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  const json doc = parse_document(text);
  require(doc.is_object(), "<root>", "expected an object");
  if (doc.contains("preset")) {
    require(doc["preset"].is_string(), "preset", "expected a string");
    ExperimentConfig cfg = preset(doc["preset"].get<std::string>());
    apply(doc, cfg);
    validate(cfg);
    return cfg;
  }
  for (const char* key : {"seed", "space", "experiment"}) {
    if (!doc.contains(key)) fail(key, "missing required key");
  }
  ExperimentConfig cfg;
  apply(doc, cfg);
  validate(cfg);
  return cfg;
}

std::string to_json_string(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["replicates"] = cfg.replicates;
  j["threads"] = cfg.threads;
  j["n"] = cfg.sim.n;
  j["t_max"] = cfg.sim.t_max;
  j["stop_at_coverage"] = cfg.sim.stop_at_coverage;
  j["experiment"] = std::string(to_string(cfg.experiment));
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  j["space"] = {{"n_valid", cfg.sim.space.n_valid}, {"n_invalid", cfg.sim.space.n_invalid},
                {"alpha", cfg.sim.space.alpha}};
  j["q0"] = {{"u0", cfg.sim.q0.u0},
             {"s0", cfg.sim.q0.s0},
             {"invalid_shape", cfg.sim.q0.invalid_shape == InvalidShape::Zipf ? "zipf" : "uniform"}};

  json pol = {{"kind", std::string(policy_name(cfg.sim.policy))}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, policy::TailReweight>) {
          pol["w_min"] = p.w_min;
          pol["w_max"] = p.w_max;
        } else if constexpr (std::is_same_v<P, policy::Reinforce>) {
          pol["gamma"] = p.gamma;
        } else if constexpr (std::is_same_v<P, policy::Forgetful>) {
          pol["p_drop"] = p.p_drop;
        } else if constexpr (std::is_same_v<P, policy::SupportPrune>) {
          pol["epsilon"] = p.epsilon;
        }
      },
      cfg.sim.policy);
  j["policy"] = pol;

  const auto& v = cfg.sim.verifier;
  json hard = json::array();
  for (const auto& [id, r] : v.hard_set) hard.push_back({{"id", id}, {"r", r}});
  j["verifier"] = {{"r", v.r_default}, {"hard_set", hard}, {"delta", v.delta}, {"tau0", v.tau0},
                   {"beta", v.beta},   {"delta0", v.delta0}, {"w0", v.w0},     {"a", v.a}};
  j["verifier"]["w"] = v.w ? json(*v.w) : json(nullptr);

  if (cfg.sim.human) {
    const auto& h = *cfg.sim.human;
    json boost = json::array(), additions = json::array();
    for (const auto& [id, f] : h.boost) boost.push_back({{"id", id}, {"factor", f}});
    for (const auto& [id, m] : h.additions) additions.push_back({{"id", id}, {"mass", m}});
    j["human"] = {{"proposal", h.proposal == HumanConfig::Proposal::Ideal ? "ideal" : "uniform_valid"},
                  {"n_h", h.n_h},
                  {"rho_h", h.rho_h},
                  {"r_eff", h.r_eff},
                  {"boost_valid", h.boost_valid},
                  {"boost", boost},
                  {"additions", additions}};
  }
  j["costs"] = {{"c_gen", cfg.sim.costs.c_gen}, {"budget", cfg.costs.budget}};
  j["fit_window"] = {{"min_n", cfg.fit_window.min_n},
                     {"max_n", cfg.fit_window.max_n},
                     {"min_d", cfg.fit_window.min_d},
                     {"top_fraction", cfg.fit_window.top_fraction}};
  j["thresholds"] = {{"m_low", cfg.thresholds.m_low},
                     {"r_low", cfg.thresholds.r_low},
                     {"f_critical", cfg.thresholds.f_critical}};
  const auto& c = cfg.contamination;
  j["contamination"] = {{"m_new_grid", c.m_new_grid}, {"delta_grid", c.delta_grid}, {"u", c.u},
                        {"r", c.r},                   {"window", c.window},         {"n", c.n},
                        {"n_valid", c.n_valid},       {"n_invalid", c.n_invalid},   {"alpha", c.alpha}};
  j["scaling"] = {{"alphas", cfg.scaling.alphas}, {"n_grid", cfg.scaling.n_grid}, {"n_valid", cfg.scaling.n_valid}};
  j["sustainability"] = {{"alphas", cfg.sustainability.alphas},
                         {"c0", cfg.sustainability.c0},
                         {"tau", cfg.sustainability.tau},
                         {"t_grid", cfg.sustainability.t_grid},
                         {"m_max", cfg.sustainability.m_max}};
  j["estimate"] = {{"batch_file", cfg.estimate.batch_file},
                   {"s", cfg.estimate.s_values},
                   {"discovered", cfg.estimate.discovered}};
  j["output"] = {{"path", cfg.output.path}, {"format", cfg.output.format}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Shared base for the coverage and failure-mode scenarios.
ExperimentConfig coverage_base(std::string name) {
  ExperimentConfig cfg;
  cfg.preset = std::move(name);
  cfg.seed = 20240601;
  cfg.replicates = 200;
  cfg.experiment = ExperimentKind::Coverage;
  cfg.has_space = true;
  cfg.sim.space = {50, 50, 1.5};
  cfg.sim.q0 = {0.5, 1.0, InvalidShape::Zipf};
  cfg.sim.policy = policy::Static{};
  cfg.sim.verifier.r_default = 0.5;
  cfg.sim.verifier.delta = 0.0;
  cfg.sim.n = 500;
  cfg.sim.t_max = 2000;
  cfg.sim.stop_at_coverage = true;
  return cfg;
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> n{
      "c1c4",         "forgetting",  "exploration-failure", "acceptance-failure", "contamination",
      "exploration-barrier", "amplification", "support-expansion", "scaling-a15", "scaling-a20",
      "cumcost-a20",  "sustainability-table"};
  return n;
}

}  // namespace

std::vector<std::string> preset_names() { return names(); }

ExperimentConfig preset(std::string_view name) {
  if (name == "c1c4") return coverage_base("c1c4");
  if (name == "forgetting") {
    auto cfg = coverage_base("forgetting");
    cfg.sim.policy = policy::Forgetful{0.2};
    cfg.sim.verifier.r_default = 1.0;
    cfg.sim.stop_at_coverage = false;
    return cfg;
  }
  if (name == "exploration-failure") {
    auto cfg = coverage_base("exploration-failure");
    cfg.sim.policy = policy::SupportPrune{0.02};
    return cfg;
  }
  if (name == "acceptance-failure") {
    auto cfg = coverage_base("acceptance-failure");
    const auto n_valid = cfg.sim.space.n_valid;
    for (std::size_t i = n_valid - 5; i < n_valid; ++i) cfg.sim.verifier.hard_set[static_cast<ArtifactId>(i)] = 0.0;
    return cfg;
  }
  if (name == "contamination") {
    auto cfg = coverage_base("contamination");
    cfg.sim.verifier.delta = 0.05;
    return cfg;
  }
  if (name == "exploration-barrier") {
    auto cfg = coverage_base("exploration-barrier");
    cfg.sim.q0.s0 = 0.9;
    return cfg;
  }
  if (name == "amplification" || name == "support-expansion") {
    ExperimentConfig cfg;
    cfg.preset = std::string(name);
    cfg.seed = 7;
    cfg.replicates = 500;
    cfg.experiment = ExperimentKind::Run;
    cfg.has_space = true;
    HumanConfig h;
    if (name == "amplification") {
      // Sparse one-step scenario with A_guide = 2, A_verify = 1.25, A_gen = 1.1.
      cfg.sim.space = {100'000, 1000, 0.5};
      cfg.sim.q0 = {0.6, 1.0, InvalidShape::Zipf};
      cfg.sim.verifier.r_default = 0.8;
      cfg.sim.n = 100;
      cfg.sim.t_max = 1;
      h.proposal = HumanConfig::Proposal::UniformValid;
      h.n_h = 10;
      h.rho_h = 0.8;
      h.r_eff = 1.0;
      h.boost_valid = 6.0;
    } else {
      // The rarest valid artifact sits outside supp(Q_0); guidance places mass on it.
      cfg.replicates = 50;
      cfg.sim.space = {50, 50, 1.5};
      cfg.sim.q0 = {0.5, 0.98, InvalidShape::Zipf};
      cfg.sim.verifier.r_default = 1.0;
      cfg.sim.n = 200;
      cfg.sim.t_max = 200;
      h.r_eff = 1.0;
      h.additions[49] = 0.05;
    }
    cfg.sim.human = h;
    return cfg;
  }
  if (name == "scaling-a15" || name == "scaling-a20") {
    ExperimentConfig cfg;
    cfg.preset = std::string(name);
    cfg.seed = 15;
    cfg.replicates = 50;
    cfg.experiment = ExperimentKind::Scaling;
    cfg.scaling.alphas = {name == "scaling-a15" ? 1.5 : 2.0};
    cfg.scaling.n_grid = {1'000, 10'000, 100'000, 1'000'000};
    cfg.scaling.n_valid = 1'000'000;
    return cfg;
  }
  if (name == "cumcost-a20") {
    ExperimentConfig cfg;
    cfg.preset = "cumcost-a20";
    cfg.seed = 20;
    cfg.replicates = 20;
    cfg.experiment = ExperimentKind::CumCost;
    cfg.has_space = true;
    cfg.sim.space = {200'000, 100, 2.0};
    cfg.sim.q0 = {0.0, 1.0, InvalidShape::Zipf};
    cfg.sim.policy = policy::TailReweight{0.5, 2.0};
    cfg.sim.verifier.r_default = 1.0;
    cfg.sim.verifier.delta = 0.0;
    cfg.sim.n = 10'000;
    cfg.sim.t_max = 400;
    return cfg;
  }
  if (name == "sustainability-table") {
    ExperimentConfig cfg;
    cfg.preset = "sustainability-table";
    cfg.experiment = ExperimentKind::Sustainability;
    cfg.sustainability.alphas = {2.0, 1.5, 1.2, 1.05};
    return cfg;
  }
  std::string known;
  for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::Config, "unknown preset `" + std::string(name) + "`; known presets: " + known);
}

}  // namespace nova
