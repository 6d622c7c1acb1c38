#include "nova/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "nova/error.hpp"
#include "nova/estimators.hpp"
#include "nova/numeric.hpp"

namespace nova {

// ---------------------------------------------------------------------------
// Generator

namespace {
std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace

GeneratorDistribution::GeneratorDistribution(std::vector<double> weights, std::size_t n_valid,
                                             double invalid_mass_target)
    : sampler_(weights), base_(std::move(weights)), n_valid_(n_valid), invalid_mass_target_(invalid_mass_target) {
  if (n_valid_ > base_.size()) throw Error(ErrorKind::InvalidParameter, "n_valid exceeds generator size");
  refresh_totals();
}

void GeneratorDistribution::refresh_totals() {
  const auto w = sampler_.weights();
  valid_weight_ = compensated_sum(w.subspan(0, n_valid_));
  invalid_weight_ = compensated_sum(w.subspan(n_valid_));
  version_ = next_version();
}

void GeneratorDistribution::set_weight(ArtifactId id, double w) {
  const double old = sampler_.weight(id);
  sampler_.update_weight(id, w);
  (id < n_valid_ ? valid_weight_ : invalid_weight_) += w - old;
  version_ = next_version();
}

void GeneratorDistribution::assign(std::span<const double> weights) {
  sampler_.assign(weights);
  refresh_totals();
}

GeneratorDistribution GeneratorDistribution::from_space(const KnowledgeSpace& space, const GeneratorInit& init) {
  if (!(init.u0 >= 0.0 && init.u0 < 1.0)) throw Error(ErrorKind::InvalidParameter, "q0.u0 must lie in [0,1)");
  if (!(init.s0 > 0.0 && init.s0 <= 1.0)) throw Error(ErrorKind::InvalidParameter, "q0.s0 must lie in (0,1]");
  if (init.u0 > 0.0 && space.n_invalid() == 0) {
    throw Error(ErrorKind::InvalidParameter, "q0.u0 > 0 requires at least one invalid artifact");
  }
  const auto n_valid = space.n_valid();
  const auto support =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(init.s0 * static_cast<double>(n_valid) - 1e-9)),
                              1, n_valid);

  std::vector<double> w(space.n_total(), 0.0);
  const auto p = space.ideal_probs();
  const double support_mass = compensated_sum(p.subspan(0, support));
  for (std::size_t i = 0; i < support; ++i) w[i] = (1.0 - init.u0) * p[i] / support_mass;

  if (init.u0 > 0.0) {
    const auto n_invalid = space.n_invalid();
    std::vector<double> shape = init.invalid_shape == InvalidShape::Zipf
                                    ? zipf_probabilities(n_invalid, space.alpha())
                                    : std::vector<double>(n_invalid, 1.0 / static_cast<double>(n_invalid));
    for (std::size_t j = 0; j < n_invalid; ++j) w[n_valid + j] = init.u0 * shape[j];
  }
  return GeneratorDistribution(std::move(w), n_valid, init.u0);
}

RetainedState RetainedState::empty(const KnowledgeSpace& space) {
  RetainedState s;
  s.discovered = IdSet(space.n_valid());
  s.b_dedup = IdSet(space.n_total());
  return s;
}

// ---------------------------------------------------------------------------
// Policies

void validate(const RetrainPolicy& policy) {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, policy::TailReweight>) {
          if (!(p.w_min > 0.0 && p.w_min <= p.w_max && std::isfinite(p.w_max))) {
            throw Error(ErrorKind::InvalidParameter, "tail reweighting needs 0 < w_min <= w_max < inf");
          }
        } else if constexpr (std::is_same_v<P, policy::Reinforce>) {
          if (!(p.gamma >= 1.0) || !std::isfinite(p.gamma)) {
            throw Error(ErrorKind::InvalidParameter, "reinforce gamma must be >= 1");
          }
        } else if constexpr (std::is_same_v<P, policy::Forgetful>) {
          if (!(p.p_drop >= 0.0 && p.p_drop <= 1.0)) {
            throw Error(ErrorKind::InvalidParameter, "forgetful p_drop must lie in [0,1]");
          }
        } else if constexpr (std::is_same_v<P, policy::SupportPrune>) {
          if (!(p.epsilon >= 0.0 && p.epsilon < 1.0)) {
            throw Error(ErrorKind::InvalidParameter, "support prune epsilon must lie in [0,1)");
          }
        }
      },
      policy);
}

std::string_view policy_name(const RetrainPolicy& policy) {
  constexpr std::string_view names[] = {"static", "tail_reweight", "reinforce", "forgetful", "support_prune"};
  return names[policy.index()];
}

void HumanExpert::validate(std::size_t n_total) const {
  if (proposal_probs.size() != n_total) {
    throw Error(ErrorKind::InvalidParameter, "human proposal must cover the ambient space");
  }
  if (std::abs(compensated_sum(proposal_probs) - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidParameter, "human proposal must sum to 1");
  }
  if (!(valid_boost > 0.0)) throw Error(ErrorKind::InvalidParameter, "valid boost must be positive");
  if (!(rho_h >= 0.0 && rho_h <= 1.0)) throw Error(ErrorKind::InvalidParameter, "rho_h must lie in [0,1]");
  if (!(r_eff >= 0.0 && r_eff <= 1.0)) throw Error(ErrorKind::InvalidParameter, "r_eff must lie in [0,1]");
  for (const auto& [id, f] : guidance_boost) {
    if (id >= n_total || !(f > 0.0)) throw Error(ErrorKind::InvalidParameter, "guidance boosts must be positive");
  }
  double added = 0.0;
  for (const auto& [id, m] : guidance_additions) {
    if (id >= n_total || !(m > 0.0)) throw Error(ErrorKind::InvalidParameter, "guidance additions must be positive");
    added += m;
  }
  if (!(added < 1.0)) throw Error(ErrorKind::InvalidParameter, "guidance additions must total less than 1");
}

bool HumanExpert::guidance_is_identity() const {
  return guidance_additions.empty() && valid_boost == 1.0 &&
         std::all_of(guidance_boost.begin(), guidance_boost.end(), [](const auto& kv) { return kv.second == 1.0; });
}

HumanExpert make_expert(const HumanConfig& config, const KnowledgeSpace& space) {
  HumanExpert e;
  e.proposal_probs.assign(space.n_total(), 0.0);
  const auto p = space.ideal_probs();
  for (std::size_t i = 0; i < space.n_valid(); ++i) {
    e.proposal_probs[i] = config.proposal == HumanConfig::Proposal::Ideal
                              ? p[i]
                              : 1.0 / static_cast<double>(space.n_valid());
  }
  e.n_h = config.n_h;
  e.rho_h = config.rho_h;
  e.r_eff = config.r_eff;
  e.valid_boost = config.boost_valid;
  e.guidance_boost = config.boost;
  e.guidance_additions = config.additions;
  e.validate(space.n_total());
  return e;
}

// ---------------------------------------------------------------------------
// Mass accounting and oracles

MassDecomposition mass_decomposition(const GeneratorDistribution& q, const RetainedState& retained,
                                     const KnowledgeSpace& space) {
  CompensatedSum m_new, a_mass, u_mass;
  const auto w = q.weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto id = static_cast<ArtifactId>(i);
    if (!space.is_valid(id)) {
      u_mass.add(w[i]);
    } else if (retained.discovered.contains(id)) {
      a_mass.add(w[i]);
    } else {
      m_new.add(w[i]);
    }
  }
  const double total = m_new.value() + a_mass.value() + u_mass.value();
  return {m_new.value() / total, a_mass.value() / total, u_mass.value() / total};
}

MassDecomposition tracked_mass_decomposition(const GeneratorDistribution& q, RetainedState& retained,
                                             const KnowledgeSpace& space) {
  if (retained.cache.version != q.version()) {
    CompensatedSum disc;
    const auto w = q.weights();
    for (std::size_t i = 0; i < space.n_valid(); ++i) {
      if (retained.discovered.contains(static_cast<ArtifactId>(i))) disc.add(w[i]);
    }
    retained.cache = {disc.value(), q.version()};
  }
  const double a = retained.cache.discovered_weight;
  const double m = std::max(0.0, q.valid_weight() - a);
  const double u = q.invalid_weight();
  const double total = m + a + u;
  return {m / total, a / total, u / total};
}

double effective_rate(const GeneratorDistribution& q, const RetainedState& retained, const VerifierSpec& verifier,
                      const KnowledgeSpace& space) {
  if (verifier.hard_set.empty()) return verifier.r_default;
  CompensatedSum weighted, mass;
  const auto w = q.weights();
  for (std::size_t i = 0; i < space.n_valid(); ++i) {
    const auto id = static_cast<ArtifactId>(i);
    if (retained.discovered.contains(id) || w[i] <= 0.0) continue;
    weighted.add(w[i] * verifier.rate(id));
    mass.add(w[i]);
  }
  return mass.value() > 0.0 ? weighted.value() / mass.value() : verifier.r_default;
}

namespace {
// 1 - (1 - p)^n without cancellation for small p.
double hit_probability(double p, std::size_t n) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}
}  // namespace

double expected_new_genuine(const GeneratorDistribution& q, const RetainedState& retained,
                            const VerifierSpec& verifier, const KnowledgeSpace& space, std::size_t n) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < space.n_valid(); ++i) {
    const auto id = static_cast<ArtifactId>(i);
    if (retained.discovered.contains(id)) continue;
    sum.add(hit_probability(verifier.rate(id) * q.prob(id), n));
  }
  return sum.value();
}

double expected_false_accepts(const GeneratorDistribution& q, const RetainedState& retained,
                              const VerifierSpec& verifier, const KnowledgeSpace& space, std::size_t n,
                              bool dedup) {
  const double delta = verifier.false_positive_rate();
  if (!dedup) return static_cast<double>(n) * delta * mass_decomposition(q, retained, space).u_mass;
  CompensatedSum sum;
  for (std::size_t i = space.n_valid(); i < space.n_total(); ++i) {
    const auto id = static_cast<ArtifactId>(i);
    if (retained.b_dedup.contains(id)) continue;
    sum.add(hit_probability(delta * q.prob(id), n));
  }
  return sum.value();
}

// ---------------------------------------------------------------------------
// Loop

namespace {

struct BatchTally {
  std::uint64_t delta_g = 0;
  std::uint64_t delta_b = 0;
  std::uint64_t delta_b_dedup = 0;
  double cost = 0.0;
};

void record_discovery(RetainedState& state, const GeneratorDistribution& q, ArtifactId id) {
  if (state.cache.version == q.version()) state.cache.discovered_weight += q.sampler().weight(id);
}

BatchTally verify_and_accumulate(RetainedState& state, const GeneratorDistribution& q,
                                 std::span<const ArtifactId> batch, const VerifierSpec& verifier,
                                 const KnowledgeSpace& space, const CostModel& costs, Rng& rng) {
  BatchTally tally;
  const double effort = verifier.w.value_or(0.0);
  for (ArtifactId id : batch) {
    const bool valid = space.is_valid(id);
    const bool is_new = valid && !state.discovered.contains(id);
    tally.cost += costs.c_gen + verification_cost(space.length(id), verifier) + effort;
    if (!accept(id, valid, is_new, verifier, rng)) continue;
    if (valid) {
      if (state.discovered.insert(id)) {
        record_discovery(state, q, id);
        ++tally.delta_g;
      }
    } else {
      ++tally.delta_b;
      if (state.b_dedup.insert(id)) ++tally.delta_b_dedup;
    }
  }
  return tally;
}

// O(batch) form of exact_batch_unseen_mass using the generator's cached totals.
// `sorted` is the batch in ascending order.
double batch_unseen_mass(const GeneratorDistribution& q, std::span<const ArtifactId> sorted) {
  std::vector<ArtifactId> ids(sorted.begin(), sorted.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  CompensatedSum seen;
  for (ArtifactId id : ids) seen.add(q.sampler().weight(id));
  const double total = q.valid_weight() + q.invalid_weight();
  return std::clamp((total - seen.value()) / total, 0.0, 1.0);
}

IterationRecord finish_record(RetainedState& state, const MassDecomposition& md, const BatchTally& tally,
                              std::span<const ArtifactId> batch, const GeneratorDistribution& q) {
  state.b_per_candidate += tally.delta_b;
  state.cost_spent += tally.cost;

  IterationRecord rec;
  rec.t = state.t;
  rec.m_new = md.m_new;
  rec.a_mass = md.a_mass;
  rec.u_mass = md.u_mass;
  rec.delta_g = tally.delta_g;
  rec.delta_b = tally.delta_b;
  rec.delta_b_dedup = tally.delta_b_dedup;
  rec.g = state.discovered.size();
  rec.b = state.b_per_candidate;
  if (tally.delta_g + tally.delta_b > 0) {
    rec.f_marg = static_cast<double>(tally.delta_b) / static_cast<double>(tally.delta_g + tally.delta_b);
  }
  std::vector<ArtifactId> sorted(batch.begin(), batch.end());
  std::sort(sorted.begin(), sorted.end());
  if (!batch.empty()) rec.gt_estimate = good_turing(frequency_profile(sorted));
  rec.exact_batch_unseen = batch_unseen_mass(q, sorted);
  rec.e_new_total = state.e_new;
  rec.cost_total = state.cost_spent;
  ++state.t;
  return rec;
}

}  // namespace

IterationRecord run_iteration(RetainedState& state, const GeneratorDistribution& q, const VerifierSpec& verifier,
                              const KnowledgeSpace& space, std::size_t n, Rng& rng, const CostModel& costs) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "batch size must be >= 1");
  const auto md = tracked_mass_decomposition(q, state, space);
  state.e_new += static_cast<double>(n) * effective_rate(q, state, verifier, space) * md.m_new;
  const auto batch = q.sampler().sample_batch(n, rng);
  const auto tally = verify_and_accumulate(state, q, batch, verifier, space, costs, rng);
  return finish_record(state, md, tally, batch, q);
}

GeneratorDistribution guided_distribution(const GeneratorDistribution& q, const HumanExpert& expert) {
  if (expert.guidance_is_identity()) return q;
  std::vector<double> w(q.weights().begin(), q.weights().end());
  if (expert.valid_boost != 1.0) {
    for (std::size_t i = 0; i < q.n_valid(); ++i) w[i] *= expert.valid_boost;
  }
  for (const auto& [id, f] : expert.guidance_boost) w[id] *= f;
  const double boosted_total = compensated_sum(w);
  double added = 0.0;
  for (const auto& [id, m] : expert.guidance_additions) added += m;
  if (!(boosted_total > 0.0) && added <= 0.0) {
    throw Error(ErrorKind::DegenerateDistribution, "guided distribution has zero mass");
  }
  const double scale = boosted_total > 0.0 ? (1.0 - added) / boosted_total : 0.0;
  for (double& x : w) x *= scale;
  for (const auto& [id, m] : expert.guidance_additions) w[id] += m;
  return GeneratorDistribution(std::move(w), q.n_valid(), q.invalid_mass_target());
}

IterationRecord run_augmented_iteration(RetainedState& state, const GeneratorDistribution& q,
                                        const HumanExpert& expert, const VerifierSpec& verifier,
                                        const KnowledgeSpace& space, std::size_t n_ai, Rng& rng,
                                        const CostModel& costs) {
  if (n_ai == 0) throw Error(ErrorKind::InvalidParameter, "AI batch size must be >= 1");
  const GeneratorDistribution guided = guided_distribution(q, expert);
  VerifierSpec reviewed = verifier;
  reviewed.r_default = expert.r_eff;

  const auto md = tracked_mass_decomposition(guided, state, space);
  state.e_new += static_cast<double>(n_ai) * effective_rate(guided, state, reviewed, space) * md.m_new;
  const auto batch = guided.sampler().sample_batch(n_ai, rng);
  auto tally = verify_and_accumulate(state, guided, batch, reviewed, space, costs, rng);

  std::uint64_t human_hits = 0;
  if (expert.n_h > 0) {
    const WeightedSampler proposals(expert.proposal_probs);
    const auto human = proposals.sample_batch(expert.n_h, rng);
    for (ArtifactId id : human) {
      // Human false positives are not modeled: invalid proposals never pass.
      const bool passes = rng.uniform() < expert.rho_h;
      if (passes && space.is_valid(id) && state.discovered.insert(id)) {
        record_discovery(state, guided, id);
        ++human_hits;
      }
    }
  }
  tally.delta_g += human_hits;
  auto rec = finish_record(state, md, tally, batch, guided);
  rec.delta_g_human = human_hits;
  return rec;
}

// ---------------------------------------------------------------------------
// Retraining

void retrain(const RetrainPolicy& policy, GeneratorDistribution& q, RetainedState& retained,
             const KnowledgeSpace& space, Rng& rng) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, policy::TailReweight>) {
          // Fresh bounded distortion of the Q_0 tail every iteration.
          const auto base = q.base_weights();
          std::vector<double> w(base.begin(), base.end());
          for (std::size_t i = 0; i < space.n_valid(); ++i) {
            if (w[i] > 0.0 && !retained.discovered.contains(static_cast<ArtifactId>(i))) {
              w[i] *= rng.uniform(p.w_min, p.w_max);
            }
          }
          q.assign(w);
        } else if constexpr (std::is_same_v<P, policy::Reinforce>) {
          if (p.gamma == 1.0) return;
          std::vector<double> w(q.weights().begin(), q.weights().end());
          for (ArtifactId id : retained.discovered.to_vector()) w[id] *= p.gamma;
          const double z = compensated_sum(w);
          for (double& x : w) x /= z;
          q.assign(w);
        } else if constexpr (std::is_same_v<P, policy::Forgetful>) {
          if (p.p_drop <= 0.0) return;
          for (ArtifactId id : retained.discovered.to_vector()) {
            if (rng.bernoulli(p.p_drop) && retained.discovered.erase(id) && retained.cache.version == q.version()) {
              retained.cache.discovered_weight -= q.sampler().weight(id);
            }
          }
        } else if constexpr (std::is_same_v<P, policy::SupportPrune>) {
          if (p.epsilon <= 0.0) return;
          std::vector<double> w(q.weights().begin(), q.weights().end());
          std::vector<ArtifactId> candidates;
          for (std::size_t i = 0; i < space.n_valid(); ++i) {
            const auto id = static_cast<ArtifactId>(i);
            if (w[i] > 0.0 && !retained.discovered.contains(id)) candidates.push_back(id);
          }
          std::sort(candidates.begin(), candidates.end(), [&](ArtifactId a, ArtifactId b) {
            return w[a] != w[b] ? w[a] < w[b] : a < b;
          });
          const double total = q.total();
          double pruned = 0.0;
          for (ArtifactId id : candidates) {
            if ((pruned + w[id]) / total > p.epsilon + 1e-12) break;
            pruned += w[id];
            w[id] = 0.0;
          }
          const double z = compensated_sum(w);
          if (!(z > 0.0)) throw Error(ErrorKind::DegenerateDistribution, "support pruning removed all mass");
          for (double& x : w) x /= z;
          q.assign(w);
        }
      },
      policy);
}

// ---------------------------------------------------------------------------
// Orchestration

KnowledgeSpace build_space(const SpaceConfig& config) {
  return build_zipf_space(config.n_valid, config.n_invalid, config.alpha);
}

RunResult run_experiment(const SimulationConfig& config, const KnowledgeSpace& space, std::uint64_t seed,
                         std::uint64_t replicate) {
  config.verifier.validate();
  validate(config.policy);
  for (const auto& [id, r] : config.verifier.hard_set) {
    if (!space.is_valid(id)) throw Error(ErrorKind::InvalidParameter, "hard_set id " + std::to_string(id) + " is not valid");
  }
  Rng rng = Rng::stream(seed, replicate);
  GeneratorDistribution q = GeneratorDistribution::from_space(space, config.q0);
  RunResult result{{}, RetainedState::empty(space), std::nullopt};
  RetainedState& state = result.final_state;
  std::optional<HumanExpert> expert;
  if (config.human) expert = make_expert(*config.human, space);

  result.records.reserve(config.t_max);
  for (std::size_t t = 0; t < config.t_max; ++t) {
    result.records.push_back(expert ? run_augmented_iteration(state, q, *expert, config.verifier, space, config.n,
                                                              rng, config.costs)
                                    : run_iteration(state, q, config.verifier, space, config.n, rng, config.costs));
    if (state.discovered.size() == space.n_valid() && !result.coverage_t) {
      result.coverage_t = t;
      if (config.stop_at_coverage) break;
    }
    retrain(config.policy, q, state, space, rng);
  }
  return result;
}

RunResult run_experiment(const SimulationConfig& config, std::uint64_t seed, std::uint64_t replicate) {
  const KnowledgeSpace space = build_space(config.space);
  return run_experiment(config, space, seed, replicate);
}

std::optional<std::size_t> run_until_coverage(const SimulationConfig& config, std::uint64_t seed,
                                              std::uint64_t replicate, std::size_t t_max) {
  SimulationConfig c = config;
  c.t_max = t_max;
  c.stop_at_coverage = true;
  return run_experiment(c, seed, replicate).coverage_t;
}

std::string_view to_string(ConditionStatus status) {
  switch (status) {
    case ConditionStatus::HoldsByConstruction: return "holds-by-construction";
    case ConditionStatus::ViolatedByConstruction: return "violated-by-construction";
    case ConditionStatus::Unknown: return "unknown";
  }
  return "unknown";
}

ConditionReport check_conditions(const SimulationConfig& config) {
  using S = ConditionStatus;
  ConditionReport report;
  const auto* forgetful = std::get_if<policy::Forgetful>(&config.policy);
  report.c1 = forgetful && forgetful->p_drop > 0.0 ? S::ViolatedByConstruction : S::HoldsByConstruction;

  const bool full_support = config.q0.s0 >= 1.0;
  if (std::holds_alternative<policy::SupportPrune>(config.policy)) {
    report.c2 = S::ViolatedByConstruction;
  } else if (std::holds_alternative<policy::Reinforce>(config.policy)) {
    report.c2 = S::Unknown;
  } else {
    // Static, TailReweight and Forgetful never move Q away from supp(Q_0).
    report.c2 = full_support ? S::HoldsByConstruction : S::ViolatedByConstruction;
  }

  report.c3 = config.verifier.min_rate() > 0.0 ? S::HoldsByConstruction : S::ViolatedByConstruction;
  report.c4 = config.verifier.delta == 0.0 && !config.verifier.w ? S::HoldsByConstruction : S::ViolatedByConstruction;
  return report;
}

}  // namespace nova
