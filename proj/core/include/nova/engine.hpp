#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "nova/knowledge.hpp"
#include "nova/rng.hpp"
#include "nova/sampler.hpp"
#include "nova/verifier.hpp"

namespace nova {

enum class InvalidShape { Zipf, Uniform };

/// How the initial generator Q_0 is laid out over the ambient space.
struct GeneratorInit {
  double u0 = 0.5;   // invalid mass
  double s0 = 1.0;   // fraction of valid ranks (from the top) inside supp(Q_0)
  InvalidShape invalid_shape = InvalidShape::Zipf;
};

/// Sampling distribution Q_t over all ambient ids, held as unnormalized
/// weights inside a WeightedSampler. `base` keeps the Q_0 weights, which
/// stable reweighting distorts around.
class GeneratorDistribution {
 public:
  /// Ids below `n_valid` count as valid mass, the rest as invalid mass.
  GeneratorDistribution(std::vector<double> weights, std::size_t n_valid, double invalid_mass_target = 0.0);

  static GeneratorDistribution from_space(const KnowledgeSpace& space, const GeneratorInit& init);

  std::size_t size() const noexcept { return sampler_.size(); }
  const WeightedSampler& sampler() const noexcept { return sampler_; }
  std::span<const double> weights() const noexcept { return sampler_.weights(); }
  std::span<const double> base_weights() const noexcept { return base_; }
  double total() const noexcept { return sampler_.total(); }
  double prob(ArtifactId id) const { return sampler_.probability(id); }
  bool in_support(ArtifactId id) const { return sampler_.weight(id) > 0.0; }
  double invalid_mass_target() const noexcept { return invalid_mass_target_; }
  std::size_t n_valid() const noexcept { return n_valid_; }

  /// Unnormalized weight sums over valid and invalid ids.
  double valid_weight() const noexcept { return valid_weight_; }
  double invalid_weight() const noexcept { return invalid_weight_; }
  /// Changes whenever any weight changes; copies share it.
  std::uint64_t version() const noexcept { return version_; }

  void set_weight(ArtifactId id, double w);
  void assign(std::span<const double> weights);

 private:
  void refresh_totals();

  WeightedSampler sampler_;
  std::vector<double> base_;
  std::size_t n_valid_;
  double invalid_mass_target_;
  double valid_weight_ = 0.0;
  double invalid_weight_ = 0.0;
  std::uint64_t version_ = 0;
};

struct RetainedState {
  IdSet discovered;              // K_t^+
  std::uint64_t b_per_candidate = 0;
  IdSet b_dedup;                 // distinct accepted invalid ids
  std::size_t t = 0;
  double e_new = 0.0;            // sum N r_t M_t^new
  double cost_spent = 0.0;

  // Unnormalized Q-weight of `discovered`, valid while it matches the
  // generator version it was computed against.
  struct MassCache {
    double discovered_weight = 0.0;
    std::uint64_t version = 0;
  } cache;

  static RetainedState empty(const KnowledgeSpace& space);
};

namespace policy {
struct Static {};
struct TailReweight {
  double w_min = 0.5;
  double w_max = 2.0;
};
struct Reinforce {
  double gamma = 1.0;
};
struct Forgetful {
  double p_drop = 0.0;
};
struct SupportPrune {
  double epsilon = 0.0;
};
}  // namespace policy

using RetrainPolicy =
    std::variant<policy::Static, policy::TailReweight, policy::Reinforce, policy::Forgetful, policy::SupportPrune>;

void validate(const RetrainPolicy& policy);
std::string_view policy_name(const RetrainPolicy& policy);

struct HumanExpert {
  std::vector<double> proposal_probs;          // P_H over ambient ids
  std::size_t n_h = 0;
  double rho_h = 1.0;
  double valid_boost = 1.0;                     // multiplies every valid id
  std::map<ArtifactId, double> guidance_boost;  // per-id, on top of valid_boost; > 0
  std::map<ArtifactId, double> guidance_additions;  // id -> mass placed in Q'
  double r_eff = 1.0;

  void validate(std::size_t n_total) const;
  bool guidance_is_identity() const;
};

struct MassDecomposition {
  double m_new = 0.0;
  double a_mass = 0.0;
  double u_mass = 0.0;
};

struct IterationRecord {
  std::size_t t = 0;
  double m_new = 0.0;
  double a_mass = 0.0;
  double u_mass = 0.0;
  std::uint64_t delta_g = 0;
  std::uint64_t delta_b = 0;
  std::uint64_t delta_b_dedup = 0;
  std::uint64_t g = 0;
  std::uint64_t b = 0;
  std::optional<double> f_marg;  // undefined when delta_g + delta_b == 0
  double gt_estimate = 0.0;
  double exact_batch_unseen = 0.0;
  double e_new_total = 0.0;
  double cost_total = 0.0;
  // Augmented iterations only: share of delta_g contributed by human candidates.
  std::uint64_t delta_g_human = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct CostModel {
  double c_gen = 1.0;
};

/// Direct O(|X|) summation.
MassDecomposition mass_decomposition(const GeneratorDistribution& q, const RetainedState& retained,
                                     const KnowledgeSpace& space);

/// Same decomposition from the generator's cached totals and the retained
/// state's cache, refreshing the cache when the generator has changed.
MassDecomposition tracked_mass_decomposition(const GeneratorDistribution& q, RetainedState& retained,
                                             const KnowledgeSpace& space);

/// Q-weighted mean true-positive rate over undiscovered valid ids (r_default
/// when there are no overrides).
double effective_rate(const GeneratorDistribution& q, const RetainedState& retained, const VerifierSpec& verifier,
                      const KnowledgeSpace& space);

IterationRecord run_iteration(RetainedState& state, const GeneratorDistribution& q, const VerifierSpec& verifier,
                              const KnowledgeSpace& space, std::size_t n, Rng& rng, const CostModel& costs = {});

/// sum over undiscovered valid k of 1 - (1 - r_k Q(k))^n.
double expected_new_genuine(const GeneratorDistribution& q, const RetainedState& retained,
                            const VerifierSpec& verifier, const KnowledgeSpace& space, std::size_t n);

/// Per-candidate: n * delta * U. Dedup: sum over invalid x not yet retained of
/// 1 - (1 - delta Q(x))^n.
double expected_false_accepts(const GeneratorDistribution& q, const RetainedState& retained,
                              const VerifierSpec& verifier, const KnowledgeSpace& space, std::size_t n, bool dedup);

/// Applies one retraining step. Forgetful mutates `retained` and leaves q alone.
void retrain(const RetrainPolicy& policy, GeneratorDistribution& q, RetainedState& retained,
             const KnowledgeSpace& space, Rng& rng);

/// Guided distribution Q': q scaled by the boosts (ids below q.n_valid() by
/// valid_boost), then (1 - sum additions)
/// of it plus the addition masses.
GeneratorDistribution guided_distribution(const GeneratorDistribution& q, const HumanExpert& expert);

IterationRecord run_augmented_iteration(RetainedState& state, const GeneratorDistribution& q,
                                        const HumanExpert& expert, const VerifierSpec& verifier,
                                        const KnowledgeSpace& space, std::size_t n_ai, Rng& rng,
                                        const CostModel& costs = {});

struct SpaceConfig {
  std::size_t n_valid = 100;
  std::size_t n_invalid = 100;
  double alpha = 1.5;
};

/// Expert description in terms of the space; materialized per run.
struct HumanConfig {
  enum class Proposal { Ideal, UniformValid };
  Proposal proposal = Proposal::Ideal;
  std::size_t n_h = 0;
  double rho_h = 1.0;
  double r_eff = 1.0;
  double boost_valid = 1.0;  // applied to every valid id
  std::map<ArtifactId, double> boost;
  std::map<ArtifactId, double> additions;
};

HumanExpert make_expert(const HumanConfig& config, const KnowledgeSpace& space);

struct SimulationConfig {
  SpaceConfig space;
  GeneratorInit q0;
  RetrainPolicy policy = policy::Static{};
  VerifierSpec verifier;
  std::optional<HumanConfig> human;
  std::size_t n = 1000;
  std::size_t t_max = 100;
  CostModel costs;
  bool stop_at_coverage = false;
};

struct RunResult {
  std::vector<IterationRecord> records;
  RetainedState final_state;
  std::optional<std::size_t> coverage_t;
};

/// Runs up to config.t_max iterations on replicate stream (seed, replicate).
/// Coverage is checked after accumulation and before retraining.
RunResult run_experiment(const SimulationConfig& config, std::uint64_t seed, std::uint64_t replicate);
RunResult run_experiment(const SimulationConfig& config, const KnowledgeSpace& space, std::uint64_t seed,
                         std::uint64_t replicate);

std::optional<std::size_t> run_until_coverage(const SimulationConfig& config, std::uint64_t seed,
                                              std::uint64_t replicate, std::size_t t_max);

enum class ConditionStatus { HoldsByConstruction, ViolatedByConstruction, Unknown };
std::string_view to_string(ConditionStatus status);

struct ConditionReport {
  ConditionStatus c1 = ConditionStatus::Unknown;  // monotone accumulation
  ConditionStatus c2 = ConditionStatus::Unknown;  // persistent exposure
  ConditionStatus c3 = ConditionStatus::Unknown;  // positive acceptance
  ConditionStatus c4 = ConditionStatus::Unknown;  // no false positives
};

ConditionReport check_conditions(const SimulationConfig& config);

KnowledgeSpace build_space(const SpaceConfig& config);

}  // namespace nova
