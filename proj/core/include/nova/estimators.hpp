#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "nova/knowledge.hpp"

namespace nova {

/// Multiplicity histogram of a batch: f[r] = number of species seen exactly r times.
struct FrequencyProfile {
  std::map<std::uint64_t, std::uint64_t> f;
  std::uint64_t n = 0;

  std::uint64_t count(std::uint64_t r) const {
    auto it = f.find(r);
    return it == f.end() ? 0 : it->second;
  }
  std::uint64_t distinct() const;
};

FrequencyProfile frequency_profile(std::span<const ArtifactId> batch);

/// f_1 / n.
double good_turing(const FrequencyProfile& profile);

/// Q-mass of ids absent from the batch. `q_weights` need not be normalized.
double exact_batch_unseen_mass(std::span<const double> q_weights, std::span<const ArtifactId> batch);

/// Fraction of the batch that is valid and not yet discovered.
double mc_new_valid_mass(std::span<const ArtifactId> batch, const KnowledgeSpace& space, const IdSet& discovered);

struct GoodToulminEstimate {
  double value = 0.0;
  // The series is known to diverge for s > 1.
  bool unstable = false;
};

/// sum_{r>=1} (-s)^{r+1} f_r over the observed multiplicities, predicting new
/// species in a further sample of size s*n.
GoodToulminEstimate good_toulmin(const FrequencyProfile& profile, double s);

}  // namespace nova
