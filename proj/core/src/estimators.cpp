#include "nova/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nova/error.hpp"
#include "nova/numeric.hpp"

namespace nova {

std::uint64_t FrequencyProfile::distinct() const {
  std::uint64_t d = 0;
  for (const auto& [r, fr] : f) d += fr;
  return d;
}

FrequencyProfile frequency_profile(std::span<const ArtifactId> batch) {
  FrequencyProfile profile;
  profile.n = batch.size();
  if (batch.empty()) return profile;
  std::vector<ArtifactId> sorted(batch.begin(), batch.end());
  if (!std::is_sorted(sorted.begin(), sorted.end())) std::sort(sorted.begin(), sorted.end());
  std::uint64_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ++profile.f[run];
      run = 1;
    }
  }
  return profile;
}

double good_turing(const FrequencyProfile& profile) {
  if (profile.n == 0) throw Error(ErrorKind::UndefinedEstimate, "Good-Turing estimate needs a non-empty batch");
  return static_cast<double>(profile.count(1)) / static_cast<double>(profile.n);
}

double exact_batch_unseen_mass(std::span<const double> q_weights, std::span<const ArtifactId> batch) {
  std::vector<std::uint8_t> seen(q_weights.size(), 0);
  for (ArtifactId id : batch) {
    if (id >= q_weights.size()) throw Error(ErrorKind::InvalidParameter, "batch id outside the generator support");
    seen[id] = 1;
  }
  CompensatedSum total;
  CompensatedSum unseen;
  for (std::size_t i = 0; i < q_weights.size(); ++i) {
    total.add(q_weights[i]);
    if (!seen[i]) unseen.add(q_weights[i]);
  }
  if (!(total.value() > 0.0)) throw Error(ErrorKind::DegenerateDistribution, "generator has zero total mass");
  return unseen.value() / total.value();
}

double mc_new_valid_mass(std::span<const ArtifactId> batch, const KnowledgeSpace& space, const IdSet& discovered) {
  if (batch.empty()) throw Error(ErrorKind::UndefinedEstimate, "Monte Carlo new-valid mass needs a non-empty batch");
  std::size_t hits = 0;
  for (ArtifactId id : batch) {
    if (space.is_valid(id) && !discovered.contains(id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

GoodToulminEstimate good_toulmin(const FrequencyProfile& profile, double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidParameter, "extrapolation factor s must be > 0");
  if (profile.f.empty()) throw Error(ErrorKind::UndefinedEstimate, "Good-Toulmin needs a non-empty profile");
  CompensatedSum sum;
  for (const auto& [r, fr] : profile.f) {
    // (-s)^{r+1} = -(-s)^r
    sum.add(-std::pow(-s, static_cast<double>(r)) * static_cast<double>(fr));
  }
  return {sum.value(), s > 1.0};
}

}  // namespace nova
