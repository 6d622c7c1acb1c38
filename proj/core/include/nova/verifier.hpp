#pragma once

#include <map>
#include <optional>

#include "nova/knowledge.hpp"
#include "nova/rng.hpp"

namespace nova {

struct VerifierSpec {
  double r_default = 1.0;
  // Per-artifact true-positive rates overriding r_default.
  std::map<ArtifactId, double> hard_set;
  double delta = 0.0;
  double tau0 = 0.0;
  double beta = 1.0;
  // Cost-dependent false positives delta(w) = delta0 (w/w0)^-a, active when w is set.
  double delta0 = 0.0;
  double w0 = 1.0;
  double a = 1.0;
  std::optional<double> w;

  /// Throws InvalidParameter when any field is out of range.
  void validate() const;

  double rate(ArtifactId id) const {
    auto it = hard_set.find(id);
    return it == hard_set.end() ? r_default : it->second;
  }
  /// False-positive rate in effect: delta(w) when w is set, else delta.
  double false_positive_rate() const;
  /// Smallest true-positive rate over default and overrides.
  double min_rate() const;
};

/// Bernoulli verification. Valid candidates pass with their rate whether or
/// not they are new; invalid candidates pass with the false-positive rate.
bool accept(ArtifactId candidate, bool is_valid, bool is_new, const VerifierSpec& spec, Rng& rng);

/// tau0 * length^beta.
double verification_cost(double length, const VerifierSpec& spec);

/// min(1, delta0 (w/w0)^-a).
double delta_of_w(double w, const VerifierSpec& spec);

}  // namespace nova
