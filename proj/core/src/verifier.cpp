#include "nova/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nova/error.hpp"

namespace nova {

namespace {
bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace

void VerifierSpec::validate() const {
  if (!is_probability(r_default)) throw Error(ErrorKind::InvalidParameter, "r_default must lie in [0,1]");
  for (const auto& [id, r] : hard_set) {
    if (!is_probability(r)) {
      throw Error(ErrorKind::InvalidParameter, "hard_set rate for id " + std::to_string(id) + " must lie in [0,1]");
    }
  }
  if (!is_probability(delta)) throw Error(ErrorKind::InvalidParameter, "delta must lie in [0,1]");
  if (!is_probability(delta0)) throw Error(ErrorKind::InvalidParameter, "delta0 must lie in [0,1]");
  if (!(tau0 >= 0.0)) throw Error(ErrorKind::InvalidParameter, "tau0 must be >= 0");
  if (!(beta >= 1.0)) throw Error(ErrorKind::InvalidParameter, "beta must be >= 1");
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidParameter, "a must be > 0");
  if (!(w0 > 0.0)) throw Error(ErrorKind::InvalidParameter, "w0 must be > 0");
  if (w && !(*w > 0.0)) throw Error(ErrorKind::InvalidParameter, "w must be > 0");
}

double VerifierSpec::false_positive_rate() const { return w ? delta_of_w(*w, *this) : delta; }

double VerifierSpec::min_rate() const {
  double m = r_default;
  for (const auto& [id, r] : hard_set) m = std::min(m, r);
  return m;
}

bool accept(ArtifactId candidate, bool is_valid, bool /*is_new*/, const VerifierSpec& spec, Rng& rng) {
  const double p = is_valid ? spec.rate(candidate) : spec.false_positive_rate();
  // Draw unconditionally so the stream position does not depend on the rate.
  const double u = rng.uniform();
  return u < p;
}

double verification_cost(double length, const VerifierSpec& spec) {
  if (!(length >= 1.0)) throw Error(ErrorKind::InvalidParameter, "length must be >= 1");
  if (spec.tau0 == 0.0) return 0.0;
  return spec.beta == 1.0 ? spec.tau0 * length : spec.tau0 * std::pow(length, spec.beta);
}

double delta_of_w(double w, const VerifierSpec& spec) {
  if (!(w > 0.0)) throw Error(ErrorKind::InvalidParameter, "verification effort w must be > 0");
  return std::min(1.0, spec.delta0 * std::pow(w / spec.w0, -spec.a));
}

}  // namespace nova
