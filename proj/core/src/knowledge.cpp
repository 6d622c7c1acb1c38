#include "nova/knowledge.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "nova/error.hpp"
#include "nova/numeric.hpp"

namespace nova {

bool IdSet::insert(ArtifactId id) {
  if (id >= flags_.size()) throw Error(ErrorKind::InvalidParameter, "id " + std::to_string(id) + " out of range");
  if (flags_[id]) return false;
  flags_[id] = 1;
  ++count_;
  return true;
}

bool IdSet::erase(ArtifactId id) {
  if (id >= flags_.size() || !flags_[id]) return false;
  flags_[id] = 0;
  --count_;
  return true;
}

std::vector<ArtifactId> IdSet::to_vector() const {
  std::vector<ArtifactId> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.push_back(static_cast<ArtifactId>(i));
  }
  return out;
}

KnowledgeSpace::KnowledgeSpace(std::size_t n_valid, std::size_t n_invalid, double alpha,
                               std::vector<double> ideal_probs, TailKind tail)
    : n_valid_(n_valid), n_invalid_(n_invalid), alpha_(alpha), ideal_probs_(std::move(ideal_probs)),
      tail_(tail) {
  if (n_valid_ == 0) throw Error(ErrorKind::EmptyDomain, "knowledge space needs at least one valid artifact");
  if (ideal_probs_.size() != n_valid_) throw Error(ErrorKind::InvalidParameter, "ideal_probs size must equal n_valid");
  if (n_total() > (std::size_t{1} << 32)) throw Error(ErrorKind::InvalidParameter, "ambient space exceeds 32-bit ids");
  const double total = compensated_sum(ideal_probs_);
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::InvalidParameter, "ideal_probs must sum to 1");
  for (std::size_t i = 0; i < n_valid_; ++i) {
    if (!(ideal_probs_[i] > 0.0)) throw Error(ErrorKind::InvalidParameter, "ideal_probs must be positive");
    if (i > 0 && ideal_probs_[i] > ideal_probs_[i - 1]) {
      throw Error(ErrorKind::InvalidParameter, "ideal_probs must be non-increasing in rank");
    }
  }
  lengths_ = default_lengths(*this);
}

void KnowledgeSpace::set_lengths(std::vector<double> lengths) {
  if (lengths.size() != n_total()) throw Error(ErrorKind::InvalidParameter, "lengths size must equal n_total");
  for (double l : lengths) {
    if (!(l >= 1.0)) throw Error(ErrorKind::InvalidParameter, "lengths must be >= 1");
  }
  lengths_ = std::move(lengths);
}

std::vector<double> zipf_probabilities(std::size_t n, double alpha) {
  std::vector<double> w(n);
  // Sum smallest terms first; the compensation handles the rest.
  CompensatedSum total;
  for (std::size_t j = n; j >= 1; --j) {
    w[j - 1] = std::pow(static_cast<double>(j), -alpha);
    total.add(w[j - 1]);
  }
  const double z = total.value();
  for (double& x : w) x /= z;
  return w;
}

KnowledgeSpace build_zipf_space(std::size_t n_valid, std::size_t n_invalid, double alpha,
                                const SpaceOptions& options) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::InvalidParameter, "alpha must be positive");
  if (n_valid == 0) throw Error(ErrorKind::EmptyDomain, "n_valid must be >= 1");
  const TailKind tail = alpha <= 1.0 ? TailKind::ImproperTail : TailKind::Proper;
  if (tail == TailKind::ImproperTail && n_valid > options.infinite_mode_threshold) {
    throw Error(ErrorKind::InvalidParameter,
                "alpha <= 1 is not normalizable in infinite mode (n_valid above " +
                    std::to_string(options.infinite_mode_threshold) + ")");
  }
  return KnowledgeSpace(n_valid, n_invalid, alpha, zipf_probabilities(n_valid, alpha), tail);
}

TailDistribution conditional_tail(std::span<const double> valid_mass, const IdSet& discovered) {
  TailDistribution tail;
  CompensatedSum mass;
  for (std::size_t i = 0; i < valid_mass.size(); ++i) {
    const auto id = static_cast<ArtifactId>(i);
    if (discovered.contains(id) || valid_mass[i] <= 0.0) continue;
    tail.support.push_back(id);
    tail.probs.push_back(valid_mass[i]);
    mass.add(valid_mass[i]);
  }
  const double z = mass.value();
  if (tail.support.empty() || !(z > 0.0)) {
    throw Error(ErrorKind::EmptyTail, "no undiscovered valid mass remains (exploration barrier reached)");
  }
  for (double& p : tail.probs) p /= z;
  return tail;
}

TailDistribution conditional_tail(const KnowledgeSpace& space, const IdSet& discovered) {
  return conditional_tail(space.ideal_probs(), discovered);
}

namespace {
double log_length(std::size_t rank) {
  // floor(log2(rank + 1)) == bit_width(rank + 1) - 1
  return 1.0 + static_cast<double>(std::bit_width(rank + 1) - 1);
}
}  // namespace

std::vector<double> default_lengths(const KnowledgeSpace& space) {
  std::vector<double> out(space.n_total());
  for (std::size_t i = 0; i < space.n_valid(); ++i) out[i] = log_length(i + 1);
  for (std::size_t i = 0; i < space.n_invalid(); ++i) out[space.n_valid() + i] = log_length(i + 1);
  return out;
}

}  // namespace nova
