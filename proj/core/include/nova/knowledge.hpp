#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nova {

/// Index into the ambient candidate space. Valid artifacts occupy the
/// rank-ordered prefix [0, n_valid); invalid candidates follow.
using ArtifactId = std::uint32_t;

/// Dense membership set over a fixed id range.
class IdSet {
 public:
  IdSet() = default;
  explicit IdSet(std::size_t capacity) : flags_(capacity, 0) {}

  std::size_t capacity() const noexcept { return flags_.size(); }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  bool contains(ArtifactId id) const noexcept { return id < flags_.size() && flags_[id] != 0; }

  /// Returns true when the id was not present before.
  bool insert(ArtifactId id);
  bool erase(ArtifactId id);

  std::vector<ArtifactId> to_vector() const;

  friend bool operator==(const IdSet& a, const IdSet& b) { return a.flags_ == b.flags_; }

 private:
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

enum class TailKind {
  Proper,
  // alpha <= 1: the infinite Zipf law is not normalizable, finite truncation only.
  ImproperTail,
};

class KnowledgeSpace {
 public:
  KnowledgeSpace(std::size_t n_valid, std::size_t n_invalid, double alpha,
                 std::vector<double> ideal_probs, TailKind tail);

  std::size_t n_total() const noexcept { return n_valid_ + n_invalid_; }
  std::size_t n_valid() const noexcept { return n_valid_; }
  std::size_t n_invalid() const noexcept { return n_invalid_; }
  double alpha() const noexcept { return alpha_; }
  TailKind tail() const noexcept { return tail_; }

  bool is_valid(ArtifactId id) const noexcept { return id < n_valid_; }
  std::span<const double> ideal_probs() const noexcept { return ideal_probs_; }
  double ideal_prob(ArtifactId id) const noexcept { return is_valid(id) ? ideal_probs_[id] : 0.0; }

  std::span<const double> lengths() const noexcept { return lengths_; }
  double length(ArtifactId id) const noexcept { return lengths_[id]; }
  /// Replaces the length model; every entry must be >= 1.
  void set_lengths(std::vector<double> lengths);

 private:
  std::size_t n_valid_;
  std::size_t n_invalid_;
  double alpha_;
  std::vector<double> ideal_probs_;
  std::vector<double> lengths_;
  TailKind tail_;
};

struct SpaceOptions {
  // Spaces with more valid artifacts than this stand in for the countably
  // infinite domain and require a normalizable tail.
  std::size_t infinite_mode_threshold = 10'000'000;
};

/// P(k_j) = j^-alpha / sum_{i<=n_valid} i^-alpha over valid ranks j = 1..n_valid.
KnowledgeSpace build_zipf_space(std::size_t n_valid, std::size_t n_invalid, double alpha,
                                const SpaceOptions& options = {});

/// Zipf weights j^-alpha for j = 1..n, normalized with compensated summation.
std::vector<double> zipf_probabilities(std::size_t n, double alpha);

struct TailDistribution {
  std::vector<ArtifactId> support;
  std::vector<double> probs;
};

/// Ideal conditional tail P restricted to undiscovered valid artifacts.
TailDistribution conditional_tail(const KnowledgeSpace& space, const IdSet& discovered);

/// Conditional tail of an arbitrary mass vector over valid ids (used for the
/// effective discovery distribution built from a generator).
TailDistribution conditional_tail(std::span<const double> valid_mass, const IdSet& discovered);

/// l(k_j) = 1 + floor(log2(j + 1)) with j the 1-based rank (valid) or local
/// index (invalid).
std::vector<double> default_lengths(const KnowledgeSpace& space);

}  // namespace nova
