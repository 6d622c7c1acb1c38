#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nova/knowledge.hpp"
#include "nova/rng.hpp"

namespace nova {

/// Exact draws from a mutable weight vector.
///
/// Weights live in a prefix-sum (Fenwick) tree sized to a power of two, so a
/// draw is a single top-down descent and a point update touches log2(n) nodes.
/// The cached total is maintained incrementally and the tree is rebuilt from
/// the raw weights every `size()` updates, or sooner if the running total has
/// drifted by more than 1e-9 relative to the tree root.
class WeightedSampler {
 public:
  WeightedSampler() = default;
  explicit WeightedSampler(std::span<const double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double total() const noexcept { return total_; }
  double weight(ArtifactId id) const { return weights_[id]; }
  std::span<const double> weights() const noexcept { return weights_; }
  double probability(ArtifactId id) const { return weights_[id] / total_; }

  ArtifactId sample(Rng& rng) const;
  std::vector<ArtifactId> sample_batch(std::size_t n, Rng& rng) const;
  void sample_into(std::span<ArtifactId> out, Rng& rng) const;

  void update_weight(ArtifactId id, double w);
  /// Replace all weights at once in O(n).
  void assign(std::span<const double> weights);

  /// Sum of weights recomputed from scratch (compensated).
  double recomputed_total() const;

 private:
  void rebuild();

  std::vector<double> weights_;
  std::vector<double> tree_;  // 1-based Fenwick array of length capacity_ + 1
  std::size_t capacity_ = 0;
  double total_ = 0.0;
  std::size_t updates_since_rebuild_ = 0;
};

}  // namespace nova
