#include "nova/sampler.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "nova/error.hpp"
#include "nova/numeric.hpp"

namespace nova {

namespace {
void check_weight(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw Error(ErrorKind::InvalidParameter, "weights must be finite and non-negative");
  }
}
}  // namespace

WeightedSampler::WeightedSampler(std::span<const double> weights) { assign(weights); }

void WeightedSampler::assign(std::span<const double> weights) {
  if (weights.empty()) throw Error(ErrorKind::DegenerateDistribution, "empty weight vector");
  for (double w : weights) check_weight(w);
  weights_.assign(weights.begin(), weights.end());
  capacity_ = std::bit_ceil(weights_.size());
  rebuild();
  if (!(total_ > 0.0)) throw Error(ErrorKind::DegenerateDistribution, "all weights are zero");
}

void WeightedSampler::rebuild() {
  tree_.assign(capacity_ + 1, 0.0);
  for (std::size_t i = 0; i < weights_.size(); ++i) tree_[i + 1] = weights_[i];
  // Linear-time construction: push each node into its parent.
  for (std::size_t i = 1; i <= capacity_; ++i) {
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= capacity_) tree_[parent] += tree_[i];
  }
  total_ = recomputed_total();
  updates_since_rebuild_ = 0;
}

double WeightedSampler::recomputed_total() const { return compensated_sum(weights_); }

void WeightedSampler::update_weight(ArtifactId id, double w) {
  if (id >= weights_.size()) throw Error(ErrorKind::InvalidParameter, "id " + std::to_string(id) + " out of range");
  check_weight(w);
  const double delta = w - weights_[id];
  if (delta == 0.0) return;
  weights_[id] = w;
  for (std::size_t i = std::size_t{id} + 1; i <= capacity_; i += i & (~i + 1)) tree_[i] += delta;
  total_ += delta;
  ++updates_since_rebuild_;
  const double root = tree_[capacity_];
  if (updates_since_rebuild_ >= weights_.size() ||
      std::abs(total_ - root) > 1e-9 * std::abs(root) || total_ <= 0.0) {
    rebuild();
  }
}

ArtifactId WeightedSampler::sample(Rng& rng) const {
  if (!(total_ > 0.0)) throw Error(ErrorKind::DegenerateDistribution, "cannot sample: total weight is zero");
  const double root = tree_[capacity_];
  for (;;) {
    double target = rng.uniform() * root;
    std::size_t pos = 0;
    for (std::size_t step = capacity_; step != 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= capacity_ && tree_[next] <= target) {
        target -= tree_[next];
        pos = next;
      }
    }
    // Rounding in the partial sums can land on a zero-weight slot or past the
    // end; rejecting keeps zero-weight ids strictly unreachable.
    if (pos < weights_.size() && weights_[pos] > 0.0) return static_cast<ArtifactId>(pos);
  }
}

void WeightedSampler::sample_into(std::span<ArtifactId> out, Rng& rng) const {
  for (auto& x : out) x = sample(rng);
}

std::vector<ArtifactId> WeightedSampler::sample_batch(std::size_t n, Rng& rng) const {
  std::vector<ArtifactId> out(n);
  sample_into(out, rng);
  return out;
}

}  // namespace nova
