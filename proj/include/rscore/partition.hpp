#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rscore {

/// Community labels for n nodes.
///
/// Labels are 0-based in memory (0..K-1). Text files written by the io layer
/// use 1-based labels.
class Partition {
 public:
  Partition() = default;
  /// Throws ConfigError if any label lies outside [0, k).
  Partition(std::vector<int> labels, int k);

  std::size_t size() const noexcept { return labels_.size(); }
  int num_communities() const noexcept { return k_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const noexcept { return labels_; }

  std::vector<std::size_t> community_sizes() const;
  /// Node indices of each community in increasing order.
  std::vector<std::vector<std::size_t>> members() const;
  bool all_nonempty() const;

  /// Relabels communities in order of first appearance (node 0 gets label 0).
  Partition canonical() const;

  /// n x K one-hot membership matrix.
  Eigen::MatrixXd one_hot() const;

  /// Order-sensitive digest of the labels.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

}  // namespace rscore
