#include "rscore/partition.hpp"

#include <fmt/format.h>

#include "rscore/errors.hpp"
#include "rscore/rng.hpp"

namespace rscore {

Partition::Partition(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
  if (k < 1) throw ConfigError(fmt::format("partition needs at least one community, got K={}", k));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= k) {
      throw ConfigError(fmt::format("label {} of node {} outside [0, {})", labels_[i], i, k));
    }
  }
}

std::vector<std::size_t> Partition::community_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
  for (const int l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k_));
  for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i])].push_back(i);
  return out;
}

bool Partition::all_nonempty() const {
  for (const auto s : community_sizes()) {
    if (s == 0) return false;
  }
  return true;
}

Partition Partition::canonical() const {
  std::vector<int> map(static_cast<std::size_t>(k_), -1);
  int next = 0;
  std::vector<int> out(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    int& m = map[static_cast<std::size_t>(labels_[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return Partition(std::move(out), k_);
}

Eigen::MatrixXd Partition::one_hot() const {
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels_.size()), k_);
  for (std::size_t i = 0; i < labels_.size(); ++i) pi(static_cast<Eigen::Index>(i), labels_[i]) = 1.0;
  return pi;
}

std::uint64_t Partition::fingerprint() const noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(k_) + 0x243F6A8885A308D3ULL);
  for (const int l : labels_) h = mix64(h ^ static_cast<std::uint64_t>(l + 1));
  return h;
}

}  // namespace rscore
