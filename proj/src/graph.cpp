#include "rscore/graph.hpp"

#include <fmt/format.h>

#include "rscore/errors.hpp"

namespace rscore {

NodeMask::NodeMask(std::size_t n, std::span<const std::size_t> nodes) : NodeMask(n) {
  for (const auto i : nodes) set(i);
}

std::size_t NodeMask::count() const noexcept {
  std::size_t c = 0;
  for (const auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::size_t> NodeMask::indices() const {
  std::vector<std::size_t> out;
  for_each_bit(words(), [&](std::size_t i) { out.push_back(i); });
  return out;
}

AdjacencyMatrix::AdjacencyMatrix(std::size_t n)
    : n_(n), words_per_row_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0), offsets_(n + 1, 0) {}

AdjacencyMatrix AdjacencyMatrix::from_edges(std::size_t n, std::span<const Edge> edges) {
  AdjacencyBuilder b(n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) throw ConfigError(fmt::format("edge ({}, {}) outside n={}", i, j, n));
    if (i == j) throw ConfigError(fmt::format("self-loop at node {}", i));
    b.add(i, j);
  }
  return std::move(b).finish();
}

AdjacencyMatrix AdjacencyMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) throw ConfigError("adjacency matrix must be square");
  const auto n = static_cast<std::size_t>(dense.rows());
  AdjacencyBuilder b(n);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    if (dense(i, i) != 0.0) throw ConfigError(fmt::format("nonzero diagonal at node {}", i));
    for (Eigen::Index j = i + 1; j < dense.cols(); ++j) {
      const double v = dense(i, j);
      if ((v != 0.0 && v != 1.0) || v != dense(j, i)) {
        throw ConfigError(fmt::format("entry ({}, {}) is not a symmetric binary value", i, j));
      }
      if (v == 1.0) b.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return std::move(b).finish();
}

void AdjacencyMatrix::build_lists() {
  offsets_.assign(n_ + 1, 0);
  adj_.clear();
  for (std::size_t i = 0; i < n_; ++i) {
    for_each_bit(row(i), [&](std::size_t j) { adj_.push_back(static_cast<std::uint32_t>(j)); });
    offsets_[i + 1] = adj_.size();
  }
}

std::vector<Edge> AdjacencyMatrix::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto j : neighbors(i)) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd AdjacencyMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto j : neighbors(i)) m(static_cast<Eigen::Index>(i), j) = 1.0;
  }
  return m;
}

void AdjacencyBuilder::add(std::size_t i, std::size_t j) noexcept {
  const auto w = a_.words_per_row_;
  a_.bits_[i * w + (j >> 6)] |= std::uint64_t{1} << (j & 63);
  a_.bits_[j * w + (i >> 6)] |= std::uint64_t{1} << (i & 63);
}

AdjacencyMatrix AdjacencyBuilder::finish() && {
  a_.build_lists();
  return std::move(a_);
}

}  // namespace rscore
