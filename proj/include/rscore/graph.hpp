#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rscore/matrix.hpp"

namespace rscore {

using Edge = std::pair<std::size_t, std::size_t>;

/// Fixed-size bitset over node indices.
class NodeMask {
 public:
  NodeMask() = default;
  explicit NodeMask(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}
  NodeMask(std::size_t n, std::span<const std::size_t> nodes);

  std::size_t size() const noexcept { return n_; }
  bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  std::size_t count() const noexcept;
  std::vector<std::size_t> indices() const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// |a & b|
inline std::size_t popcount_and(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept {
  std::size_t c = 0;
  for (std::size_t w = 0; w < a.size(); ++w) c += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
  return c;
}

/// |a & b & c|
inline std::size_t popcount_and(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                std::span<const std::uint64_t> c) noexcept {
  std::size_t r = 0;
  for (std::size_t w = 0; w < a.size(); ++w) r += static_cast<std::size_t>(std::popcount(a[w] & b[w] & c[w]));
  return r;
}

/// Calls f(i) for every set bit of `words`, in increasing order.
template <class F>
void for_each_bit(std::span<const std::uint64_t> words, F&& f) {
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits != 0) {
      const int b = std::countr_zero(bits);
      f(w * 64 + static_cast<std::size_t>(b));
      bits &= bits - 1;
    }
  }
}

/// Binary symmetric hollow adjacency matrix.
///
/// Keeps two synchronized views: one bitset row per node (O(1) lookup,
/// word-parallel intersections) and sorted neighbor lists.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n);

  /// Throws ConfigError on self-loops or out-of-range endpoints. Duplicate
  /// edges (in either orientation) are merged.
  static AdjacencyMatrix from_edges(std::size_t n, std::span<const Edge> edges);
  /// Entries must be exactly 0 or 1, symmetric, with zero diagonal.
  static AdjacencyMatrix from_dense(const Eigen::MatrixXd& dense);

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t i, std::size_t j) const noexcept {
    return (bits_[i * words_per_row_ + (j >> 6)] >> (j & 63)) & 1U;
  }

  std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  std::size_t degree(std::size_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  std::size_t edge_count() const noexcept { return adj_.size() / 2; }

  std::span<const std::uint64_t> row(std::size_t i) const noexcept {
    return {bits_.data() + i * words_per_row_, words_per_row_};
  }
  std::size_t words_per_row() const noexcept { return words_per_row_; }

  /// Edges (i, j) with i < j in lexicographic order.
  std::vector<Edge> edges() const;
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  void build_lists();

  std::size_t n_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> adj_;

  friend class AdjacencyBuilder;
};

/// Incremental construction used by samplers.
class AdjacencyBuilder {
 public:
  explicit AdjacencyBuilder(std::size_t n) : a_(n) {}
  void add(std::size_t i, std::size_t j) noexcept;
  AdjacencyMatrix finish() &&;

 private:
  AdjacencyMatrix a_;
};

}  // namespace rscore
