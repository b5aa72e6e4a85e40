#include <cstdint>

#include <fmt/format.h>

#include "rscore/errors.hpp"
#include "rscore/refit.hpp"

namespace rscore {
namespace {

void check_anchor(std::size_t n, std::size_t i, const NodeMask& s) {
  if (s.size() != n) throw ConfigError(fmt::format("node set sized {} for a graph of {} nodes", s.size(), n));
  if (i >= n) throw ConfigError(fmt::format("anchor {} outside graph of {} nodes", i, n));
  if (s.test(i)) throw ConfigError(fmt::format("node set must not contain the anchor {}", i));
}

void check_order(int m) {
  if (m < 3 || m % 2 == 0) throw ConfigError(fmt::format("cycle order must be odd and >= 3, got {}", m));
}

// Counts index tuples (j_1, ..., j_{m-1}), distinct and in S, such that the
// closed walk i -> j_1 -> ... -> j_{m-1} -> i has A = want(s) on step s.
// Numerator: want(s) = s odd. Denominator: want(s) = s even.
class AlternatingCounter {
 public:
  AlternatingCounter(const AdjacencyMatrix& a, std::size_t anchor, const NodeMask& s, int m, bool numerator)
      : a_(a), anchor_(anchor), s_(s), m_(m), numerator_(numerator), words_(a.words_per_row()),
        chosen_(a.size()), y_(a.size(), 0), prefix_() {
    // q = j_{m-1} must satisfy A(q, i) = want(m); collect those in G.
    g_.assign(words_, 0);
    const bool gamma = want(m_);
    const auto row_i = a_.row(anchor_);
    const auto sw = s_.words();
    for (std::size_t w = 0; w < words_; ++w) g_[w] = sw[w] & (gamma ? row_i[w] : ~row_i[w]);
    g_count_ = 0;
    for (const auto w : g_) g_count_ += static_cast<std::size_t>(std::popcount(w));

    // y(p) = #{q in G, q != p : A(p, q) = want(m - 1)}
    const bool beta = want(m_ - 1);
    for_each_bit(sw, [&](std::size_t p) {
      const std::size_t adj = popcount_and(a_.row(p), g_);
      const std::size_t val = beta ? adj : g_count_ - (test(g_, p) ? 1 : 0) - adj;
      y_[p] = val;
      y_sum_ += val;
    });
  }

  std::uint64_t count() {
    prefix_.clear();
    return extend(anchor_);
  }

 private:
  bool want(int step) const noexcept { return numerator_ ? (step % 2 == 1) : (step % 2 == 0); }
  static bool test(const std::vector<std::uint64_t>& bits, std::size_t i) noexcept {
    return (bits[i >> 6] >> (i & 63)) & 1U;
  }

  // Candidate mask for the node following `prev` on step `step`.
  std::vector<std::uint64_t> candidates(std::size_t prev, int step) const {
    std::vector<std::uint64_t> out(words_);
    const auto row = a_.row(prev);
    const auto sw = s_.words();
    const auto cw = chosen_.words();
    const bool edge = want(step);
    for (std::size_t w = 0; w < words_; ++w) out[w] = sw[w] & ~cw[w] & (edge ? row[w] : ~row[w]);
    return out;
  }

  std::uint64_t extend(std::size_t prev) {
    const auto depth = static_cast<int>(prefix_.size());
    if (depth == m_ - 3) return last_pair(prev);
    const auto cand = candidates(prev, depth + 1);
    std::uint64_t total = 0;
    for_each_bit(std::span<const std::uint64_t>(cand), [&](std::size_t j) {
      chosen_.set(j);
      prefix_.push_back(j);
      total += extend(j);
      prefix_.pop_back();
      chosen_.reset(j);
    });
    return total;
  }

  // Number of (p, q) with A(prev, p) = want(m-2), A(p, q) = want(m-1),
  // A(q, i) = want(m), p != q, both in S and outside the prefix.
  std::uint64_t last_pair(std::size_t prev) {
    const bool alpha = want(m_ - 2);
    const bool beta = want(m_ - 1);
    const auto pmask = candidates(prev, m_ - 2);
    std::size_t p_count = 0;
    for (const auto w : pmask) p_count += static_cast<std::size_t>(std::popcount(w));

    std::int64_t sum_y = 0;
    if (alpha) {
      for_each_bit(std::span<const std::uint64_t>(pmask), [&](std::size_t p) { sum_y += static_cast<std::int64_t>(y_[p]); });
    } else {
      // P is most of S; subtract its complement instead.
      sum_y = static_cast<std::int64_t>(y_sum_);
      const auto sw = s_.words();
      std::vector<std::uint64_t> rest(words_);
      for (std::size_t w = 0; w < words_; ++w) rest[w] = sw[w] & ~pmask[w];
      for_each_bit(std::span<const std::uint64_t>(rest), [&](std::size_t p) { sum_y -= static_cast<std::int64_t>(y_[p]); });
    }
    // q may not coincide with a prefix node.
    for (const std::size_t c : prefix_) {
      if (!test(g_, c)) continue;
      const std::size_t adj = popcount_and(pmask, a_.row(c));
      sum_y -= static_cast<std::int64_t>(beta ? adj : p_count - adj);
    }
    return static_cast<std::uint64_t>(sum_y);
  }

  const AdjacencyMatrix& a_;
  std::size_t anchor_;
  const NodeMask& s_;
  int m_;
  bool numerator_;
  std::size_t words_;
  NodeMask chosen_;
  std::vector<std::uint64_t> g_;
  std::size_t g_count_ = 0;
  std::vector<std::size_t> y_;
  std::size_t y_sum_ = 0;
  std::vector<std::size_t> prefix_;
};

// Ordered-tuple enumeration with real weights.
class WeightedWalker {
 public:
  WeightedWalker(const DenseSymMatrix& w, std::size_t anchor, std::span<const std::size_t> s, int m)
      : w_(w), anchor_(anchor), s_(s), m_(m), used_(s.size(), false) {}

  CycleCounts run() {
    walk(0, anchor_, 1.0, 1.0);
    return CycleCounts{phi1_, phi2_};
  }

 private:
  // Step s (1-based) uses the edge factor on odd steps for the numerator
  // and the complement factor on odd steps for the denominator.
  void walk(int depth, std::size_t prev, double num, double den) {
    if (depth == m_ - 1) {
      const double close = w_(prev, anchor_);
      phi1_ += num * close;
      phi2_ += den * (1.0 - close);
      return;
    }
    const int step = depth + 1;
    for (std::size_t t = 0; t < s_.size(); ++t) {
      if (used_[t]) continue;
      const double e = w_(prev, s_[t]);
      used_[t] = true;
      if (step % 2 == 1) {
        walk(depth + 1, s_[t], num * e, den * (1.0 - e));
      } else {
        walk(depth + 1, s_[t], num * (1.0 - e), den * e);
      }
      used_[t] = false;
    }
  }

  const DenseSymMatrix& w_;
  std::size_t anchor_;
  std::span<const std::size_t> s_;
  int m_;
  std::vector<bool> used_;
  double phi1_ = 0.0;
  double phi2_ = 0.0;
};

}  // namespace

CycleCounts cycle_counts_m3(const AdjacencyMatrix& a, std::size_t i, const NodeMask& s) {
  check_anchor(a.size(), i, s);
  const std::size_t words = a.words_per_row();
  const auto row_i = a.row(i);
  const auto sw = s.words();
  std::vector<std::uint64_t> nbr(words);
  for (std::size_t w = 0; w < words; ++w) nbr[w] = row_i[w] & sw[w];

  std::size_t d = 0;
  std::size_t t = 0;
  std::size_t nbr_deg = 0;
  for_each_bit(std::span<const std::uint64_t>(nbr), [&](std::size_t j) {
    ++d;
    t += popcount_and(a.row(j), nbr);
    nbr_deg += popcount_and(a.row(j), sw);
  });
  std::size_t twice_edges = 0;
  for_each_bit(sw, [&](std::size_t j) { twice_edges += popcount_and(a.row(j), sw); });

  const double dd = static_cast<double>(d);
  return CycleCounts{
      dd * (dd - 1.0) - static_cast<double>(t),
      static_cast<double>(twice_edges) - 2.0 * static_cast<double>(nbr_deg) + static_cast<double>(t),
  };
}

CycleCounts cycle_counts(const AdjacencyMatrix& a, std::size_t i, const NodeMask& s, int m) {
  check_order(m);
  check_anchor(a.size(), i, s);
  AlternatingCounter num(a, i, s, m, true);
  AlternatingCounter den(a, i, s, m, false);
  return CycleCounts{static_cast<double>(num.count()), static_cast<double>(den.count())};
}

CycleCounts cycle_counts(const DenseSymMatrix& probs, std::size_t i, std::span<const std::size_t> s, int m) {
  check_order(m);
  if (i >= probs.dim()) throw ConfigError(fmt::format("anchor {} outside matrix of dimension {}", i, probs.dim()));
  for (const auto j : s) {
    if (j == i) throw ConfigError(fmt::format("node set must not contain the anchor {}", i));
    if (j >= probs.dim()) throw ConfigError(fmt::format("node {} outside matrix of dimension {}", j, probs.dim()));
  }
  if (m > 3) return WeightedWalker(probs, i, s, m).run();

  CycleCounts c;
  for (std::size_t x = 0; x < s.size(); ++x) {
    const double wi_j = probs(i, s[x]);
    for (std::size_t y = 0; y < s.size(); ++y) {
      if (x == y) continue;
      const double wjk = probs(s[x], s[y]);
      const double wki = probs(s[y], i);
      c.phi1 += wi_j * (1.0 - wjk) * wki;
      c.phi2 += (1.0 - wi_j) * wjk * (1.0 - wki);
    }
  }
  return c;
}

}  // namespace rscore
