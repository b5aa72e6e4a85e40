#pragma once

#include <cstddef>
#include <utility>

#include <Eigen/Core>

namespace rscore {

/// Real symmetric n x n matrix, stored densely.
class DenseSymMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  DenseSymMatrix() = default;
  /// Throws ConfigError if `m` is not square or not symmetric to 1e-12.
  explicit DenseSymMatrix(Eigen::MatrixXd m);

  /// Fills entry (i, j), j >= i, from f(i, j) and mirrors it, so the result is
  /// exactly symmetric.
  template <class F>
  static DenseSymMatrix from_upper(std::size_t n, F&& f) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        const double v = f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        m(i, j) = v;
        m(j, i) = v;
      }
    }
    DenseSymMatrix out;
    out.m_ = std::move(m);
    return out;
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

  /// Spectral norm (largest absolute eigenvalue).
  double spectral_norm() const;

 private:
  Eigen::MatrixXd m_;
};

}  // namespace rscore
