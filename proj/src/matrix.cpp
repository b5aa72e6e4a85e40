#include "rscore/matrix.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rscore/errors.hpp"
#include "rscore/spectral.hpp"

namespace rscore {

DenseSymMatrix::DenseSymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw ConfigError(fmt::format("matrix is {}x{}, expected square", m_.rows(), m_.cols()));
  }
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (std::abs(m_(i, j) - m_(j, i)) > kSymmetryTolerance) {
        throw ConfigError(fmt::format("matrix not symmetric at ({}, {}): {} vs {}", i, j, m_(i, j), m_(j, i)));
      }
    }
  }
}

double DenseSymMatrix::spectral_norm() const {
  if (m_.size() == 0) return 0.0;
  return std::abs(top_k_eigenpairs(*this, 1).values(0));
}

}  // namespace rscore
