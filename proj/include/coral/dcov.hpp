#pragma once

// Distance covariance / distance correlation over paired scalar samples.
//
// All routines are pure and allocate their own scratch space, so they can be
// called concurrently from any number of threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coral::dcov {

/// Dense row-major square matrix of doubles.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  /// Builds from nested rows; throws std::invalid_argument unless every row has
  /// exactly `rows.size()` entries.
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    SquareMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        throw std::invalid_argument("matrix is not square: row " + std::to_string(i) + " has " +
                                    std::to_string(rows[i].size()) + " entries, expected " +
                                    std::to_string(rows.size()));
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.n_));
    }
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Negative dCov^2 values above -kNegativeClamp are floating-point residue and read as 0.
inline constexpr double kNegativeClamp = 1e-12;

namespace detail {

inline void require_observations(std::span<const double> v, const char* what) {
  if (v.size() < 2) {
    throw std::invalid_argument(std::string(what) + ": need at least 2 observations, got " +
                                std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

inline void require_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("paired observations differ in length: " + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()));
  }
  require_observations(x, "x");
  require_observations(y, "y");
}

}  // namespace detail

/// a_ij = |v_i - v_j|.
inline SquareMatrix pairwise_distance_matrix(std::span<const double> v) {
  detail::require_observations(v, "pairwise_distance_matrix");
  const std::size_t n = v.size();
  SquareMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::abs(v[i] - v[j]);
      a(i, j) = d;
      a(j, i) = d;
    }
  }
  return a;
}

/// A_ij = a_ij - row_mean_i - col_mean_j + grand_mean.
inline SquareMatrix double_center(const SquareMatrix& a) {
  const std::size_t n = a.size();
  if (n < 2) {
    throw std::invalid_argument("double_center: need at least a 2x2 matrix");
  }
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_mean[i] += a(i, j);
      col_mean[j] += a(i, j);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    grand += row_mean[k];
    row_mean[k] /= static_cast<double>(n);
    col_mean[k] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);

  SquareMatrix centered(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      centered(i, j) = a(i, j) - row_mean[i] - col_mean[j] + grand;
    }
  }
  return centered;
}

namespace detail {

inline double centered_product_mean(const SquareMatrix& a, const SquareMatrix& b) {
  const std::size_t n = a.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sum += a(i, j) * b(i, j);
    }
  }
  const double v = sum / static_cast<double>(n * n);
  if (v < 0.0 && v > -kNegativeClamp) return 0.0;
  return v;
}

}  // namespace detail

/// Squared sample distance covariance, (1/n^2) sum_ij A_ij B_ij.
inline double distance_covariance_sq(std::span<const double> x, std::span<const double> y) {
  detail::require_paired(x, y);
  const auto a = double_center(pairwise_distance_matrix(x));
  const auto b = double_center(pairwise_distance_matrix(y));
  return std::max(0.0, detail::centered_product_mean(a, b));
}

/// Distance correlation in [0, 1].
///
/// dCor = dCov(x,y) / sqrt(dCov(x,x) dCov(y,y)) with dCov = sqrt(dCov^2). A
/// constant input has zero distance variance and yields 0.
inline double distance_correlation(std::span<const double> x, std::span<const double> y) {
  detail::require_paired(x, y);
  const auto a = double_center(pairwise_distance_matrix(x));
  const auto b = double_center(pairwise_distance_matrix(y));
  const double xy = std::max(0.0, detail::centered_product_mean(a, b));
  const double xx = std::max(0.0, detail::centered_product_mean(a, a));
  const double yy = std::max(0.0, detail::centered_product_mean(b, b));
  if (xx <= 0.0 || yy <= 0.0) return 0.0;
  const double r = std::sqrt(xy / std::sqrt(xx * yy));
  return std::clamp(r, 0.0, 1.0);
}

}  // namespace coral::dcov
