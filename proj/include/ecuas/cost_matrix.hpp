#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ecuas/error.hpp"

namespace ecuas {

enum class CostKind { ZeroOne, GeneralizedZeroOne, GeneralizedZeroOneInfinite, Custom };

namespace detail {

// max t  s.t.  t <= sum_k q_k c[k][j] for every column j,  sum_k q_k <= 1,  q, t >= 0.
// With non-negative costs the simplex constraint is tight at any positive
// optimum, so this is the maximum over the simplex of min_j q . c[:, j].
// Dense tableau simplex with Bland's rule; the origin is feasible.
inline double max_min_column_cost(const std::vector<std::vector<double>>& c) {
  const std::size_t k = c.size();
  const std::size_t m_dec = c.front().size();
  const std::size_t rows = m_dec + 1;
  const std::size_t vars = k + 1;  // q_0..q_{K-1}, t
  const std::size_t cols = vars + rows + 1;
  constexpr double eps = 1e-13;

  std::vector<std::vector<double>> tab(rows + 1, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t j = 0; j < m_dec; ++j) {
    for (std::size_t r = 0; r < k; ++r) tab[j][r] = -c[r][j];
    tab[j][k] = 1.0;
    tab[j][vars + j] = 1.0;
    basis[j] = vars + j;
  }
  for (std::size_t r = 0; r < k; ++r) tab[m_dec][r] = 1.0;
  tab[m_dec][vars + m_dec] = 1.0;
  tab[m_dec][cols - 1] = 1.0;
  basis[m_dec] = vars + m_dec;
  tab[rows][k] = -1.0;  // objective row holds -t

  for (std::size_t iter = 0; iter < 10000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t col = 0; col + 1 < cols; ++col) {
      if (tab[rows][col] < -eps) {
        enter = col;
        break;
      }
    }
    if (enter == cols) return std::max(0.0, tab[rows][cols - 1]);

    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      if (tab[r][enter] > eps) best_ratio = std::min(best_ratio, tab[r][cols - 1] / tab[r][enter]);
    }
    std::size_t leave = rows;
    for (std::size_t r = 0; r < rows; ++r) {
      if (tab[r][enter] > eps && tab[r][cols - 1] / tab[r][enter] <= best_ratio + eps &&
          (leave == rows || basis[r] < basis[leave])) {
        leave = r;
      }
    }
    if (leave == rows) break;  // unbounded cannot happen for a valid matrix

    const double pivot = tab[leave][enter];
    for (double& v : tab[leave]) v /= pivot;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double f = tab[r][enter];
      if (f == 0.0) continue;
      for (std::size_t col = 0; col < cols; ++col) tab[r][col] -= f * tab[leave][col];
    }
    basis[leave] = enter;
  }
  throw NumericError("u_max linear program did not converge");
}

}  // namespace detail

/// Candidate-answer cost over K classes (rows) and M candidate decisions
/// (columns). The generalized 0-1 cost with K -> infinity carries no
/// explicit matrix; it only scores confidence records.
class CostMatrix {
 public:
  static CostMatrix zero_one(std::size_t k) {
    return CostMatrix(CostKind::ZeroOne, identity_complement(k), k);
  }

  static CostMatrix generalized_zero_one(std::size_t k) {
    return CostMatrix(CostKind::GeneralizedZeroOne, identity_complement(k), k);
  }

  static CostMatrix generalized_zero_one_infinite() {
    return CostMatrix(CostKind::GeneralizedZeroOneInfinite, {}, 0);
  }

  /// `entries[k][j]` is the cost of decision j when the class is k.
  static CostMatrix custom(std::vector<std::vector<double>> entries) {
    const std::size_t k = entries.size();
    return CostMatrix(CostKind::Custom, std::move(entries), k);
  }

  CostKind kind() const noexcept { return kind_; }

  /// Number of classes; 0 for the infinite generalized 0-1 cost.
  std::size_t classes() const noexcept { return classes_; }
  std::size_t decisions() const noexcept { return entries_.empty() ? 0 : entries_.front().size(); }
  bool has_matrix() const noexcept { return !entries_.empty(); }

  /// True for the kinds that score correct/incorrect confidence records.
  bool is_zero_one_family() const noexcept { return kind_ != CostKind::Custom; }

  double at(std::size_t k, std::size_t j) const {
    if (k >= classes_ || j >= decisions()) {
      throw ValidationError("cost matrix index (" + std::to_string(k) + ", " + std::to_string(j) +
                            ") out of range");
    }
    return entries_[k][j];
  }

  const std::vector<std::vector<double>>& entries() const noexcept { return entries_; }

  /// Largest achievable uncertainty over the simplex, computed at construction.
  double u_max() const noexcept { return u_max_; }

 private:
  CostMatrix(CostKind kind, std::vector<std::vector<double>> entries, std::size_t classes)
      : kind_(kind), entries_(std::move(entries)), classes_(classes) {
    if (kind_ == CostKind::GeneralizedZeroOneInfinite) {
      u_max_ = 1.0;
      return;
    }
    if (classes_ < 2) throw ValidationError("cost matrix needs at least 2 classes");
    const std::size_t m = entries_.front().size();
    if (m == 0) throw ValidationError("cost matrix needs at least one decision");
    for (const auto& row : entries_) {
      if (row.size() != m) throw ValidationError("cost matrix rows differ in length");
      for (double v : row) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("cost matrix entries must be finite and non-negative");
        }
      }
    }
    if (kind_ == CostKind::Custom) {
      u_max_ = detail::max_min_column_cost(entries_);
    } else {
      u_max_ = 1.0 - 1.0 / static_cast<double>(classes_);
    }
  }

  static std::vector<std::vector<double>> identity_complement(std::size_t k) {
    if (k < 2) throw ValidationError("0-1 cost needs K >= 2");
    std::vector<std::vector<double>> e(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i) e[i][i] = 0.0;
    return e;
  }

  CostKind kind_;
  std::vector<std::vector<double>> entries_;
  std::size_t classes_ = 0;
  double u_max_ = 0.0;
};

/// u_M: 1 - 1/K for the 0-1 kinds, 1 for K -> infinity, the linear
/// program optimum for custom matrices.
inline double u_max(const CostMatrix& c) noexcept { return c.u_max(); }

}  // namespace ecuas
