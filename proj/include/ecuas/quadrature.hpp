#pragma once

// Numerical evaluation of the weighted-integral scoring rule
//   C*_w = int_0^{u_M} w(gamma) C*_gamma dgamma
//        = int_0^u gamma w(gamma) dgamma + C int_u^{u_M} w(gamma) dgamma,
// used as an oracle for the closed forms in costs.hpp and for weights that
// have no closed form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "ecuas/cost_matrix.hpp"
#include "ecuas/error.hpp"
#include "ecuas/summation.hpp"
#include "ecuas/weight.hpp"

namespace ecuas {

struct QuadratureConfig {
  /// Simpson panels per smooth segment. Power-law segments are integrated
  /// in log(gamma), where this is the panel count per unit of
  /// (exponent x log-length).
  int subdivisions = 200;
  double tolerance = 1e-9;

  void validate() const {
    if (subdivisions < 2) throw ValidationError("quadrature needs at least 2 subdivisions");
    if (!(tolerance > 0.0)) throw ValidationError("quadrature tolerance must be > 0");
  }
};

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
  if (b <= a) return 0.0;
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  CompensatedSum s;
  s += f(a);
  s += f(b);
  for (std::size_t i = 1; i < panels; ++i) {
    const double x = a + h * static_cast<double>(i);
    s += (i % 2 == 1 ? 4.0 : 2.0) * f(x);
  }
  return s.value() * h / 3.0;
}

// Integral over log(gamma) in [s_lo, s_hi] of scale * exp(rate * s). The
// lower end is cut where the remaining mass is below e^-40 of the total.
inline double log_domain_power(double scale, double rate, double s_lo, double s_hi, int per_unit) {
  constexpr double kTailCut = 40.0;
  if (rate > 0.0) s_lo = std::max(s_lo, s_hi - kTailCut / rate);
  if (!(s_hi > s_lo)) return 0.0;
  const double spread = std::max(rate * (s_hi - s_lo), 1.0);
  const auto panels = static_cast<std::size_t>(std::ceil(per_unit * spread));
  return simpson([&](double s) { return scale * std::exp(rate * s); }, s_lo, s_hi, panels);
}

}  // namespace detail

/// C*_w from the candidate's cost and uncertainty.
inline double integrate_weighted_cost(double candidate_cost, double u, const WeightFamily& w, double u_max,
                                      const QuadratureConfig& cfg = {}) {
  cfg.validate();
  if (!(u >= 0.0) || u > u_max * (1.0 + 1e-12)) {
    throw ValidationError("uncertainty outside [0, u_M]");
  }
  u = std::min(u, u_max);

  if (const auto* dirac = std::get_if<DiracAt>(&w)) {
    if (dirac->gamma0 > u_max) throw ValidationError("dirac weight must sit inside [0, u_M]");
    return u <= dirac->gamma0 ? candidate_cost : dirac->gamma0;
  }

  if (const auto* table = std::get_if<Tabulated>(&w)) {
    std::vector<double> cuts{0.0, u, u_max};
    for (double g : table->gamma) {
      if (g > 0.0 && g < u_max) cuts.push_back(g);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    CompensatedSum total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      const bool rejected = b <= u;
      auto f = [&](double g) { return (rejected ? g : candidate_cost) * (*table)(g); };
      total += detail::simpson(f, a, b, static_cast<std::size_t>(cfg.subdivisions));
    }
    return total.value();
  }

  const double n = std::get<PowerLaw>(w).n;
  const double alpha = std::get<PowerLaw>(w).alpha(u_max);
  const double log_u = u > 0.0 ? std::log(u) : -std::numeric_limits<double>::infinity();
  const double log_top = std::log(u_max);

  // gamma w(gamma) = alpha gamma^n on [0, u]; constant when n = 0.
  double rejected_part = 0.0;
  if (u > 0.0) {
    rejected_part = n == 0.0 ? alpha * u
                             : detail::log_domain_power(alpha, n + 1.0, -std::numeric_limits<double>::infinity(),
                                                        log_u, cfg.subdivisions);
  }

  // w(gamma) = alpha gamma^(n-1) on [u, u_M].
  double accepted_part = 0.0;
  if (candidate_cost != 0.0 && u < u_max) {
    if (u == 0.0 && n == 0.0) return std::numeric_limits<double>::infinity();
    accepted_part = candidate_cost * detail::log_domain_power(alpha, n, log_u, log_top, cfg.subdivisions);
  }
  return rejected_part + accepted_part;
}

/// C*_w for class y and an externally supplied (candidate, u).
inline double c_w_numeric(std::size_t y, std::size_t candidate, double u, const WeightFamily& w,
                          const CostMatrix& c, const QuadratureConfig& cfg = {}) {
  return integrate_weighted_cost(c.at(y, candidate), u, w, c.u_max(), cfg);
}

/// Lower bound on u_M from a simplex lattice with spacing `resolution`.
/// Exponential in K, so limited to K <= 4.
inline double u_max_grid(const CostMatrix& c, double resolution) {
  if (!c.has_matrix()) throw ValidationError("grid search needs an explicit cost matrix");
  const std::size_t k = c.classes();
  if (k > 4) throw ValidationError("grid search over the simplex is limited to K <= 4");
  if (!(resolution > 0.0 && resolution <= 1.0)) throw ValidationError("resolution must be in (0, 1]");
  const auto steps = static_cast<long long>(std::llround(1.0 / resolution));
  const std::size_t m = c.decisions();
  const auto& e = c.entries();
  const double inv = 1.0 / static_cast<double>(steps);

  double best = 0.0;
  // levels[d] holds the column sums contributed by classes 0..d-1.
  std::vector<std::vector<double>> levels(k, std::vector<double>(m, 0.0));
  // Recursive walk over integer compositions of `steps` into K parts.
  std::function<void(std::size_t, long long)> walk = [&](std::size_t cls, long long remaining) {
    const auto& base = levels[cls];
    if (cls + 1 == k) {
      const double q = static_cast<double>(remaining) * inv;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) lo = std::min(lo, base[j] + q * e[cls][j]);
      best = std::max(best, lo);
      return;
    }
    auto& next = levels[cls + 1];
    for (long long i = 0; i <= remaining; ++i) {
      const double q = static_cast<double>(i) * inv;
      for (std::size_t j = 0; j < m; ++j) next[j] = base[j] + q * e[cls][j];
      walk(cls + 1, remaining - i);
    }
  };
  walk(0, steps);
  return best;
}

}  // namespace ecuas
