#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "ecuas/error.hpp"

namespace ecuas {

/// w_n(gamma) = alpha_n gamma^(n-1), alpha_n = (n+1) u_M^-(n+1).
struct PowerLaw {
  double n = 0.0;

  explicit PowerLaw(double exponent) : n(exponent) {
    if (!std::isfinite(n) || n < 0.0) throw ValidationError("power-law weight needs n >= 0");
  }

  double alpha(double u_max) const { return (n + 1.0) * std::pow(u_max, -(n + 1.0)); }
};

/// Unit point mass at gamma0.
struct DiracAt {
  double gamma0 = 0.0;

  explicit DiracAt(double g) : gamma0(g) {
    if (!std::isfinite(gamma0) || gamma0 < 0.0) throw ValidationError("dirac weight needs gamma0 >= 0");
  }
};

/// Piecewise-linear weight through (gamma_i, w_i), zero outside the grid.
struct Tabulated {
  std::vector<double> gamma;
  std::vector<double> weight;

  Tabulated(std::vector<double> g, std::vector<double> w) : gamma(std::move(g)), weight(std::move(w)) {
    if (gamma.size() != weight.size() || gamma.size() < 2) {
      throw ValidationError("tabulated weight needs at least two (gamma, w) pairs");
    }
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      if (!std::isfinite(gamma[i]) || !std::isfinite(weight[i]) || weight[i] < 0.0) {
        throw ValidationError("tabulated weight values must be finite and non-negative");
      }
      if (i > 0 && !(gamma[i] > gamma[i - 1])) {
        throw ValidationError("tabulated gamma grid must be strictly increasing");
      }
    }
    if (gamma.front() < 0.0) throw ValidationError("tabulated gamma grid must start at >= 0");
  }

  double operator()(double g) const {
    if (g < gamma.front() || g > gamma.back()) return 0.0;
    std::size_t hi = 1;
    while (hi + 1 < gamma.size() && gamma[hi] < g) ++hi;
    const double t = (g - gamma[hi - 1]) / (gamma[hi] - gamma[hi - 1]);
    return weight[hi - 1] + t * (weight[hi] - weight[hi - 1]);
  }
};

using WeightFamily = std::variant<PowerLaw, DiracAt, Tabulated>;

}  // namespace ecuas
