#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ecuas/baselines.hpp"
#include "ecuas/calibration.hpp"
#include "ecuas/costs.hpp"
#include "ecuas/data_io.hpp"
#include "ecuas/random.hpp"
#include "ecuas/summation.hpp"
#include "ecuas/weight.hpp"

namespace ecuas {

/// C*_n against the confidence for correct and wrong candidates, on an
/// evenly spaced grid over [1/K, 1 - eps_q]. An empty `k` means K -> infinity.
inline Table cost_curve(double n, std::optional<std::size_t> k, std::size_t grid_size,
                        const CostOptions& opts = {}) {
  detail::check_exponent(n);
  if (k && *k < 2) throw ValidationError("cost curve needs K >= 2");
  if (grid_size < 2) throw ValidationError("cost curve needs at least 2 grid points");
  const double lo = k ? 1.0 / static_cast<double>(*k) : 0.0;
  const double hi = 1.0 - opts.eps_q;
  Table t;
  t.columns = {"q_e", "cost_correct", "cost_wrong"};
  t.config = {{"n", format_double(n)}, {"K", k ? std::to_string(*k) : "inf"},
              {"grid_size", std::to_string(grid_size)}, {"eps_q", format_double(opts.eps_q)}};
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double q_e =
        i + 1 == grid_size ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const double correct = k ? c_n01(true, q_e, n, *k, opts) : c_n01g(true, q_e, n, opts);
    const double wrong = k ? c_n01(false, q_e, n, *k, opts) : c_n01g(false, q_e, n, opts);
    t.rows.push_back({q_e, correct, wrong});
  }
  return t;
}

/// 13 log-spaced temperatures from 0.25 to 8.
inline std::vector<double> default_temperature_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 13; ++i) grid.push_back(0.25 * std::exp2(5.0 * i / 12.0));
  return grid;
}

namespace detail {

// Inverse CDF over classes in ascending index order.
inline std::size_t sample_class(const CategoricalDistribution& q, double u01) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] > 0.0) last_positive = k;
    cum += q[k];
    if (u01 < cum) return k;
  }
  return last_positive;
}

}  // namespace detail

/// Candidates sampled from softmax(log(q) / t) and scored with the
/// original calibrated probability of the sampled class as confidence.
/// Rows are (t, n, ECUAS_n, Monte-Carlo standard error).
inline Table temperature_experiment(const Dataset& calibrated, std::span<const double> t_grid,
                                    std::span<const double> n_list, std::uint64_t seed,
                                    const CostOptions& opts = {}, Diagnostics* diag = nullptr) {
  if (calibrated.kind != RecordKind::FullPosterior) {
    throw ValidationError("temperature experiment needs full-posterior data");
  }
  if (calibrated.records.empty()) throw ValidationError("temperature experiment needs data");
  if (t_grid.empty() || n_list.empty()) throw ValidationError("temperature experiment needs t and n values");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw ValidationError("temperatures must be > 0");
  }
  for (double n : n_list) detail::check_exponent(n);

  Table table;
  table.columns = {"t", "n", "ecuas", "std_error"};
  table.config = {{"seed", std::to_string(seed)}, {"samples", std::to_string(calibrated.records.size())},
                  {"K", std::to_string(calibrated.classes)}};
  const std::size_t k = calibrated.classes;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    std::mt19937_64 rng(derive_seed(seed, ti));
    std::vector<UARecord> sampled;
    sampled.reserve(calibrated.records.size());
    for (const auto& r : calibrated.records) {
      const auto& full = std::get<FullPosteriorRecord>(r);
      const auto tempered = temperature_transform(full.q, t_grid[ti]);
      const std::size_t cand = detail::sample_class(tempered, uniform01(rng));
      sampled.emplace_back(ConfidenceRecord{cand == full.label, full.q[cand]});
    }
    const auto cost = CostMatrix::zero_one(k);
    for (double n : n_list) {
      const auto costs = record_costs(sampled, n, cost, opts, diag);
      const auto count = static_cast<double>(costs.size());
      const double mean = compensated_sum(costs) / count;
      CompensatedSum sq;
      for (double c : costs) sq += (c - mean) * (c - mean);
      const double sd = costs.size() > 1 ? std::sqrt(sq.value() / (count - 1.0)) : 0.0;
      table.rows.push_back({t_grid[ti], n, mean, sd / std::sqrt(count)});
    }
  }
  return table;
}

/// Expected C_gamma at the Bayes threshold (accept iff u <= gamma) per gamma.
inline Table gamma_sweep(std::span<const UARecord> records, const CostMatrix& c, std::span<const double> gamma_grid) {
  if (gamma_grid.empty()) throw ValidationError("gamma sweep needs a non-empty grid");
  Table t;
  t.columns = {"gamma", "expected_cost"};
  for (double g : gamma_grid) t.rows.push_back({g, expected_cost_fixed_gamma(records, c, g, g)});
  return t;
}

/// Evenly spaced gammas on [0, u_max] with the given step (u_max included).
inline std::vector<double> gamma_grid(double u_max, double step) {
  if (!(step > 0.0)) throw ValidationError("gamma step must be > 0");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::ceil(u_max / step - 1e-9));
  for (std::size_t i = 0; i < count; ++i) grid.push_back(step * static_cast<double>(i));
  grid.push_back(u_max);
  return grid;
}

/// Trapezoid rule for int w_n(gamma) E[C_gamma] dgamma over a sweep table.
/// The integrand at gamma = 0 is taken as its limit: 0 for n > 0, the
/// value at the next grid point for n = 0 (where w_0 E[C_gamma] tends to
/// alpha_0 times the rejected fraction).
inline double sweep_weighted_integral(const Table& sweep, double n, double u_max) {
  if (sweep.rows.size() < 2) throw ValidationError("sweep integral needs at least two points");
  const PowerLaw w(n);
  const double alpha = w.alpha(u_max);
  std::vector<double> f(sweep.rows.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double g = sweep.rows[i][0];
    f[i] = g > 0.0 ? alpha * std::pow(g, n - 1.0) * sweep.rows[i][1] : 0.0;
  }
  if (sweep.rows[0][0] == 0.0 && n == 0.0) f[0] = f[1];
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    s += 0.5 * (f[i] + f[i + 1]) * (sweep.rows[i + 1][0] - sweep.rows[i][0]);
  }
  return s.value();
}

}  // namespace ecuas
