#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ecuas/cost_matrix.hpp"
#include "ecuas/diagnostics.hpp"
#include "ecuas/distribution.hpp"
#include "ecuas/error.hpp"
#include "ecuas/summation.hpp"

namespace ecuas {

/// Sample with a full posterior over K classes.
struct FullPosteriorRecord {
  std::size_t label = 0;
  CategoricalDistribution q;
};

/// Sample reduced to candidate correctness and the confidence q_e.
struct ConfidenceRecord {
  bool correct = false;
  double confidence = 0.0;
};

using UARecord = std::variant<FullPosteriorRecord, ConfidenceRecord>;

struct BayesOutcome {
  std::size_t candidate = 0;
  double uncertainty = 0.0;
};

/// Final decision under a rejection cost: a candidate index or reject.
struct Decision {
  std::optional<std::size_t> candidate;

  bool rejected() const noexcept { return !candidate.has_value(); }
};

namespace detail {

inline void require_matrix_for(const CategoricalDistribution& q, const CostMatrix& c) {
  if (!c.has_matrix()) {
    throw ValidationError("full posteriors need a cost with an explicit matrix (finite K)");
  }
  if (q.size() != c.classes()) {
    throw ValidationError("posterior has " + std::to_string(q.size()) + " classes, cost matrix has " +
                          std::to_string(c.classes()));
  }
}

inline void check_exponent(double n) {
  if (!std::isfinite(n) || n < 0.0) throw ValidationError("n must be finite and >= 0");
}

// Closed-form weighted integral of the fixed-gamma cost for w_n, written in
// terms of r = u / u_M so that large n neither overflows alpha_n nor loses
// precision:
//   n > 0:  r^(n+1) + (n+1)/(n u_M) (1 - r^n) C
//   n = 0:  r - log(r) C / u_M
inline double integrated_reject_cost(double candidate_cost, double u, double u_max, double n,
                                     const CostOptions& opts, Diagnostics* diag) {
  check_exponent(n);
  if (!(u >= 0.0)) throw ValidationError("uncertainty must be >= 0");
  if (u >= u_max) {
    // Boundary value. Anything above u_M is a suboptimal black-box output.
    if (u > u_max * (1.0 + 1e-12) && diag) diag->note_u_above_max();
    return 1.0;
  }
  const double r = u / u_max;
  if (n == 0.0) {
    if (candidate_cost == 0.0) return r;
    double u_log = u;
    if (u_log < opts.eps_u) {
      u_log = opts.eps_u;
      if (diag) diag->note_uncertainty_floor_clamp();
    }
    return r + candidate_cost * (std::log(u_max) - std::log(u_log)) / u_max;
  }
  const double head = std::pow(r, n + 1.0);
  if (candidate_cost == 0.0) return head;
  const double tail_mass = -std::expm1(n * std::log(r));  // 1 - r^n
  return head + candidate_cost * (n + 1.0) / (n * u_max) * tail_mass;
}

inline double clamp_confidence_upper(double q_e, const CostOptions& opts, Diagnostics* diag) {
  if (q_e > 1.0 - opts.eps_q) {
    if (diag) diag->note_confidence_upper_clamp();
    return 1.0 - opts.eps_q;
  }
  return q_e;
}

inline void check_confidence(double q_e) {
  if (!(q_e >= 0.0 && q_e <= 1.0)) throw ValidationError("confidence must lie in [0, 1]");
}

}  // namespace detail

/// Bayes candidate for the candidate cost and its expected cost (the
/// uncertainty). Ties go to the lowest decision index.
inline BayesOutcome bayes_candidate(const CategoricalDistribution& q, const CostMatrix& c) {
  detail::require_matrix_for(q, c);
  BayesOutcome best{0, 0.0};
  for (std::size_t j = 0; j < c.decisions(); ++j) {
    CompensatedSum expected;
    for (std::size_t k = 0; k < q.size(); ++k) expected += q[k] * c.entries()[k][j];
    const double v = expected.value();
    if (j == 0 || v < best.uncertainty) best = {j, v};
  }
  return best;
}

/// Accept the Bayes candidate iff its uncertainty is <= gamma.
inline Decision bayes_decision(const CategoricalDistribution& q, const CostMatrix& c, double gamma) {
  if (!(gamma >= 0.0)) throw ValidationError("rejection cost gamma must be >= 0");
  const BayesOutcome b = bayes_candidate(q, c);
  if (b.uncertainty > gamma) return Decision{};
  return Decision{b.candidate};
}

/// Fixed-gamma proper scoring rule for an externally supplied (candidate, u).
inline double c_gamma_star(std::size_t y, std::size_t candidate, double u, double gamma,
                           const CostMatrix& c) {
  if (!(u >= 0.0) || !(gamma >= 0.0)) throw ValidationError("u and gamma must be >= 0");
  const double candidate_cost = c.at(y, candidate);
  return u <= gamma ? candidate_cost : gamma;
}

/// C*_n for a general candidate cost. Uncertainties above u_M score 1 and
/// are counted in `diag`.
inline double c_n_star(std::size_t y, std::size_t candidate, double u, double n, const CostMatrix& c,
                       const CostOptions& opts = {}, Diagnostics* diag = nullptr) {
  return detail::integrated_reject_cost(c.at(y, candidate), u, c.u_max(), n, opts, diag);
}

/// C*_n for the 0-1 cost over K classes, from correctness and confidence.
/// Confidences below 1/K score 1 (counted as u > u_M); confidences above
/// 1 - eps_q are clamped.
inline double c_n01(bool correct, double q_e, double n, std::size_t k, const CostOptions& opts = {},
                    Diagnostics* diag = nullptr) {
  if (k < 2) throw ValidationError("0-1 cost needs K >= 2");
  detail::check_confidence(q_e);
  const double q_min = 1.0 / static_cast<double>(k);
  const double u_max = 1.0 - q_min;
  if (q_e <= q_min) {
    if (q_e < q_min - 1e-12 && diag) diag->note_u_above_max();
    detail::check_exponent(n);
    return 1.0;
  }
  q_e = detail::clamp_confidence_upper(q_e, opts, diag);
  return detail::integrated_reject_cost(correct ? 0.0 : 1.0, 1.0 - q_e, u_max, n, opts, diag);
}

/// C*_n for the generalized 0-1 cost in the K -> infinity limit (u_M = 1).
inline double c_n01g(bool correct, double q_e, double n, const CostOptions& opts = {},
                     Diagnostics* diag = nullptr) {
  detail::check_confidence(q_e);
  q_e = detail::clamp_confidence_upper(q_e, opts, diag);
  return detail::integrated_reject_cost(correct ? 0.0 : 1.0, 1.0 - q_e, 1.0, n, opts, diag);
}

/// C*_n of one record under the given candidate cost.
inline double record_cost(const UARecord& record, double n, const CostMatrix& c,
                          const CostOptions& opts = {}, Diagnostics* diag = nullptr) {
  if (const auto* full = std::get_if<FullPosteriorRecord>(&record)) {
    const BayesOutcome b = bayes_candidate(full->q, c);
    if (full->label >= c.classes()) throw ValidationError("label out of range");
    return c_n_star(full->label, b.candidate, b.uncertainty, n, c, opts, diag);
  }
  const auto& conf = std::get<ConfidenceRecord>(record);
  switch (c.kind()) {
    case CostKind::GeneralizedZeroOneInfinite:
      return c_n01g(conf.correct, conf.confidence, n, opts, diag);
    case CostKind::ZeroOne:
    case CostKind::GeneralizedZeroOne:
      return c_n01(conf.correct, conf.confidence, n, c.classes(), opts, diag);
    case CostKind::Custom:
      break;
  }
  throw ValidationError("confidence-only records need a 0-1 family cost");
}

/// Per-record C*_n, in input order. Rejects empty and mixed-kind inputs.
inline std::vector<double> record_costs(std::span<const UARecord> records, double n, const CostMatrix& c,
                                        const CostOptions& opts = {}, Diagnostics* diag = nullptr) {
  if (records.empty()) throw ValidationError("cannot evaluate an empty dataset");
  const std::size_t kind = records.front().index();
  std::vector<double> costs;
  costs.reserve(records.size());
  for (const UARecord& r : records) {
    if (r.index() != kind) throw ValidationError("dataset mixes full-posterior and confidence records");
    costs.push_back(record_cost(r, n, c, opts, diag));
  }
  return costs;
}

/// ECUAS_n: mean C*_n over the dataset.
inline double ecuas(std::span<const UARecord> records, double n, const CostMatrix& c,
                    const CostOptions& opts = {}, Diagnostics* diag = nullptr) {
  const auto costs = record_costs(records, n, c, opts, diag);
  return compensated_sum(costs) / static_cast<double>(costs.size());
}

}  // namespace ecuas
