#pragma once

// Affine logistic calibration, s_hat = softmax(alpha log(s) + beta), fitted
// by Newton's method on the mean multiclass cross-entropy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecuas/distribution.hpp"
#include "ecuas/error.hpp"
#include "ecuas/random.hpp"
#include "ecuas/summation.hpp"

namespace ecuas {

/// Scale on log-scores plus a sum-zero shift vector.
struct AffineCalibrator {
  double alpha = 1.0;
  std::vector<double> beta;

  static AffineCalibrator identity(std::size_t k) { return {1.0, std::vector<double>(k, 0.0)}; }
};

struct AffineFitOptions {
  /// Scores are floored here and renormalized before taking logs.
  double score_floor = 1e-10;
  double min_improvement = 1e-9;
  int max_iterations = 10000;
};

/// Optional fit diagnostics.
struct AffineFitReport {
  std::vector<double> loss_trace;  // loss at the start and after every step
  int iterations = 0;
  std::vector<std::size_t> absent_classes;
};

namespace detail {

inline std::vector<double> floored_log(const CategoricalDistribution& s, double floor) {
  std::vector<double> v(s.probs().begin(), s.probs().end());
  for (double& x : v) x = std::max(x, floor);
  const double total = compensated_sum(v);
  for (double& x : v) x = std::log(x / total);
  return v;
}

inline std::vector<double> softmax(std::vector<double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  for (double& x : z) x = std::exp(x - top);
  const double total = compensated_sum(z);
  for (double& x : z) x /= total;
  return z;
}

inline double log_sum_exp(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  CompensatedSum s;
  for (double x : z) s += std::exp(x - top);
  return top + std::log(s.value());
}

inline void project_sum_zero(std::vector<double>& beta) {
  const double mean = compensated_sum(beta) / static_cast<double>(beta.size());
  for (double& b : beta) b -= mean;
}

// Mean cross-entropy of softmax(alpha L + beta) against the labels.
class AffineObjective {
 public:
  AffineObjective(std::vector<std::vector<double>> logs, std::span<const std::size_t> labels)
      : logs_(std::move(logs)), labels_(labels.begin(), labels.end()), k_(logs_.front().size()) {}

  std::size_t classes() const noexcept { return k_; }

  double loss(double alpha, const std::vector<double>& beta) const {
    CompensatedSum s;
    std::vector<double> z(k_);
    for (std::size_t i = 0; i < logs_.size(); ++i) {
      for (std::size_t c = 0; c < k_; ++c) z[c] = alpha * logs_[i][c] + beta[c];
      s += log_sum_exp(z) - z[labels_[i]];
    }
    return s.value() / static_cast<double>(logs_.size());
  }

  // Gradient and Hessian in (alpha, beta_0..beta_{K-1}) coordinates.
  void derivatives(double alpha, const std::vector<double>& beta, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const auto dim = static_cast<Eigen::Index>(k_ + 1);
    grad = Eigen::VectorXd::Zero(dim);
    hess = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<double> z(k_);
    for (std::size_t i = 0; i < logs_.size(); ++i) {
      const auto& l = logs_[i];
      for (std::size_t c = 0; c < k_; ++c) z[c] = alpha * l[c] + beta[c];
      const auto p = softmax(z);
      double mean_l = 0.0;
      for (std::size_t c = 0; c < k_; ++c) mean_l += p[c] * l[c];
      grad(0) += mean_l - l[labels_[i]];
      double var_l = 0.0;
      for (std::size_t c = 0; c < k_; ++c) var_l += p[c] * (l[c] - mean_l) * (l[c] - mean_l);
      hess(0, 0) += var_l;
      for (std::size_t c = 0; c < k_; ++c) {
        const auto ci = static_cast<Eigen::Index>(c + 1);
        grad(ci) += p[c] - (c == labels_[i] ? 1.0 : 0.0);
        const double cross = p[c] * (l[c] - mean_l);
        hess(0, ci) += cross;
        hess(ci, 0) += cross;
        for (std::size_t d = 0; d < k_; ++d) {
          hess(ci, static_cast<Eigen::Index>(d + 1)) += (c == d ? p[c] : 0.0) - p[c] * p[d];
        }
      }
    }
    const double inv_n = 1.0 / static_cast<double>(logs_.size());
    grad *= inv_n;
    hess *= inv_n;
  }

 private:
  std::vector<std::vector<double>> logs_;
  std::vector<std::size_t> labels_;
  std::size_t k_;
};

}  // namespace detail

/// softmax(alpha log(s) + beta) with s floored and renormalized first.
inline CategoricalDistribution apply_affine(const AffineCalibrator& m, const CategoricalDistribution& s,
                                            double score_floor = 1e-10) {
  if (m.beta.size() != s.size()) throw ValidationError("calibrator and scores disagree on K");
  auto z = detail::floored_log(s, score_floor);
  for (std::size_t c = 0; c < z.size(); ++c) z[c] = m.alpha * z[c] + m.beta[c];
  return CategoricalDistribution::normalized(detail::softmax(std::move(z)));
}

/// softmax(log(q) / t).
inline CategoricalDistribution temperature_transform(const CategoricalDistribution& q, double t,
                                                     double score_floor = 1e-10) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("temperature must be finite and > 0");
  return apply_affine(AffineCalibrator{1.0 / t, std::vector<double>(q.size(), 0.0)}, q, score_floor);
}

/// Maximum-likelihood (alpha, beta) on the training scores.
inline AffineCalibrator fit_affine(std::span<const CategoricalDistribution> scores,
                                   std::span<const std::size_t> labels, const AffineFitOptions& opts = {},
                                   AffineFitReport* report = nullptr) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  if (scores.empty()) throw ValidationError("calibration needs training data");
  const std::size_t k = scores.front().size();
  if (scores.size() < k + 1) {
    throw ValidationError("calibration needs at least K+1 = " + std::to_string(k + 1) + " samples");
  }
  std::vector<std::size_t> seen(k, 0);
  std::vector<std::vector<double>> logs;
  logs.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != k) throw ValidationError("scores disagree on K");
    if (labels[i] >= k) throw ValidationError("label out of range");
    ++seen[labels[i]];
    logs.push_back(detail::floored_log(scores[i], opts.score_floor));
  }
  if (report) {
    *report = {};
    for (std::size_t c = 0; c < k; ++c) {
      if (seen[c] == 0) report->absent_classes.push_back(c);
    }
  }

  const detail::AffineObjective objective(std::move(logs), labels);
  AffineCalibrator model = AffineCalibrator::identity(k);
  double loss = objective.loss(model.alpha, model.beta);
  if (report) report->loss_trace.push_back(loss);

  const auto dim = static_cast<Eigen::Index>(k + 1);
  // The loss is flat along a constant shift of beta; adding that direction
  // to the Hessian makes it invertible without moving the Newton step.
  Eigen::VectorXd gauge = Eigen::VectorXd::Zero(dim);
  gauge.tail(dim - 1).setConstant(1.0 / std::sqrt(static_cast<double>(k)));

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    objective.derivatives(model.alpha, model.beta, grad, hess);
    if (grad.norm() < 1e-14) break;
    const Eigen::MatrixXd base = hess + gauge * gauge.transpose();

    Eigen::VectorXd step;
    double damping = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(base + damping * Eigen::MatrixXd::Identity(dim, dim));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = -ldlt.solve(grad);
        if (step.allFinite() && step.dot(grad) < 0.0) break;
      }
      damping = damping == 0.0 ? 1e-8 : damping * 10.0;
      step.resize(0);
    }
    if (step.size() == 0) step = -grad;

    // Backtracking line search with the Armijo condition.
    const double slope = step.dot(grad);
    double t = 1.0;
    AffineCalibrator trial = model;
    double trial_loss = loss;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      trial.alpha = model.alpha + t * step(0);
      for (std::size_t c = 0; c < k; ++c) {
        trial.beta[c] = model.beta[c] + t * step(static_cast<Eigen::Index>(c + 1));
      }
      detail::project_sum_zero(trial.beta);
      trial_loss = objective.loss(trial.alpha, trial.beta);
      if (std::isfinite(trial_loss) && trial_loss <= loss + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted || !(trial_loss < loss)) break;
    const double improvement = loss - trial_loss;
    model = trial;
    loss = trial_loss;
    if (report) report->loss_trace.push_back(loss);
    if (improvement < opts.min_improvement) {
      ++iter;
      break;
    }
  }
  if (report) report->iterations = iter;
  return model;
}

/// Mean multiclass cross-entropy of the scores after a calibrator.
inline double affine_loss(const AffineCalibrator& m, std::span<const CategoricalDistribution> scores,
                          std::span<const std::size_t> labels, double score_floor = 1e-10) {
  CompensatedSum s;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto z = detail::floored_log(scores[i], score_floor);
    for (std::size_t c = 0; c < z.size(); ++c) z[c] = m.alpha * z[c] + m.beta[c];
    s += detail::log_sum_exp(z) - z[labels[i]];
  }
  return s.value() / static_cast<double>(scores.size());
}

struct CrossValidationResult {
  std::vector<CategoricalDistribution> calibrated;  // aligned with the input
  std::vector<AffineCalibrator> fold_models;
  std::vector<std::size_t> fold_of;  // fold index of every input sample
};

/// Calibrated scores where each fold is transformed by a model fitted on
/// the other folds. One seeded shuffle, then contiguous folds.
inline CrossValidationResult crossval_calibrate(std::span<const CategoricalDistribution> scores,
                                                std::span<const std::size_t> labels, std::size_t folds,
                                                std::uint64_t seed, const AffineFitOptions& opts = {}) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  if (n < folds) throw ValidationError("cross-validation needs at least as many samples as folds");

  const auto perm = seeded_permutation(n, seed);
  CrossValidationResult out;
  out.fold_of.assign(n, 0);
  std::vector<std::optional<CategoricalDistribution>> slots(n);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * n / folds;
    const std::size_t hi = (f + 1) * n / folds;
    std::vector<CategoricalDistribution> train_scores;
    std::vector<std::size_t> train_labels;
    for (std::size_t p = 0; p < n; ++p) {
      if (p >= lo && p < hi) continue;
      train_scores.push_back(scores[perm[p]]);
      train_labels.push_back(labels[perm[p]]);
    }
    const AffineCalibrator model = fit_affine(train_scores, train_labels, opts);
    for (std::size_t p = lo; p < hi; ++p) {
      slots[perm[p]] = apply_affine(model, scores[perm[p]], opts.score_floor);
      out.fold_of[perm[p]] = f;
    }
    out.fold_models.push_back(model);
  }
  out.calibrated.reserve(n);
  for (auto& s : slots) out.calibrated.push_back(std::move(*s));
  return out;
}

}  // namespace ecuas
