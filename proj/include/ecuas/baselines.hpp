#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ecuas/costs.hpp"
#include "ecuas/error.hpp"
#include "ecuas/summation.hpp"

namespace ecuas {

/// Confidence of the candidate answer and whether the candidate was correct.
struct ScoredSample {
  double confidence = 0.0;
  bool correct = false;
};

struct RiskCoveragePoint {
  double coverage = 0.0;
  double risk = 0.0;
  double threshold = 0.0;
};

namespace detail {

inline void require_non_empty(std::size_t n, const char* metric) {
  if (n == 0) throw ValidationError(std::string(metric) + ": empty input");
}

inline void check_samples(std::span<const ScoredSample> samples, const char* metric) {
  require_non_empty(samples.size(), metric);
  for (const auto& s : samples) {
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) {
      throw ValidationError(std::string(metric) + ": confidence outside [0, 1]");
    }
  }
}

// Indices sorted by confidence descending; ties keep input order.
inline std::vector<std::size_t> by_confidence_desc(std::span<const ScoredSample> samples) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].confidence > samples[b].confidence;
  });
  return order;
}

inline std::span<const FullPosteriorRecord> require_posteriors(std::span<const UARecord> records,
                                                               std::vector<FullPosteriorRecord>& storage,
                                                               const char* metric) {
  require_non_empty(records.size(), metric);
  storage.clear();
  storage.reserve(records.size());
  for (const auto& r : records) {
    const auto* full = std::get_if<FullPosteriorRecord>(&r);
    if (!full) throw ValidationError(std::string(metric) + " needs full-posterior records");
    if (full->label >= full->q.size()) throw ValidationError(std::string(metric) + ": label out of range");
    storage.push_back(*full);
  }
  return storage;
}

}  // namespace detail

/// Argmax candidate and its probability for a posterior record, or the
/// record itself for a confidence record.
inline ScoredSample to_scored(const UARecord& record) {
  if (const auto* full = std::get_if<FullPosteriorRecord>(&record)) {
    const std::size_t e = full->q.argmax();
    return {full->q[e], e == full->label};
  }
  const auto& conf = std::get<ConfidenceRecord>(record);
  return {conf.confidence, conf.correct};
}

inline std::vector<ScoredSample> to_scored(std::span<const UARecord> records) {
  std::vector<ScoredSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(to_scored(r));
  return out;
}

inline double error_rate(std::span<const ScoredSample> samples) {
  detail::check_samples(samples, "error rate");
  std::size_t wrong = 0;
  for (const auto& s : samples) wrong += s.correct ? 0 : 1;
  return static_cast<double>(wrong) / static_cast<double>(samples.size());
}

/// Expected calibration error with `bins` equal-width bins on [0, 1].
/// Bin b covers (b/B, (b+1)/B]; the first bin also includes 0.
inline double ece(std::span<const ScoredSample> samples, int bins = 15) {
  detail::check_samples(samples, "ECE");
  if (bins < 1) throw ValidationError("ECE needs at least one bin");
  std::vector<CompensatedSum> conf(bins), acc(bins);
  std::vector<std::size_t> count(bins, 0);
  for (const auto& s : samples) {
    auto b = static_cast<long>(std::ceil(s.confidence * bins)) - 1;
    b = std::clamp<long>(b, 0, bins - 1);
    conf[b] += s.confidence;
    acc[b] += s.correct ? 1.0 : 0.0;
    ++count[b];
  }
  const auto n = static_cast<double>(samples.size());
  CompensatedSum total;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const auto nb = static_cast<double>(count[b]);
    total += (nb / n) * std::fabs(acc[b].value() / nb - conf[b].value() / nb);
  }
  return total.value();
}

/// Probability that a correct sample has higher confidence than a wrong
/// one (Mann-Whitney U / (n_correct n_wrong)), ties counted as 1/2.
inline double auc(std::span<const ScoredSample> samples) {
  detail::check_samples(samples, "AUC");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].confidence < samples[b].confidence;
  });
  // Sum of mid-ranks of the correct samples.
  double rank_sum = 0.0;
  std::size_t n_correct = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && samples[order[j]].confidence == samples[order[i]].confidence) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (samples[order[t]].correct) {
        rank_sum += mid_rank;
        ++n_correct;
      }
    }
    i = j;
  }
  const std::size_t n_wrong = samples.size() - n_correct;
  if (n_correct == 0 || n_wrong == 0) {
    throw NumericError("AUC is undefined when all samples are correct or all are wrong");
  }
  const auto nc = static_cast<double>(n_correct);
  const auto nw = static_cast<double>(n_wrong);
  return (rank_sum - nc * (nc + 1.0) / 2.0) / (nc * nw);
}

/// Brier score of the confidence as a predictor of correctness.
inline double brier_binary(std::span<const ScoredSample> samples) {
  detail::check_samples(samples, "binary Brier score");
  CompensatedSum s;
  for (const auto& x : samples) {
    const double d = x.confidence - (x.correct ? 1.0 : 0.0);
    s += d * d;
  }
  return s.value() / static_cast<double>(samples.size());
}

/// Cross-entropy of the confidence as a predictor of correctness;
/// confidences are clamped to [eps_q, 1 - eps_q].
inline double ce_binary(std::span<const ScoredSample> samples, double eps_q = 1e-6) {
  detail::check_samples(samples, "binary cross-entropy");
  CompensatedSum s;
  for (const auto& x : samples) {
    const double q = std::clamp(x.confidence, eps_q, 1.0 - eps_q);
    s += x.correct ? -std::log(q) : -std::log1p(-q);
  }
  return s.value() / static_cast<double>(samples.size());
}

/// Multiclass Brier score over the full posterior.
inline double brier_multiclass(std::span<const UARecord> records) {
  std::vector<FullPosteriorRecord> storage;
  const auto recs = detail::require_posteriors(records, storage, "multiclass Brier score");
  CompensatedSum s;
  for (const auto& r : recs) {
    for (std::size_t k = 0; k < r.q.size(); ++k) {
      const double d = r.q[k] - (k == r.label ? 1.0 : 0.0);
      s += d * d;
    }
  }
  return s.value() / static_cast<double>(recs.size());
}

/// Multiclass cross-entropy, -log q_y with q_y floored at eps.
inline double ce_multiclass(std::span<const UARecord> records, double eps = 1e-6) {
  std::vector<FullPosteriorRecord> storage;
  const auto recs = detail::require_posteriors(records, storage, "multiclass cross-entropy");
  CompensatedSum s;
  for (const auto& r : recs) s += -std::log(std::max(r.q[r.label], eps));
  return s.value() / static_cast<double>(recs.size());
}

/// Area under the risk-coverage curve: mean over i of the error rate of
/// the i most confident samples.
inline double aurc(std::span<const ScoredSample> samples) {
  detail::check_samples(samples, "AURC");
  const auto order = detail::by_confidence_desc(samples);
  CompensatedSum total;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    wrong += samples[order[i]].correct ? 0 : 1;
    total += static_cast<double>(wrong) / static_cast<double>(i + 1);
  }
  return total.value() / static_cast<double>(samples.size());
}

/// One point per distinct confidence, accepting samples with confidence
/// >= threshold, ordered by increasing coverage.
inline std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const ScoredSample> samples) {
  detail::check_samples(samples, "risk-coverage curve");
  const auto order = detail::by_confidence_desc(samples);
  const auto n = static_cast<double>(samples.size());
  std::vector<RiskCoveragePoint> curve;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    wrong += samples[order[i]].correct ? 0 : 1;
    const bool last_of_value =
        i + 1 == order.size() || samples[order[i + 1]].confidence != samples[order[i]].confidence;
    if (last_of_value) {
      const auto accepted = static_cast<double>(i + 1);
      curve.push_back({accepted / n, static_cast<double>(wrong) / accepted, samples[order[i]].confidence});
    }
  }
  return curve;
}

/// Coverage and selective risk of accept-iff-u<=threshold.
struct SelectiveOutcome {
  double coverage = 0.0;
  double selective_risk = 0.0;  // 0 when nothing is accepted
  double expected_cost = 0.0;
};

namespace detail {

struct CandidateCost {
  double cost = 0.0;
  double uncertainty = 0.0;
};

inline CandidateCost candidate_cost(const UARecord& record, const CostMatrix& c) {
  if (const auto* full = std::get_if<FullPosteriorRecord>(&record)) {
    const BayesOutcome b = bayes_candidate(full->q, c);
    return {c.at(full->label, b.candidate), b.uncertainty};
  }
  if (!c.is_zero_one_family()) throw ValidationError("confidence-only records need a 0-1 family cost");
  const auto& conf = std::get<ConfidenceRecord>(record);
  check_confidence(conf.confidence);
  return {conf.correct ? 0.0 : 1.0, 1.0 - conf.confidence};
}

}  // namespace detail

/// Expected C_gamma of accept-iff-u<=threshold with its coverage and
/// selective risk, each accumulated independently.
inline SelectiveOutcome selective_outcome(std::span<const UARecord> records, const CostMatrix& c, double gamma,
                                          double threshold) {
  detail::require_non_empty(records.size(), "expected cost");
  if (!(gamma >= 0.0)) throw ValidationError("rejection cost gamma must be >= 0");
  CompensatedSum accepted_cost, all_cost;
  std::size_t accepted = 0;
  for (const auto& r : records) {
    const auto cc = detail::candidate_cost(r, c);
    if (cc.uncertainty <= threshold) {
      accepted_cost += cc.cost;
      all_cost += cc.cost;
      ++accepted;
    } else {
      all_cost += gamma;
    }
  }
  const auto n = static_cast<double>(records.size());
  SelectiveOutcome out;
  out.coverage = static_cast<double>(accepted) / n;
  out.selective_risk = accepted == 0 ? 0.0 : accepted_cost.value() / static_cast<double>(accepted);
  out.expected_cost = all_cost.value() / n;
  return out;
}

/// Mean C_gamma when accepting iff u <= threshold.
inline double expected_cost_fixed_gamma(std::span<const UARecord> records, const CostMatrix& c, double gamma,
                                        double threshold) {
  return selective_outcome(records, c, gamma, threshold).expected_cost;
}

}  // namespace ecuas
