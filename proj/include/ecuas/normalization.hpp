#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ecuas/costs.hpp"
#include "ecuas/distribution.hpp"
#include "ecuas/error.hpp"

namespace ecuas {

/// Reference system that always outputs the empirical label prior.
struct NaiveSystem {
  CategoricalDistribution prior;
  std::size_t candidate = 0;
  double confidence = 0.0;
};

inline NaiveSystem naive_prior(std::span<const std::size_t> labels, std::size_t k) {
  if (labels.empty()) throw ValidationError("naive prior needs at least one label");
  if (k < 2) throw ValidationError("naive prior needs K >= 2");
  std::vector<double> counts(k, 0.0);
  for (std::size_t y : labels) {
    if (y >= k) throw ValidationError("label out of range");
    counts[y] += 1.0;
  }
  auto prior = CategoricalDistribution::normalized(std::move(counts));
  const std::size_t e = prior.argmax();
  const double conf = prior[e];
  return {std::move(prior), e, conf};
}

/// The naive system's outputs on the same samples: every record keeps its
/// label and gets the prior as posterior.
inline std::vector<UARecord> naive_records(std::span<const UARecord> records, std::size_t k) {
  std::vector<std::size_t> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    const auto* full = std::get_if<FullPosteriorRecord>(&r);
    if (!full) {
      throw ValidationError("normalization needs full-posterior records; there is no class prior otherwise");
    }
    labels.push_back(full->label);
  }
  const NaiveSystem naive = naive_prior(labels, k);
  std::vector<UARecord> out;
  out.reserve(labels.size());
  for (std::size_t y : labels) out.emplace_back(FullPosteriorRecord{y, naive.prior});
  return out;
}

/// raw / naive. 1.0 means "as poor as the naive system".
inline double normalize_metric(double raw_value, double naive_value, double eps = 1e-12) {
  if (!(naive_value > eps)) {
    throw NumericError("normalization undefined: naive system value " + std::to_string(naive_value) +
                       " is not positive");
  }
  return raw_value / naive_value;
}

}  // namespace ecuas
