#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ecuas/error.hpp"
#include "ecuas/summation.hpp"

namespace ecuas {

/// A point q on the probability simplex over K >= 2 classes.
class CategoricalDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit CategoricalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
      throw ValidationError("categorical distribution needs at least 2 classes");
    }
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0) {
        throw ValidationError("categorical distribution has a negative or non-finite entry");
      }
    }
    const double total = compensated_sum(probs_);
    if (std::fabs(total - 1.0) > kSumTolerance) {
      throw ValidationError("categorical distribution sums to " + std::to_string(total) +
                            ", not 1");
    }
  }

  /// Divides by the total. Rejects negative entries and all-zero vectors.
  static CategoricalDistribution normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) {
        throw ValidationError("cannot normalize a vector with negative or non-finite entries");
      }
    }
    total = compensated_sum(weights);
    if (!(total > 0.0)) throw ValidationError("cannot normalize an all-zero vector");
    for (double& w : weights) w /= total;
    return CategoricalDistribution(std::move(weights));
  }

  static CategoricalDistribution uniform(std::size_t k) {
    return CategoricalDistribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Index of the largest entry; ties go to the lowest index.
  std::size_t argmax() const noexcept {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs_.size(); ++k) {
      if (probs_[k] > probs_[best]) best = k;
    }
    return best;
  }

  double max() const noexcept { return probs_[argmax()]; }

  friend bool operator==(const CategoricalDistribution&, const CategoricalDistribution&) = default;

 private:
  std::vector<double> probs_;
};

}  // namespace ecuas
