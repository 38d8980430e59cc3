#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>

namespace ecuas {

/// Numerical guards used by the scoring rules.
struct CostOptions {
  /// Confidences are kept at most 1 - eps_q so the n = 0 cost stays finite.
  double eps_q = 1e-6;
  /// Uncertainties below eps_u are raised to eps_u before taking a logarithm.
  double eps_u = 1e-10;

  /// Defaults, overridden by ECUAS_EPS_Q / ECUAS_EPS_U when set.
  static CostOptions from_environment() {
    CostOptions opts;
    if (const char* v = std::getenv("ECUAS_EPS_Q")) opts.eps_q = std::stod(v);
    if (const char* v = std::getenv("ECUAS_EPS_U")) opts.eps_u = std::stod(v);
    return opts;
  }
};

/// Plain snapshot of the counters in Diagnostics.
struct DiagnosticCounts {
  std::uint64_t u_above_max = 0;
  std::uint64_t confidence_upper_clamps = 0;
  std::uint64_t uncertainty_floor_clamps = 0;

  friend bool operator==(const DiagnosticCounts&, const DiagnosticCounts&) = default;
};

/// Clamp and safeguard counters. Safe to share between threads.
///
/// `u_above_max` counts uncertainties above u_M, which get the boundary
/// cost of 1. For confidence-only 0-1 records this is a confidence below
/// 1/K.
class Diagnostics {
 public:
  void note_u_above_max() noexcept { u_above_max_.fetch_add(1, std::memory_order_relaxed); }
  void note_confidence_upper_clamp() noexcept {
    confidence_upper_clamps_.fetch_add(1, std::memory_order_relaxed);
  }
  void note_uncertainty_floor_clamp() noexcept {
    uncertainty_floor_clamps_.fetch_add(1, std::memory_order_relaxed);
  }

  DiagnosticCounts counts() const noexcept {
    return {u_above_max_.load(std::memory_order_relaxed),
            confidence_upper_clamps_.load(std::memory_order_relaxed),
            uncertainty_floor_clamps_.load(std::memory_order_relaxed)};
  }

 private:
  std::atomic<std::uint64_t> u_above_max_{0};
  std::atomic<std::uint64_t> confidence_upper_clamps_{0};
  std::atomic<std::uint64_t> uncertainty_floor_clamps_{0};
};

}  // namespace ecuas
