#pragma once

// Full metric report for one dataset: baselines, ECUAS_n for each n and,
// for full-posterior data, values normalized by the naive prior system.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ecuas/baselines.hpp"
#include "ecuas/costs.hpp"
#include "ecuas/data_io.hpp"
#include "ecuas/normalization.hpp"

namespace ecuas {

enum class CostSpec { ZeroOne, ZeroOneInfinite };

struct EvaluateOptions {
  CostSpec cost = CostSpec::ZeroOne;
  std::optional<std::size_t> k;  // required for confidence-only data under the finite 0-1 cost
  std::vector<double> n_values{0.0, 1.0, 128.0};
  bool normalize = false;
  int ece_bins = 15;
  CostOptions cost_options;
};

inline std::string ecuas_metric_name(double n) { return "ECUAS_" + format_double(n); }

inline CostMatrix resolve_cost(const Dataset& ds, const EvaluateOptions& opts) {
  if (ds.kind == RecordKind::FullPosterior) {
    if (opts.cost != CostSpec::ZeroOne) {
      throw ValidationError("full-posterior data needs a finite cost (zero-one)");
    }
    if (opts.k && *opts.k != ds.classes) {
      throw ValidationError("--K " + std::to_string(*opts.k) + " disagrees with the file's " +
                            std::to_string(ds.classes) + " classes");
    }
    return CostMatrix::zero_one(ds.classes);
  }
  if (opts.cost == CostSpec::ZeroOneInfinite) return CostMatrix::generalized_zero_one_infinite();
  if (!opts.k) throw ValidationError("confidence-only data with the finite 0-1 cost needs K");
  return CostMatrix::generalized_zero_one(*opts.k);
}

namespace detail {

// Metrics shared by the evaluated system and the naive reference.
struct MetricSet {
  std::vector<std::pair<std::string, double>> values;

  double get(const std::string& name) const {
    for (const auto& [k, v] : values) {
      if (k == name) return v;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

inline MetricSet compute_metrics(const std::vector<UARecord>& records, bool posteriors, const CostMatrix& cost,
                                 const EvaluateOptions& opts, Diagnostics* diag) {
  const auto scored = to_scored(records);
  MetricSet m;
  m.values.emplace_back("ER", error_rate(scored));
  m.values.emplace_back("ECE", ece(scored, opts.ece_bins));
  double auc_value = std::numeric_limits<double>::quiet_NaN();
  try {
    auc_value = auc(scored);
  } catch (const NumericError&) {
    // undefined for single-class data; reported as NaN / null
  }
  m.values.emplace_back("AUC", auc_value);
  m.values.emplace_back("CE_qe", ce_binary(scored, opts.cost_options.eps_q));
  m.values.emplace_back("BS_qe", brier_binary(scored));
  if (posteriors) {
    m.values.emplace_back("CE_q", ce_multiclass(records, opts.cost_options.eps_q));
    m.values.emplace_back("BS_q", brier_multiclass(records));
  }
  m.values.emplace_back("AURC", aurc(scored));
  for (double n : opts.n_values) {
    m.values.emplace_back(ecuas_metric_name(n), ecuas(records, n, cost, opts.cost_options, diag));
  }
  return m;
}

}  // namespace detail

inline EvaluationReport evaluate(const Dataset& ds, const EvaluateOptions& opts) {
  if (ds.records.empty()) throw ValidationError("cannot evaluate an empty dataset");
  if (opts.n_values.empty()) throw ValidationError("at least one n value is needed");
  const bool posteriors = ds.kind == RecordKind::FullPosterior;
  if (opts.normalize && !posteriors) {
    throw ValidationError(
        "normalization is unavailable for confidence-only (generative) data: there is no class prior "
        "for a naive reference system");
  }
  const CostMatrix cost = resolve_cost(ds, opts);

  EvaluationReport report;
  std::string n_list;
  for (double n : opts.n_values) n_list += (n_list.empty() ? "" : ",") + format_double(n);
  report.config = {
      {"input", ds.source},
      {"kind", posteriors ? "posterior" : "generative"},
      {"cost", opts.cost == CostSpec::ZeroOne ? "zero-one" : "zero-one-inf"},
      {"K", cost.classes() ? std::to_string(cost.classes()) : "inf"},
      {"samples", std::to_string(ds.records.size())},
      {"n", n_list},
      {"normalize", opts.normalize ? "true" : "false"},
      {"ece_bins", std::to_string(opts.ece_bins)},
      {"eps_q", format_double(opts.cost_options.eps_q)},
      {"eps_u", format_double(opts.cost_options.eps_u)},
  };

  Diagnostics diag;
  const auto raw = detail::compute_metrics(ds.records, posteriors, cost, opts, &diag);
  report.metrics = raw.values;

  if (opts.normalize) {
    const auto naive = naive_records(ds.records, ds.classes);
    const auto ref = detail::compute_metrics(naive, true, cost, opts, nullptr);
    std::vector<std::string> names{"ER", "CE_qe", "BS_qe", "CE_q", "BS_q"};
    for (double n : opts.n_values) names.push_back(ecuas_metric_name(n));
    for (const auto& name : names) {
      const double naive_value = ref.get(name);
      try {
        report.metrics.emplace_back("N-" + name, normalize_metric(raw.get(name), naive_value));
      } catch (const NumericError& e) {
        throw NumericError("cannot normalize " + name + ": " + e.what());
      }
    }
  }
  report.diagnostics = diag.counts();
  return report;
}

}  // namespace ecuas
