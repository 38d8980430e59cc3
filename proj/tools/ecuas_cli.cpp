// Command-line front end: evaluate, calibrate and curves.
//
// Exit codes: 0 success, 2 validation error, 3 numeric failure.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ecuas/ecuas.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& cell : ecuas::detail::split_csv_line(text)) {
    out.push_back(ecuas::parse_double(cell, what));
  }
  if (out.empty()) throw ecuas::ValidationError(std::string(what) + " list is empty");
  return out;
}

std::optional<std::size_t> parse_k(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "inf") return std::nullopt;
  const auto k = ecuas::parse_index(text, "--K");
  if (k < 2) throw ecuas::ValidationError("--K must be >= 2");
  return k;
}

ecuas::Dataset load(const std::string& path, const std::string& kind) {
  if (kind == "posterior") return ecuas::read_posterior_csv(path);
  if (kind == "generative") return ecuas::read_generative_csv(path);
  throw ecuas::ValidationError("--kind must be posterior or generative");
}

ecuas::CostSpec parse_cost(const std::string& text) {
  if (text == "zero-one") return ecuas::CostSpec::ZeroOne;
  if (text == "zero-one-inf") return ecuas::CostSpec::ZeroOneInfinite;
  throw ecuas::ValidationError("--cost must be zero-one or zero-one-inf");
}

struct EvaluateArgs {
  std::string input, kind = "posterior", cost = "zero-one", k, n = "0,1,128", out, format = "csv";
  bool normalize = false;
  int ece_bins = 15;
  std::optional<double> eps_q, eps_u;
};

int run_evaluate(const EvaluateArgs& a) {
  ecuas::EvaluateOptions opts;
  opts.cost = parse_cost(a.cost);
  if (!a.k.empty() && a.k != "inf") opts.k = parse_k(a.k);
  opts.n_values = parse_list(a.n, "--n");
  opts.normalize = a.normalize;
  opts.ece_bins = a.ece_bins;
  opts.cost_options = ecuas::CostOptions::from_environment();
  if (a.eps_q) opts.cost_options.eps_q = *a.eps_q;
  if (a.eps_u) opts.cost_options.eps_u = *a.eps_u;
  if (a.normalize && a.kind == "generative") {
    throw ecuas::ValidationError(
        "--normalize cannot be used with generative data: there is no class prior for a naive reference system");
  }
  const auto format = ecuas::parse_format(a.format);
  const auto ds = load(a.input, a.kind);
  const auto report = ecuas::evaluate(ds, opts);
  ecuas::write_report(report, a.out, format);
  if (report.diagnostics.u_above_max > 0) {
    std::cerr << "warning: " << report.diagnostics.u_above_max
              << " sample(s) had uncertainty above u_M (confidence below 1/K); they were scored 1\n";
  }
  return 0;
}

struct CalibrateArgs {
  std::string input, out;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

int run_calibrate(const CalibrateArgs& a) {
  const auto ds = ecuas::read_posterior_csv(a.input);
  const auto scores = ds.posteriors();
  const auto labels = ds.labels();
  const auto cv = ecuas::crossval_calibrate(scores, labels, a.folds, a.seed);

  ecuas::Dataset out = ds;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    std::get<ecuas::FullPosteriorRecord>(out.records[i]).q = cv.calibrated[i];
  }
  ecuas::write_dataset_csv(out, a.out);

  nlohmann::ordered_json meta;
  meta["input"] = a.input;
  meta["folds"] = a.folds;
  meta["seed"] = a.seed;
  meta["models"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < cv.fold_models.size(); ++f) {
    meta["models"].push_back({{"fold", f}, {"alpha", cv.fold_models[f].alpha}, {"beta", cv.fold_models[f].beta}});
  }
  ecuas::write_file_atomic(a.out + ".json", meta.dump(2) + "\n");
  return 0;
}

struct CostCurveArgs {
  double n = 0.0;
  std::string k = "inf", out, format = "csv";
  std::size_t grid = 200;
  std::optional<double> eps_q;
};

int run_cost_curve(const CostCurveArgs& a) {
  auto opts = ecuas::CostOptions::from_environment();
  if (a.eps_q) opts.eps_q = *a.eps_q;
  const auto table = ecuas::cost_curve(a.n, parse_k(a.k), a.grid, opts);
  ecuas::write_table(table, a.out, ecuas::parse_format(a.format));
  return 0;
}

struct SweepArgs {
  std::string input, kind = "posterior", cost = "zero-one", k, n = "0,1,128", out, format = "csv";
  double step = 1e-3;
};

int run_gamma_sweep(const SweepArgs& a) {
  const auto ds = load(a.input, a.kind);
  ecuas::EvaluateOptions opts;
  opts.cost = parse_cost(a.cost);
  if (!a.k.empty() && a.k != "inf") opts.k = parse_k(a.k);
  opts.cost_options = ecuas::CostOptions::from_environment();
  const auto cost = ecuas::resolve_cost(ds, opts);
  const auto grid = ecuas::gamma_grid(cost.u_max(), a.step);
  auto table = ecuas::gamma_sweep(ds.records, cost, grid);
  table.config = {{"input", a.input}, {"step", ecuas::format_double(a.step)},
                  {"u_max", ecuas::format_double(cost.u_max())}};
  for (double n : parse_list(a.n, "--n")) {
    const auto tag = ecuas::format_double(n);
    table.config.emplace_back("sweep_integral_n=" + tag,
                              ecuas::format_double(ecuas::sweep_weighted_integral(table, n, cost.u_max())));
    table.config.emplace_back("ecuas_n=" + tag,
                              ecuas::format_double(ecuas::ecuas(ds.records, n, cost, opts.cost_options)));
  }
  ecuas::write_table(table, a.out, ecuas::parse_format(a.format));
  return 0;
}

struct TemperatureArgs {
  std::string input, t_grid, n = "0,1,128", out, format = "csv";
  std::uint64_t seed = 0;
};

int run_temperature(const TemperatureArgs& a) {
  const auto ds = ecuas::read_posterior_csv(a.input);
  const auto t_grid = a.t_grid.empty() ? ecuas::default_temperature_grid() : parse_list(a.t_grid, "--t-grid");
  const auto n_list = parse_list(a.n, "--n");
  auto table = ecuas::temperature_experiment(ds, t_grid, n_list, a.seed, ecuas::CostOptions::from_environment());
  table.config.emplace(table.config.begin(), "input", a.input);
  ecuas::write_table(table, a.out, ecuas::parse_format(a.format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-theoretic evaluation of classifiers and generators that output an uncertainty"};
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compute baseline metrics and ECUAS_n for a dataset");
  evaluate->add_option("--input", ev.input, "Score file")->required();
  evaluate->add_option("--kind", ev.kind, "posterior | generative")->check(CLI::IsMember({"posterior", "generative"}));
  evaluate->add_option("--cost", ev.cost, "zero-one | zero-one-inf")->check(CLI::IsMember({"zero-one", "zero-one-inf"}));
  evaluate->add_option("--K", ev.k, "Number of classes (generative data with zero-one)");
  evaluate->add_option("--n", ev.n, "Comma-separated n values");
  evaluate->add_flag("--normalize", ev.normalize, "Divide by the naive prior system's values");
  evaluate->add_option("--ece-bins", ev.ece_bins, "ECE bin count")->check(CLI::PositiveNumber);
  evaluate->add_option("--eps-q", ev.eps_q, "Confidence clamp");
  evaluate->add_option("--eps-u", ev.eps_u, "Uncertainty floor before logarithms");
  evaluate->add_option("--out", ev.out, "Report path")->required();
  evaluate->add_option("--format", ev.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Cross-validated affine calibration of posterior scores");
  calibrate->add_option("--input", cal.input, "Posterior score file")->required();
  calibrate->add_option("--folds", cal.folds, "Number of folds");
  calibrate->add_option("--seed", cal.seed, "Shuffle seed");
  calibrate->add_option("--out", cal.out, "Calibrated score file")->required();

  auto* curves = app.add_subcommand("curves", "Cost curves, gamma sweeps and the temperature experiment");
  curves->require_subcommand(1);

  CostCurveArgs cc;
  auto* cost_curve = curves->add_subcommand("cost-curve", "C*_n against the confidence");
  cost_curve->add_option("--n", cc.n, "n")->required();
  cost_curve->add_option("--K", cc.k, "Number of classes or inf");
  cost_curve->add_option("--grid", cc.grid, "Grid size");
  cost_curve->add_option("--eps-q", cc.eps_q, "Confidence clamp");
  cost_curve->add_option("--out", cc.out, "Table path")->required();
  cost_curve->add_option("--format", cc.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  SweepArgs sw;
  auto* sweep = curves->add_subcommand("gamma-sweep", "Expected C_gamma at the Bayes threshold for a gamma grid");
  sweep->add_option("--input", sw.input, "Score file")->required();
  sweep->add_option("--kind", sw.kind, "posterior | generative")->check(CLI::IsMember({"posterior", "generative"}));
  sweep->add_option("--cost", sw.cost, "zero-one | zero-one-inf")->check(CLI::IsMember({"zero-one", "zero-one-inf"}));
  sweep->add_option("--K", sw.k, "Number of classes (generative data with zero-one)");
  sweep->add_option("--step", sw.step, "Gamma grid step");
  sweep->add_option("--n", sw.n, "n values for the weighted integral");
  sweep->add_option("--out", sw.out, "Table path")->required();
  sweep->add_option("--format", sw.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  TemperatureArgs te;
  auto* temperature = curves->add_subcommand("temperature", "ECUAS_n with candidates sampled at temperature t");
  temperature->add_option("--input", te.input, "Calibrated posterior score file")->required();
  temperature->add_option("--t-grid", te.t_grid, "Comma-separated temperatures (default: 13 points, 0.25..8)");
  temperature->add_option("--n", te.n, "Comma-separated n values");
  temperature->add_option("--seed", te.seed, "Sampling seed");
  temperature->add_option("--out", te.out, "Table path")->required();
  temperature->add_option("--format", te.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*evaluate) return run_evaluate(ev);
    if (*calibrate) return run_calibrate(cal);
    if (*cost_curve) return run_cost_curve(cc);
    if (*sweep) return run_gamma_sweep(sw);
    if (*temperature) return run_temperature(te);
  } catch (const ecuas::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ecuas::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
