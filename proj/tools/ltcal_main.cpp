// ltcal — command-line front end for the long-tail calibration toolkit.
//
// Subcommands: synth, fit, eval, sweep, report. Every command is
// deterministic given its flags. Exit codes: 0 success, 2 usage/validation,
// 3 I/O failure, 4 fit failure, 5 model/data dimension mismatch.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltcal/calibrate.hpp"
#include "ltcal/csv_io.hpp"
#include "ltcal/dataset.hpp"
#include "ltcal/errors.hpp"
#include "ltcal/metrics.hpp"
#include "ltcal/model_io.hpp"
#include "ltcal/report_io.hpp"
#include "ltcal/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitFit = 4;
constexpr int kExitDimension = 5;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ltcal::IoError("cannot open '" + path + "' for reading");
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ltcal::InvalidInputError("'" + path + "' is not valid JSON: " + std::string(e.what()));
  }
}

// Fill fields from a config file for every option the user did not pass on
// the command line; flags win over the file.
template <typename T>
void overlay(const json& cfg, const char* key, const CLI::App& cmd, const std::string& flag,
             T& field) {
  if (!cfg.contains(key) || cmd.count(flag) > 0) return;
  try {
    field = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ltcal::InvalidInputError(std::string("config field '") + key + "' has the wrong type");
  }
}

std::vector<double> parse_grid(const std::string& grid_spec) {
  double start = 0.0, stop = 0.0, step = 0.0;
  if (std::sscanf(grid_spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || !(step > 0.0)) {
    throw ltcal::InvalidInputError("--grid wants start:stop:step with step > 0, got '" + grid_spec +
                                   "'");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double a = start + k * step;
    if (a > stop + 1e-12) break;
    grid.push_back(a);
  }
  if (grid.empty()) {
    throw ltcal::InvalidInputError("--grid '" + grid_spec + "' produces no values");
  }
  for (double a : grid) {
    if (!(a > 0.0) || !(a < 2.0)) {
      throw ltcal::InvalidInputError("--grid value " + std::to_string(a) +
                                     " outside the open interval (0, 2)");
    }
  }
  return grid;
}

ltcal::calibrate::FusionMode fusion_from_flag(const std::string& s) {
  if (s == "elementwise") return ltcal::calibrate::FusionMode::kElementwise;
  if (s == "predicted-class") return ltcal::calibrate::FusionMode::kPredictedClass;
  throw ltcal::InvalidInputError("--fusion must be elementwise or predicted-class");
}

ltcal::calibrate::AssignMode assign_from_flag(const std::string& s) {
  if (s == "boundaries") return ltcal::calibrate::AssignMode::kBoundaries;
  if (s == "resort") return ltcal::calibrate::AssignMode::kResort;
  throw ltcal::InvalidInputError("--assignment must be boundaries or resort");
}

std::optional<double> dataset_imbalance(const ltcal::data::LogitsDataset& ds) {
  try {
    return ltcal::data::imbalance_factor(ds);
  } catch (const ltcal::InvalidInputError&) {
    return std::nullopt;  // some class has no samples
  }
}

void print_warnings(const ltcal::calibrate::FitInfo& info) {
  for (const std::string& w : info.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

void print_temps(const char* label, const std::vector<double>& temps) {
  std::cout << label;
  for (double t : temps) std::printf(" %.6g", t);
  std::cout << "\n";
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const std::string& suffix) {
  std::filesystem::path p = base;
  p.replace_extension();
  return p.concat(suffix);
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  ltcal::data::SynthConfig cfg;
  std::string output;
  std::string config_path;
};

void run_synth(const CLI::App& cmd, SynthArgs& args) {
  if (!args.config_path.empty()) {
    const json cfg = load_json_file(args.config_path);
    overlay(cfg, "num_classes", cmd, "--classes", args.cfg.num_classes);
    overlay(cfg, "imbalance_factor", cmd, "--if", args.cfg.imbalance_factor);
    overlay(cfg, "head_count", cmd, "--head", args.cfg.head_count);
    overlay(cfg, "class_separation", cmd, "--sep", args.cfg.class_separation);
    overlay(cfg, "overconfidence_boost", cmd, "--boost", args.cfg.overconfidence_boost);
    overlay(cfg, "noise_scale", cmd, "--noise", args.cfg.noise_scale);
    overlay(cfg, "seed", cmd, "--seed", args.cfg.seed);
  }
  const ltcal::data::LogitsDataset ds = ltcal::data::gen_synthetic(args.cfg);
  ltcal::data::save_csv(ds, args.output);

  const auto counts = ltcal::data::class_counts(ds);
  std::cout << "wrote " << ds.size() << " records, " << ds.num_classes() << " classes to "
            << args.output << "\n";
  std::printf("config: classes=%d if=%.6g head=%d sep=%.6g boost=%.6g noise=%.6g seed=%llu\n",
              args.cfg.num_classes, args.cfg.imbalance_factor, args.cfg.head_count,
              args.cfg.class_separation, args.cfg.overconfidence_boost, args.cfg.noise_scale,
              static_cast<unsigned long long>(args.cfg.seed));
  std::cout << "class counts:";
  for (std::size_t k : counts) std::cout << ' ' << k;
  std::printf("\nrealized imbalance factor: %.6g\n", ltcal::data::imbalance_factor(ds));
}

// ------------------------------------------------------------------ fit ----

struct FitArgs {
  std::string method = "ts";
  std::string data;
  std::string output;
  std::string config_path;
  int bins = 10;
  double alpha = 1.0;
  std::string fusion = "elementwise";
  std::string assignment = "boundaries";
  ltcal::optim::FitOptions opts;
};

void overlay_fit_options(const json& cfg, const CLI::App& cmd, FitArgs& args) {
  overlay(cfg, "method", cmd, "--method", args.method);
  overlay(cfg, "data", cmd, "--data", args.data);
  overlay(cfg, "output", cmd, "--output", args.output);
  overlay(cfg, "bins", cmd, "--bins", args.bins);
  overlay(cfg, "alpha", cmd, "--alpha", args.alpha);
  overlay(cfg, "fusion", cmd, "--fusion", args.fusion);
  overlay(cfg, "assignment", cmd, "--assignment", args.assignment);
  overlay(cfg, "init-t", cmd, "--init-t", args.opts.initial_temperature);
  overlay(cfg, "grad-tol", cmd, "--grad-tol", args.opts.gradient_tolerance);
  overlay(cfg, "max-iter", cmd, "--max-iter", args.opts.max_iterations);
  overlay(cfg, "history", cmd, "--history", args.opts.history_size);
  overlay(cfg, "c1", cmd, "--c1", args.opts.sufficient_decrease);
}

void require_set(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw ltcal::InvalidInputError(std::string(flag) + " is required (flag or config file)");
  }
}

void run_fit(const CLI::App& cmd, FitArgs& args) {
  if (!args.config_path.empty()) {
    overlay_fit_options(load_json_file(args.config_path), cmd, args);
  }
  require_set(args.data, "--data");
  require_set(args.output, "--output");
  const auto fusion = fusion_from_flag(args.fusion);
  const auto assignment = assign_from_flag(args.assignment);
  if (args.method != "ts" && args.method != "ca-ts" && args.method != "esbin-ts" &&
      args.method != "dual-ts") {
    throw ltcal::InvalidInputError("--method must be one of ts, ca-ts, esbin-ts, dual-ts");
  }
  if (args.method == "dual-ts" && (!(args.alpha > 0.0) || !(args.alpha < 2.0))) {
    throw ltcal::InvalidInputError("--alpha must lie strictly inside (0, 2), got " +
                                   std::to_string(args.alpha));
  }

  const ltcal::data::LogitsDataset ds = ltcal::data::load_csv(args.data);
  ltcal::calibrate::FitInfo info;

  auto set_assignment = [&](ltcal::calibrate::TemperatureModel model) {
    if (assignment == ltcal::calibrate::AssignMode::kBoundaries) return model;
    auto bw = std::get<ltcal::calibrate::BinWiseTemp>(model.payload());
    bw.assignment = assignment;
    return ltcal::calibrate::TemperatureModel(model.num_classes(), std::move(bw));
  };

  std::optional<ltcal::calibrate::TemperatureModel> model;
  if (args.method == "ts") {
    model = ltcal::calibrate::fit_scalar(ds, args.opts, &info);
    std::printf("T = %.6g\n", std::get<ltcal::calibrate::ScalarTemp>(model->payload()).temperature);
  } else if (args.method == "ca-ts") {
    model = ltcal::calibrate::fit_class_adaptive(ds, args.opts, &info);
    print_temps("class temperatures:",
                std::get<ltcal::calibrate::ClassWiseTemp>(model->payload()).temperatures);
  } else if (args.method == "esbin-ts") {
    model = set_assignment(ltcal::calibrate::fit_esbin(ds, args.bins, args.opts, &info));
    print_temps("bin temperatures:",
                std::get<ltcal::calibrate::BinWiseTemp>(model->payload()).temperatures);
  } else if (args.method == "dual-ts") {
    ltcal::calibrate::FitInfo ca_info, es_info;
    const auto ca = ltcal::calibrate::fit_class_adaptive(ds, args.opts, &ca_info);
    const auto es = set_assignment(ltcal::calibrate::fit_esbin(ds, args.bins, args.opts, &es_info));
    model = ltcal::calibrate::fuse_dual(ca, es, args.alpha, fusion);
    print_temps("class temperatures:",
                std::get<ltcal::calibrate::ClassWiseTemp>(ca.payload()).temperatures);
    print_temps("bin temperatures:",
                std::get<ltcal::calibrate::BinWiseTemp>(es.payload()).temperatures);
    std::printf("alpha = %.6g (%s fusion)\n", args.alpha, args.fusion.c_str());
    info.warnings = ca_info.warnings;
    info.warnings.insert(info.warnings.end(), es_info.warnings.begin(), es_info.warnings.end());
    info.nll_before = ca_info.nll_before;
    info.nll_after =
        ltcal::metrics::mean_nll(ds, ltcal::calibrate::apply_logits(*model, ds));
  } else {
    throw ltcal::InvalidInputError("--method must be one of ts, ca-ts, esbin-ts, dual-ts");
  }

  print_warnings(info);
  ltcal::calibrate::save_model(*model, args.output);
  std::printf("fit NLL: %.6f -> %.6f\n", info.nll_before, info.nll_after);
  std::cout << "wrote " << model->variant_name() << " model to " << args.output << "\n";
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string model_path;
  std::string data;
  std::string output;
  std::string config_path;
  int metric_bins = 15;
};

void run_eval(const CLI::App& cmd, EvalArgs& args) {
  if (!args.config_path.empty()) {
    const json cfg = load_json_file(args.config_path);
    overlay(cfg, "model", cmd, "--model", args.model_path);
    overlay(cfg, "data", cmd, "--data", args.data);
    overlay(cfg, "output", cmd, "--output", args.output);
    overlay(cfg, "metric-bins", cmd, "--metric-bins", args.metric_bins);
  }
  require_set(args.model_path, "--model");
  require_set(args.data, "--data");
  require_set(args.output, "--output");
  const auto model = ltcal::calibrate::load_model(args.model_path);
  const auto ds = ltcal::data::load_csv(args.data);
  const auto report = ltcal::calibrate::evaluate(model, ds, args.metric_bins);

  const json config_echo = {{"command", "eval"},
                            {"model", args.model_path},
                            {"data", args.data},
                            {"output", args.output},
                            {"b_metric", args.metric_bins},
                            {"model_description", model.description()}};
  const json report_json = ltcal::report_io::report_to_json(report, dataset_imbalance(ds),
                                                            ds.num_classes(), config_echo);
  ltcal::report_io::save_report(report_json, args.output);
  ltcal::report_io::save_reliability_csv(
      report.equal_width, with_suffix(args.output, ".reliability_equal_width.csv"));
  ltcal::report_io::save_reliability_csv(
      report.equal_count, with_suffix(args.output, ".reliability_equal_count.csv"));
  std::cout << ltcal::report_io::summary_line(report) << "\n";
}

// ---------------------------------------------------------------- sweep ----

struct SweepArgs {
  std::string model_path;
  std::string fit_data;
  std::string eval_data;
  std::string output;
  std::string config_path;
  std::string grid = "0.1:1.9:0.1";
  std::string fusion = "elementwise";
  std::string assignment = "boundaries";
  int bins = 10;
  int metric_bins = 15;
  ltcal::optim::FitOptions opts;
};

void run_sweep(const CLI::App& cmd, SweepArgs& args) {
  if (!args.config_path.empty()) {
    const json cfg = load_json_file(args.config_path);
    overlay(cfg, "model", cmd, "--model", args.model_path);
    overlay(cfg, "fit-data", cmd, "--fit-data", args.fit_data);
    overlay(cfg, "eval-data", cmd, "--eval-data", args.eval_data);
    overlay(cfg, "output", cmd, "--output", args.output);
    overlay(cfg, "grid", cmd, "--grid", args.grid);
    overlay(cfg, "fusion", cmd, "--fusion", args.fusion);
    overlay(cfg, "assignment", cmd, "--assignment", args.assignment);
    overlay(cfg, "bins", cmd, "--bins", args.bins);
    overlay(cfg, "metric-bins", cmd, "--metric-bins", args.metric_bins);
    overlay(cfg, "init-t", cmd, "--init-t", args.opts.initial_temperature);
    overlay(cfg, "grad-tol", cmd, "--grad-tol", args.opts.gradient_tolerance);
    overlay(cfg, "max-iter", cmd, "--max-iter", args.opts.max_iterations);
    overlay(cfg, "history", cmd, "--history", args.opts.history_size);
    overlay(cfg, "c1", cmd, "--c1", args.opts.sufficient_decrease);
  }
  if (args.model_path.empty() == args.fit_data.empty()) {
    throw ltcal::InvalidInputError("sweep needs exactly one of --model (a Dual model) or "
                                   "--fit-data (to fit both branches)");
  }
  require_set(args.eval_data, "--eval-data");
  require_set(args.output, "--output");
  const auto fusion = fusion_from_flag(args.fusion);
  const auto assignment = assign_from_flag(args.assignment);
  const auto grid = parse_grid(args.grid);
  const auto eval_ds = ltcal::data::load_csv(args.eval_data);

  std::optional<ltcal::calibrate::TemperatureModel> class_model, bin_model;
  if (!args.model_path.empty()) {
    const auto dual = ltcal::calibrate::load_model(args.model_path);
    const auto* payload = std::get_if<ltcal::calibrate::DualTemp>(&dual.payload());
    if (payload == nullptr) {
      throw ltcal::InvalidInputError("--model must point to a Dual model, got " +
                                     dual.variant_name());
    }
    class_model.emplace(dual.num_classes(), payload->class_branch);
    bin_model.emplace(dual.num_classes(), payload->bin_branch);
  } else {
    const auto fit_ds = ltcal::data::load_csv(args.fit_data);
    ltcal::calibrate::FitInfo ca_info, es_info;
    class_model = ltcal::calibrate::fit_class_adaptive(fit_ds, args.opts, &ca_info);
    bin_model = ltcal::calibrate::fit_esbin(fit_ds, args.bins, args.opts, &es_info);
    print_warnings(ca_info);
    print_warnings(es_info);
    if (assignment != ltcal::calibrate::AssignMode::kBoundaries) {
      auto bw = std::get<ltcal::calibrate::BinWiseTemp>(bin_model->payload());
      bw.assignment = assignment;
      bin_model.emplace(bin_model->num_classes(), std::move(bw));
    }
  }

  const auto sweep =
      ltcal::calibrate::sweep_alpha(*class_model, *bin_model, eval_ds, grid, args.metric_bins,
                                    fusion);
  const json config_echo = {{"command", "sweep"},           {"model", args.model_path},
                            {"fit-data", args.fit_data},    {"eval-data", args.eval_data},
                            {"output", args.output},        {"grid", args.grid},
                            {"fusion", args.fusion},        {"assignment", args.assignment},
                            {"bins", args.bins},            {"metric-bins", args.metric_bins}};
  ltcal::report_io::save_sweep_csv(sweep, args.output);
  ltcal::report_io::save_report(ltcal::report_io::sweep_summary_json(sweep, config_echo),
                                with_suffix(args.output, ".best.json"));
  std::printf("best alpha: %.6g (ECE %.4f%%)\n", sweep.best_alpha, sweep.best_ece);
}

// ---------------------------------------------------------------- report ----

void run_report(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.contains("metrics")) {
    throw ltcal::InvalidInputError("'" + path + "' does not look like a report (no metrics)");
  }
  const json& m = j.at("metrics");
  std::printf("%.2f / %.2f / %.2f / %.3f\n", m.at("acc").get<double>() * 100.0,
              m.at("ece").get<double>(), m.at("esbin_ece").get<double>(),
              m.at("nll").get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ltcal — temperature-scaling calibration toolkit for long-tailed classifiers"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic long-tailed logits CSV");
  synth_cmd->add_option("--classes,--num-classes", synth.cfg.num_classes, "number of classes");
  synth_cmd->add_option("--if,--imbalance-factor", synth.cfg.imbalance_factor,
                        "head count / tail count");
  synth_cmd->add_option("--head,--head-count", synth.cfg.head_count, "samples in class 0");
  synth_cmd->add_option("--sep,--class-separation", synth.cfg.class_separation,
                        "true-class logit margin");
  synth_cmd->add_option("--boost,--overconfidence-boost", synth.cfg.overconfidence_boost,
                        "margin multiplier at the head class");
  synth_cmd->add_option("--noise,--noise-scale", synth.cfg.noise_scale, "logit noise sigma");
  synth_cmd->add_option("--seed", synth.cfg.seed, "generator seed");
  synth_cmd->add_option("-o,--output", synth.output, "output CSV path")->required();
  synth_cmd->add_option("--config", synth.config_path, "JSON config (flags win)");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a temperature model on a logits CSV");
  fit_cmd->add_option("--method", fit.method, "ts | ca-ts | esbin-ts | dual-ts");
  fit_cmd->add_option("--data", fit.data, "fit-split logits CSV");
  fit_cmd->add_option("-o,--output", fit.output, "output model JSON path");
  fit_cmd->add_option("--bins", fit.bins, "equal-count fit bins for esbin-ts/dual-ts");
  fit_cmd->add_option("--alpha", fit.alpha, "dual-ts fusion hyperparameter in (0, 2)");
  fit_cmd->add_option("--fusion", fit.fusion, "elementwise | predicted-class");
  fit_cmd->add_option("--assignment", fit.assignment, "boundaries | resort");
  fit_cmd->add_option("--init-t", fit.opts.initial_temperature, "initial temperature");
  fit_cmd->add_option("--grad-tol", fit.opts.gradient_tolerance, "gradient max-norm tolerance");
  fit_cmd->add_option("--max-iter", fit.opts.max_iterations, "iteration cap");
  fit_cmd->add_option("--history", fit.opts.history_size, "quasi-Newton history size");
  fit_cmd->add_option("--c1", fit.opts.sufficient_decrease, "line-search sufficient decrease");
  fit_cmd->add_option("--config", fit.config_path, "JSON config (flags win)");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model on a logits CSV");
  eval_cmd->add_option("--model", eval.model_path, "model JSON path");
  eval_cmd->add_option("--data", eval.data, "evaluation logits CSV");
  eval_cmd->add_option("-o,--output", eval.output, "output report JSON path");
  eval_cmd->add_option("--metric-bins", eval.metric_bins, "bins for ECE and Esbin-ECE");
  eval_cmd->add_option("--config", eval.config_path, "JSON config (flags win)");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "evaluate dual fusion over an alpha grid");
  sweep_cmd->add_option("--model", sweep.model_path, "fitted Dual model JSON");
  sweep_cmd->add_option("--fit-data", sweep.fit_data, "fit both branches on this CSV instead");
  sweep_cmd->add_option("--eval-data", sweep.eval_data, "evaluation logits CSV");
  sweep_cmd->add_option("-o,--output", sweep.output, "output sweep CSV path");
  sweep_cmd->add_option("--grid", sweep.grid, "alpha grid start:stop:step");
  sweep_cmd->add_option("--fusion", sweep.fusion, "elementwise | predicted-class");
  sweep_cmd->add_option("--assignment", sweep.assignment, "boundaries | resort");
  sweep_cmd->add_option("--bins", sweep.bins, "equal-count fit bins when fitting branches");
  sweep_cmd->add_option("--metric-bins", sweep.metric_bins, "bins for ECE and Esbin-ECE");
  sweep_cmd->add_option("--init-t", sweep.opts.initial_temperature, "initial temperature");
  sweep_cmd->add_option("--grad-tol", sweep.opts.gradient_tolerance, "gradient tolerance");
  sweep_cmd->add_option("--max-iter", sweep.opts.max_iterations, "iteration cap");
  sweep_cmd->add_option("--history", sweep.opts.history_size, "quasi-Newton history size");
  sweep_cmd->add_option("--c1", sweep.opts.sufficient_decrease, "line-search constant");
  sweep_cmd->add_option("--config", sweep.config_path, "JSON config (flags win)");

  std::string report_path;
  CLI::App* report_cmd = app.add_subcommand("report", "print the summary line of a saved report");
  report_cmd->add_option("report", report_path, "report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      run_synth(*synth_cmd, synth);
    } else if (fit_cmd->parsed()) {
      run_fit(*fit_cmd, fit);
    } else if (eval_cmd->parsed()) {
      run_eval(*eval_cmd, eval);
    } else if (sweep_cmd->parsed()) {
      run_sweep(*sweep_cmd, sweep);
    } else if (report_cmd->parsed()) {
      run_report(report_path);
    }
  } catch (const ltcal::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const ltcal::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFit;
  } catch (const ltcal::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ltcal::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
