#include "ltcal/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ltcal/binning.hpp"
#include "ltcal/errors.hpp"

namespace ltcal::calibrate {

namespace {

void require_positive_temps(std::span<const double> temps, const char* what) {
  if (temps.empty()) {
    throw InvalidInputError(std::string(what) + " temperature vector is empty");
  }
  for (double t : temps) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw InvalidInputError(std::string(what) + " temperatures must be positive and finite");
    }
  }
}

void validate_binwise(const BinWiseTemp& bw) {
  require_positive_temps(bw.temperatures, "bin-wise");
  if (bw.boundaries.size() + 1 != bw.temperatures.size()) {
    throw InvalidInputError("bin-wise model needs B-1 boundaries; got " +
                            std::to_string(bw.boundaries.size()) + " for " +
                            std::to_string(bw.temperatures.size()) + " bins");
  }
  for (std::size_t k = 0; k + 1 < bw.boundaries.size(); ++k) {
    if (bw.boundaries[k] > bw.boundaries[k + 1]) {
      throw InvalidInputError("bin boundaries must be non-decreasing");
    }
  }
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw InvalidInputError("alpha must lie strictly inside (0, 2), got " +
                            std::to_string(alpha));
  }
}

double clamp_temperature(double t, const std::string& what, FitInfo* info) {
  const double clamped = std::clamp(t, kMinTemperature, kMaxTemperature);
  if (clamped != t && info != nullptr) {
    std::ostringstream msg;
    msg << what << " temperature " << t << " clamped to " << clamped;
    info->warnings.push_back(msg.str());
  }
  return clamped;
}

optim::FitOutcome run_minimize(const optim::Objective& objective, std::size_t dim,
                               const optim::FitOptions& opts) {
  std::vector<double> theta0(dim, std::log(opts.initial_temperature));
  optim::FitOutcome outcome = optim::minimize(objective, std::move(theta0), opts);
  if (!outcome.converged) {
    throw FitError("optimizer did not converge: " + std::to_string(outcome.iterations) +
                   " iterations, gradient max-norm " +
                   std::to_string(outcome.gradient_max_norm) + " > tolerance " +
                   std::to_string(opts.gradient_tolerance));
  }
  return outcome;
}

std::vector<double> uncalibrated_confidences(const data::LogitsDataset& ds) {
  std::vector<double> conf;
  conf.reserve(ds.size());
  for (const data::LogitRecord& r : ds.records()) {
    const auto probs = core::softmax_values(r.logits.span());
    conf.push_back(probs[core::argmax_tiebreak(probs)]);
  }
  return conf;
}

// Divisor vector for one sample of a dual model given its bin.
std::vector<double> dual_divisor(const DualTemp& dual, const core::LogitVector& z, int bin) {
  const double class_exp = 1.0 / dual.alpha;
  const double bin_exp = 1.0 / (2.0 - dual.alpha);
  const double bin_part =
      std::pow(dual.bin_branch.temperatures[static_cast<std::size_t>(bin)], bin_exp);
  std::vector<double> divisor(z.size());
  if (dual.fusion == FusionMode::kElementwise) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      divisor[j] = std::pow(dual.class_branch.temperatures[j], class_exp) * bin_part;
    }
  } else {
    const std::size_t pred = core::argmax_tiebreak(z.span());
    const double scalar = std::pow(dual.class_branch.temperatures[pred], class_exp) * bin_part;
    std::fill(divisor.begin(), divisor.end(), scalar);
  }
  return divisor;
}

int assign_bin(const BinWiseTemp& bw, double confidence) {
  return binning::assign_by_boundaries(bw.boundaries, confidence);
}

double model_nll(const TemperatureModel& model, const data::LogitsDataset& ds) {
  return metrics::mean_nll(ds, apply_logits(model, ds));
}

}  // namespace

TemperatureModel::TemperatureModel(int num_classes, Payload payload)
    : num_classes_(num_classes), payload_(std::move(payload)) {
  if (num_classes_ < 2) {
    throw InvalidInputError("temperature model needs at least 2 classes");
  }
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScalarTemp>) {
          require_positive_temps(std::span<const double>(&p.temperature, 1), "scalar");
        } else if constexpr (std::is_same_v<T, ClassWiseTemp>) {
          require_positive_temps(p.temperatures, "class-wise");
          if (p.temperatures.size() != static_cast<std::size_t>(num_classes_)) {
            throw InvalidInputError("class-wise model needs one temperature per class");
          }
        } else if constexpr (std::is_same_v<T, BinWiseTemp>) {
          validate_binwise(p);
        } else {
          require_positive_temps(p.class_branch.temperatures, "class-wise");
          if (p.class_branch.temperatures.size() != static_cast<std::size_t>(num_classes_)) {
            throw InvalidInputError("class-wise branch needs one temperature per class");
          }
          validate_binwise(p.bin_branch);
          validate_alpha(p.alpha);
        }
      },
      payload_);
}

std::string TemperatureModel::variant_name() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScalarTemp>) return "Scalar";
        if constexpr (std::is_same_v<T, ClassWiseTemp>) return "ClassWise";
        if constexpr (std::is_same_v<T, BinWiseTemp>) return "BinWise";
        return "Dual";
      },
      payload_);
}

std::string TemperatureModel::description() const {
  std::ostringstream out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScalarTemp>) {
          out << "Scalar(T=" << p.temperature << ")";
        } else if constexpr (std::is_same_v<T, ClassWiseTemp>) {
          out << "ClassWise(C=" << p.temperatures.size() << ")";
        } else if constexpr (std::is_same_v<T, BinWiseTemp>) {
          out << "BinWise(B=" << p.temperatures.size() << ", assignment="
              << (p.assignment == AssignMode::kBoundaries ? "boundaries" : "resort") << ")";
        } else {
          out << "Dual(alpha=" << p.alpha << ", fusion="
              << (p.fusion == FusionMode::kElementwise ? "elementwise" : "predicted-class")
              << ", C=" << p.class_branch.temperatures.size()
              << ", B=" << p.bin_branch.temperatures.size() << ")";
        }
      },
      payload_);
  return out.str();
}

TemperatureModel fit_scalar(const data::LogitsDataset& fit_ds, const optim::FitOptions& opts,
                            FitInfo* info) {
  const auto outcome = run_minimize(optim::scalar_nll_objective(fit_ds), 1, opts);
  FitInfo local;
  FitInfo* out = info != nullptr ? info : &local;
  const double fitted = clamp_temperature(std::exp(outcome.parameters[0]), "scalar", out);
  TemperatureModel model(fit_ds.num_classes(), ScalarTemp{fitted});
  out->nll_before = metrics::mean_nll(fit_ds);
  out->nll_after = model_nll(model, fit_ds);
  out->iterations = outcome.iterations;
  out->converged = outcome.converged;
  return model;
}

TemperatureModel fit_class_adaptive(const data::LogitsDataset& fit_ds,
                                    const optim::FitOptions& opts, FitInfo* info) {
  const std::size_t c = static_cast<std::size_t>(fit_ds.num_classes());
  const auto counts = data::class_counts(fit_ds);
  std::vector<std::size_t> missing, present;
  for (std::size_t k = 0; k < c; ++k) {
    (counts[k] == 0 ? missing : present).push_back(k);
  }

  FitInfo local;
  FitInfo* out = info != nullptr ? info : &local;
  std::vector<double> temps(c, 0.0);
  int iterations = 0;

  if (missing.empty()) {
    const auto outcome = run_minimize(optim::classwise_nll_objective(fit_ds), c, opts);
    for (std::size_t k = 0; k < c; ++k) temps[k] = std::exp(outcome.parameters[k]);
    iterations = outcome.iterations;
  } else {
    // Classes unseen in the fit split inherit the scalar-fit temperature.
    FitInfo scalar_info;
    const TemperatureModel scalar_model = fit_scalar(fit_ds, opts, &scalar_info);
    const double pinned = std::get<ScalarTemp>(scalar_model.payload()).temperature;
    iterations += scalar_info.iterations;
    out->warnings.insert(out->warnings.end(), scalar_info.warnings.begin(),
                         scalar_info.warnings.end());
    std::vector<double> base(c, std::log(pinned));
    for (std::size_t k : present) base[k] = std::log(opts.initial_temperature);
    auto reduced = optim::restrict_parameters(optim::classwise_nll_objective(fit_ds), base, present);
    std::vector<double> theta0(present.size(), std::log(opts.initial_temperature));
    const auto outcome = optim::minimize(reduced, std::move(theta0), opts);
    if (!outcome.converged) {
      throw FitError("class-wise fit did not converge (gradient max-norm " +
                     std::to_string(outcome.gradient_max_norm) + ")");
    }
    iterations += outcome.iterations;
    for (std::size_t k = 0; k < c; ++k) temps[k] = pinned;
    for (std::size_t j = 0; j < present.size(); ++j) {
      temps[present[j]] = std::exp(outcome.parameters[j]);
    }
    for (std::size_t k : missing) {
      out->warnings.push_back("class " + std::to_string(k) +
                              " has no fit samples; temperature pinned to scalar fit " +
                              std::to_string(pinned));
    }
  }

  bool clamped = false;
  for (std::size_t k = 0; k < c; ++k) {
    const double t = clamp_temperature(temps[k], "class " + std::to_string(k), out);
    clamped = clamped || t != temps[k];
    temps[k] = t;
  }

  TemperatureModel model(fit_ds.num_classes(), ClassWiseTemp{std::move(temps)});
  if (clamped) {
    // A clamped vector can end up worse than the scalar fit even though
    // scalar models are nested in the class-wise family. Fall back when the
    // best representable per-class point loses to the scalar one.
    FitInfo scalar_info;
    const TemperatureModel scalar_model = fit_scalar(fit_ds, opts, &scalar_info);
    iterations += scalar_info.iterations;
    out->warnings.insert(out->warnings.end(), scalar_info.warnings.begin(),
                         scalar_info.warnings.end());
    if (model_nll(model, fit_ds) > scalar_info.nll_after) {
      const double pinned = std::get<ScalarTemp>(scalar_model.payload()).temperature;
      out->warnings.push_back(
          "class-wise fit degenerated under clamping; every class uses the scalar temperature " +
          std::to_string(pinned));
      model = TemperatureModel(fit_ds.num_classes(),
                               ClassWiseTemp{std::vector<double>(c, pinned)});
    }
  }

  out->nll_before = metrics::mean_nll(fit_ds);
  out->nll_after = model_nll(model, fit_ds);
  out->iterations = iterations;
  return model;
}

TemperatureModel fit_esbin(const data::LogitsDataset& fit_ds, int bins,
                           const optim::FitOptions& opts, FitInfo* info) {
  if (bins < 1 || static_cast<std::size_t>(bins) > fit_ds.size()) {
    throw InvalidInputError("esbin fit needs 1 <= bins <= N; got B=" + std::to_string(bins) +
                            ", N=" + std::to_string(fit_ds.size()));
  }
  const auto conf = uncalibrated_confidences(fit_ds);
  const auto part = binning::equal_count_partition(conf, bins);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(bins));
  for (std::size_t i = 0; i < conf.size(); ++i) {
    members[static_cast<std::size_t>(part.assignments[i])].push_back(i);
  }

  FitInfo local;
  FitInfo* out = info != nullptr ? info : &local;
  std::vector<double> temps(static_cast<std::size_t>(bins), 0.0);
  int iterations = 0;
  for (int b = 0; b < bins; ++b) {
    try {
      const auto outcome = run_minimize(
          optim::scalar_nll_objective(fit_ds, members[static_cast<std::size_t>(b)]), 1, opts);
      iterations += outcome.iterations;
      temps[static_cast<std::size_t>(b)] = clamp_temperature(
          std::exp(outcome.parameters[0]), "bin " + std::to_string(b), out);
    } catch (const FitError& e) {
      throw FitError("bin " + std::to_string(b) + ": " + e.what());
    }
  }

  TemperatureModel model(fit_ds.num_classes(),
                         BinWiseTemp{std::move(temps), part.boundaries, AssignMode::kBoundaries});
  out->nll_before = metrics::mean_nll(fit_ds);
  out->nll_after = model_nll(model, fit_ds);
  out->iterations = iterations;
  return model;
}

TemperatureModel fuse_dual(const TemperatureModel& class_model,
                           const TemperatureModel& bin_model, double alpha, FusionMode fusion) {
  validate_alpha(alpha);
  const auto* cw = std::get_if<ClassWiseTemp>(&class_model.payload());
  if (cw == nullptr) {
    throw InvalidInputError("dual fusion needs a ClassWise model for the class branch, got " +
                            class_model.variant_name());
  }
  const auto* bw = std::get_if<BinWiseTemp>(&bin_model.payload());
  if (bw == nullptr) {
    throw InvalidInputError("dual fusion needs a BinWise model for the bin branch, got " +
                            bin_model.variant_name());
  }
  if (class_model.num_classes() != bin_model.num_classes()) {
    throw DimensionError("branches disagree on class count: " +
                         std::to_string(class_model.num_classes()) + " vs " +
                         std::to_string(bin_model.num_classes()));
  }
  return TemperatureModel(class_model.num_classes(), DualTemp{*cw, *bw, alpha, fusion});
}

core::LogitVector apply_logits(const TemperatureModel& model, const core::LogitVector& z) {
  if (z.size() != static_cast<std::size_t>(model.num_classes())) {
    throw DimensionError("sample has " + std::to_string(z.size()) + " classes, model expects " +
                         std::to_string(model.num_classes()));
  }
  return std::visit(
      [&](const auto& p) -> core::LogitVector {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScalarTemp>) {
          return core::scale_logits(z, p.temperature);
        } else if constexpr (std::is_same_v<T, ClassWiseTemp>) {
          return core::scale_logits(z, p.temperatures);
        } else if constexpr (std::is_same_v<T, BinWiseTemp>) {
          if (p.assignment == AssignMode::kResort) {
            throw InvalidInputError(
                "resort assignment re-partitions the evaluation set; apply the model to a "
                "dataset instead of a single sample");
          }
          const auto probs = core::softmax_values(z.span());
          const int bin = assign_bin(p, probs[core::argmax_tiebreak(probs)]);
          return core::scale_logits(z, p.temperatures[static_cast<std::size_t>(bin)]);
        } else {
          if (p.bin_branch.assignment == AssignMode::kResort) {
            throw InvalidInputError(
                "resort assignment re-partitions the evaluation set; apply the model to a "
                "dataset instead of a single sample");
          }
          const auto probs = core::softmax_values(z.span());
          const int bin = assign_bin(p.bin_branch, probs[core::argmax_tiebreak(probs)]);
          return core::scale_logits(z, dual_divisor(p, z, bin));
        }
      },
      model.payload());
}

std::vector<core::LogitVector> apply_logits(const TemperatureModel& model,
                                            const data::LogitsDataset& ds) {
  if (ds.num_classes() != model.num_classes()) {
    throw DimensionError("dataset has " + std::to_string(ds.num_classes()) +
                         " classes, model expects " + std::to_string(model.num_classes()));
  }

  // Resort mode assigns bins by re-partitioning this dataset's own
  // uncalibrated confidences into equal-count bins.
  const BinWiseTemp* bw = nullptr;
  const DualTemp* dual = std::get_if<DualTemp>(&model.payload());
  if (dual != nullptr) {
    bw = &dual->bin_branch;
  } else {
    bw = std::get_if<BinWiseTemp>(&model.payload());
  }

  std::vector<core::LogitVector> out;
  out.reserve(ds.size());
  if (bw != nullptr && bw->assignment == AssignMode::kResort) {
    const int bins = static_cast<int>(bw->temperatures.size());
    if (static_cast<std::size_t>(bins) > ds.size()) {
      throw InvalidInputError("resort assignment needs at least B=" + std::to_string(bins) +
                              " samples, dataset has " + std::to_string(ds.size()));
    }
    const auto conf = uncalibrated_confidences(ds);
    const auto part = binning::equal_count_partition(conf, bins);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const int bin = part.assignments[i];
      if (dual != nullptr) {
        out.push_back(core::scale_logits(ds[i].logits, dual_divisor(*dual, ds[i].logits, bin)));
      } else {
        out.push_back(
            core::scale_logits(ds[i].logits, bw->temperatures[static_cast<std::size_t>(bin)]));
      }
    }
    return out;
  }

  for (const data::LogitRecord& r : ds.records()) {
    out.push_back(apply_logits(model, r.logits));
  }
  return out;
}

core::ProbVector apply(const TemperatureModel& model, const core::LogitVector& z) {
  return core::softmax(apply_logits(model, z));
}

std::vector<core::ProbVector> apply(const TemperatureModel& model,
                                    const data::LogitsDataset& ds) {
  std::vector<core::ProbVector> out;
  out.reserve(ds.size());
  for (core::LogitVector& z : apply_logits(model, ds)) {
    out.push_back(core::softmax(z));
  }
  return out;
}

metrics::CalibrationReport evaluate(const TemperatureModel& model, const data::LogitsDataset& ds,
                                    int metric_bins) {
  return metrics::make_report(ds, apply_logits(model, ds), metric_bins, model.description());
}

SweepResult sweep_alpha(const TemperatureModel& class_model, const TemperatureModel& bin_model,
                        const data::LogitsDataset& eval_ds, std::span<const double> grid,
                        int metric_bins, FusionMode fusion) {
  if (grid.empty()) {
    throw InvalidInputError("alpha grid is empty");
  }
  SweepResult result;
  for (double alpha : grid) {
    const TemperatureModel dual = fuse_dual(class_model, bin_model, alpha, fusion);
    const metrics::CalibrationReport rep = evaluate(dual, eval_ds, metric_bins);
    result.rows.push_back(SweepRow{alpha, rep.ece, rep.esbin_ece, rep.accuracy, rep.mean_nll});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].ece < result.rows[best].ece) best = i;
  }
  result.best_alpha = result.rows[best].alpha;
  result.best_ece = result.rows[best].ece;
  return result;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(static_cast<double>(k) / 10.0);
  return grid;
}

}  // namespace ltcal::calibrate
