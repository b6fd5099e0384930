#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ltcal/core_math.hpp"
#include "ltcal/dataset.hpp"
#include "ltcal/metrics.hpp"
#include "ltcal/optim.hpp"

namespace ltcal::calibrate {

// Fitted temperatures are clamped to this range; a clamp is reported as a
// warning, not an error, so degenerate fits (single-sample bins, separable
// data) stay usable.
constexpr double kMinTemperature = 0.05;
constexpr double kMaxTemperature = 50.0;

// How a bin-wise model places an unseen sample into a bin: by the boundaries
// learned on the fit split (default; each prediction is independent), or by
// re-partitioning the evaluation set itself into equal-count bins.
enum class AssignMode { kBoundaries, kResort };

// How the dual model combines the two branch temperatures: one divisor per
// class logit (default), or a single scalar divisor picked by the
// uncalibrated predicted class.
enum class FusionMode { kElementwise, kPredictedClass };

struct ScalarTemp {
  double temperature = 1.0;
};

struct ClassWiseTemp {
  std::vector<double> temperatures;  // length C
};

struct BinWiseTemp {
  std::vector<double> temperatures;  // length B
  std::vector<double> boundaries;    // B-1 non-decreasing thresholds
  AssignMode assignment = AssignMode::kBoundaries;
};

struct DualTemp {
  ClassWiseTemp class_branch;
  BinWiseTemp bin_branch;
  double alpha = 1.0;  // strictly inside (0, 2)
  FusionMode fusion = FusionMode::kElementwise;
};

// A fitted temperature model in one of the four variants. Invariants
// (positive finite temperatures, ordered boundaries, alpha range, matching
// lengths) are enforced at construction.
class TemperatureModel {
 public:
  using Payload = std::variant<ScalarTemp, ClassWiseTemp, BinWiseTemp, DualTemp>;

  TemperatureModel(int num_classes, Payload payload);

  int num_classes() const noexcept { return num_classes_; }
  const Payload& payload() const noexcept { return payload_; }
  std::string variant_name() const;
  std::string description() const;

 private:
  int num_classes_;
  Payload payload_;
};

// Diagnostics from one fit.
struct FitInfo {
  double nll_before = 0.0;  // fit-split mean NLL at T = 1
  double nll_after = 0.0;   // fit-split mean NLL under the fitted model
  int iterations = 0;       // optimizer iterations, summed over sub-fits
  bool converged = true;
  std::vector<std::string> warnings;
};

// Scalar temperature minimizing fit-split mean NLL.
TemperatureModel fit_scalar(const data::LogitsDataset& fit_ds, const optim::FitOptions& opts,
                            FitInfo* info = nullptr);

// One temperature per class, applied elementwise to every sample. Classes
// absent from the fit split are pinned to the scalar-fit temperature, with a
// warning.
TemperatureModel fit_class_adaptive(const data::LogitsDataset& fit_ds,
                                    const optim::FitOptions& opts, FitInfo* info = nullptr);

// Equal-count confidence bins on the fit split, one scalar temperature per
// bin; boundaries are kept for test-time assignment.
TemperatureModel fit_esbin(const data::LogitsDataset& fit_ds, int bins,
                           const optim::FitOptions& opts, FitInfo* info = nullptr);

// Bundle a class-wise and a bin-wise model into a dual model with fusion
// hyperparameter alpha; no refitting happens. The per-sample divisor is
// (T_c)^(1/alpha) * (T_b)^(1/(2-alpha)).
TemperatureModel fuse_dual(const TemperatureModel& class_model,
                           const TemperatureModel& bin_model, double alpha,
                           FusionMode fusion = FusionMode::kElementwise);

// Scaled logits for one sample. Bin-wise and dual models in resort mode need
// the whole evaluation set and reject single-sample application.
core::LogitVector apply_logits(const TemperatureModel& model, const core::LogitVector& z);

std::vector<core::LogitVector> apply_logits(const TemperatureModel& model,
                                            const data::LogitsDataset& ds);

// softmax(apply_logits(...)).
core::ProbVector apply(const TemperatureModel& model, const core::LogitVector& z);

std::vector<core::ProbVector> apply(const TemperatureModel& model,
                                    const data::LogitsDataset& ds);

// Apply the model to every sample and measure everything.
metrics::CalibrationReport evaluate(const TemperatureModel& model, const data::LogitsDataset& ds,
                                    int metric_bins);

struct SweepRow {
  double alpha = 0.0;
  double ece = 0.0;
  double esbin_ece = 0.0;
  double accuracy = 0.0;
  double mean_nll = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order
  double best_alpha = 0.0;     // argmin ECE; first on ties
  double best_ece = 0.0;
};

// Fuse the branches at each grid alpha and evaluate on eval_ds.
SweepResult sweep_alpha(const TemperatureModel& class_model, const TemperatureModel& bin_model,
                        const data::LogitsDataset& eval_ds, std::span<const double> grid,
                        int metric_bins, FusionMode fusion = FusionMode::kElementwise);

// 0.1, 0.2, ..., 1.9.
std::vector<double> default_alpha_grid();

}  // namespace ltcal::calibrate
