#pragma once

#include <string>
#include <vector>

#include "ltcal/binning.hpp"
#include "ltcal/core_math.hpp"
#include "ltcal/dataset.hpp"

namespace ltcal::metrics {

// One reliability-diagram row: per-bin sample count, mean accuracy, mean
// confidence, and the bin's confidence range (fixed edges for equal-width
// bins, observed min/max for equal-count bins).
struct ReliabilityRow {
  int bin = 0;
  std::size_t count = 0;
  double accuracy = 0.0;
  double confidence = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Everything measured for one (model, dataset) pair. ECE values are percents
// in [0, 100]; NLL is in nats. Stored unrounded.
struct CalibrationReport {
  std::string dataset_name;
  std::string model;
  std::size_t n = 0;
  double accuracy = 0.0;
  double mean_nll = 0.0;
  double ece = 0.0;
  double esbin_ece = 0.0;
  int ece_bins = 0;
  int esbin_bins = 0;
  std::vector<ReliabilityRow> equal_width;
  std::vector<ReliabilityRow> equal_count;
};

double accuracy(const data::LogitsDataset& ds, const std::vector<core::ProbVector>& probs);

// Equal-width expected calibration error, percent. Empty bins contribute 0.
double ece(const data::LogitsDataset& ds, const std::vector<core::ProbVector>& probs, int bins);

// Equal-count expected calibration error, percent.
double esbin_ece(const data::LogitsDataset& ds, const std::vector<core::ProbVector>& probs,
                 int bins);

// Mean NLL of the true labels under the dataset's own logits, in nats.
double mean_nll(const data::LogitsDataset& ds);

// Mean NLL under externally scaled logits (one vector per record).
double mean_nll(const data::LogitsDataset& ds, const std::vector<core::LogitVector>& scaled);

// Per-bin reliability rows in bin order. Equal-width mode skips empty bins.
// Both scalar metrics are exact re-aggregations of these rows.
std::vector<ReliabilityRow> reliability_data(const data::LogitsDataset& ds,
                                             const std::vector<core::ProbVector>& probs, int bins,
                                             binning::BinMode mode);

// Sum_b (count_b/N) |acc_b - conf_b| * 100 over rows.
double ece_from_rows(const std::vector<ReliabilityRow>& rows, std::size_t n);

CalibrationReport make_report(const data::LogitsDataset& ds,
                              const std::vector<core::LogitVector>& scaled_logits,
                              int metric_bins, const std::string& model_desc);

}  // namespace ltcal::metrics
