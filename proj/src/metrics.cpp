#include "ltcal/metrics.hpp"

#include <cmath>
#include <limits>

#include "ltcal/errors.hpp"

namespace ltcal::metrics {

namespace {

void check_lengths(const data::LogitsDataset& ds, std::size_t got, const char* what) {
  if (got != ds.size()) {
    throw InvalidInputError(std::string(what) + " length " + std::to_string(got) +
                            " does not match dataset size " + std::to_string(ds.size()));
  }
}

struct SampleView {
  double confidence;
  double correct;
};

std::vector<SampleView> view_samples(const data::LogitsDataset& ds,
                                     const std::vector<core::ProbVector>& probs) {
  check_lengths(ds, probs.size(), "probability list");
  std::vector<SampleView> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (probs[i].size() != static_cast<std::size_t>(ds.num_classes())) {
      throw InvalidInputError("probability vector " + std::to_string(i) + " has " +
                              std::to_string(probs[i].size()) + " classes, expected " +
                              std::to_string(ds.num_classes()));
    }
    const std::size_t pred = core::argmax_tiebreak(probs[i].span());
    out.push_back(SampleView{probs[i][pred],
                             pred == static_cast<std::size_t>(ds[i].label) ? 1.0 : 0.0});
  }
  return out;
}

std::vector<ReliabilityRow> rows_from_partition(const std::vector<SampleView>& samples,
                                                const binning::BinPartition& part) {
  struct Acc {
    std::size_t count = 0;
    double correct_sum = 0.0;
    double conf_sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
  };
  std::vector<Acc> acc(static_cast<std::size_t>(part.num_bins));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Acc& a = acc[static_cast<std::size_t>(part.assignments[i])];
    a.count++;
    a.correct_sum += samples[i].correct;
    a.conf_sum += samples[i].confidence;
    a.lo = std::min(a.lo, samples[i].confidence);
    a.hi = std::max(a.hi, samples[i].confidence);
  }

  std::vector<ReliabilityRow> rows;
  for (int b = 0; b < part.num_bins; ++b) {
    const Acc& a = acc[static_cast<std::size_t>(b)];
    if (a.count == 0) continue;  // only possible in equal-width mode
    ReliabilityRow row;
    row.bin = b;
    row.count = a.count;
    row.accuracy = a.correct_sum / static_cast<double>(a.count);
    row.confidence = a.conf_sum / static_cast<double>(a.count);
    if (part.mode == binning::BinMode::kEqualWidth) {
      row.lo = static_cast<double>(b) / part.num_bins;
      row.hi = static_cast<double>(b + 1) / part.num_bins;
    } else {
      row.lo = a.lo;
      row.hi = a.hi;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> confidences_of(const std::vector<SampleView>& samples) {
  std::vector<double> conf;
  conf.reserve(samples.size());
  for (const SampleView& s : samples) conf.push_back(s.confidence);
  return conf;
}

}  // namespace

double accuracy(const data::LogitsDataset& ds, const std::vector<core::ProbVector>& probs) {
  const auto samples = view_samples(ds, probs);
  double correct = 0.0;
  for (const SampleView& s : samples) correct += s.correct;
  return correct / static_cast<double>(samples.size());
}

double ece_from_rows(const std::vector<ReliabilityRow>& rows, std::size_t n) {
  double total = 0.0;
  for (const ReliabilityRow& r : rows) {
    total += static_cast<double>(r.count) / static_cast<double>(n) *
             std::abs(r.accuracy - r.confidence);
  }
  return total * 100.0;
}

std::vector<ReliabilityRow> reliability_data(const data::LogitsDataset& ds,
                                             const std::vector<core::ProbVector>& probs, int bins,
                                             binning::BinMode mode) {
  const auto samples = view_samples(ds, probs);
  const auto conf = confidences_of(samples);
  const auto part = mode == binning::BinMode::kEqualWidth
                        ? binning::equal_width_partition(conf, bins)
                        : binning::equal_count_partition(conf, bins);
  return rows_from_partition(samples, part);
}

double ece(const data::LogitsDataset& ds, const std::vector<core::ProbVector>& probs, int bins) {
  return ece_from_rows(reliability_data(ds, probs, bins, binning::BinMode::kEqualWidth),
                       ds.size());
}

double esbin_ece(const data::LogitsDataset& ds, const std::vector<core::ProbVector>& probs,
                 int bins) {
  return ece_from_rows(reliability_data(ds, probs, bins, binning::BinMode::kEqualCount),
                       ds.size());
}

double mean_nll(const data::LogitsDataset& ds) {
  double total = 0.0;
  for (const data::LogitRecord& r : ds.records()) total += core::nll(r.logits, r.label);
  return total / static_cast<double>(ds.size());
}

double mean_nll(const data::LogitsDataset& ds, const std::vector<core::LogitVector>& scaled) {
  check_lengths(ds, scaled.size(), "scaled logits list");
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) total += core::nll(scaled[i], ds[i].label);
  return total / static_cast<double>(ds.size());
}

CalibrationReport make_report(const data::LogitsDataset& ds,
                              const std::vector<core::LogitVector>& scaled_logits,
                              int metric_bins, const std::string& model_desc) {
  check_lengths(ds, scaled_logits.size(), "scaled logits list");
  std::vector<core::ProbVector> probs;
  probs.reserve(ds.size());
  for (const core::LogitVector& z : scaled_logits) probs.push_back(core::softmax(z));

  CalibrationReport report;
  report.dataset_name = ds.name();
  report.model = model_desc;
  report.n = ds.size();
  report.accuracy = accuracy(ds, probs);
  report.mean_nll = mean_nll(ds, scaled_logits);
  report.ece_bins = metric_bins;
  report.esbin_bins = metric_bins;
  report.equal_width = reliability_data(ds, probs, metric_bins, binning::BinMode::kEqualWidth);
  report.equal_count = reliability_data(ds, probs, metric_bins, binning::BinMode::kEqualCount);
  report.ece = ece_from_rows(report.equal_width, report.n);
  report.esbin_ece = ece_from_rows(report.equal_count, report.n);
  return report;
}

}  // namespace ltcal::metrics
