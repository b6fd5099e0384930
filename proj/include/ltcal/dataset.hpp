#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltcal/core_math.hpp"

namespace ltcal::data {

struct LogitRecord {
  int label;
  core::LogitVector logits;
};

// Immutable labeled logit set. All records share the same class count,
// labels are in range, and the set is non-empty; record order is stable.
class LogitsDataset {
 public:
  LogitsDataset(std::vector<LogitRecord> records, int num_classes, std::string name);

  const std::vector<LogitRecord>& records() const noexcept { return records_; }
  const LogitRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  int num_classes() const noexcept { return num_classes_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::vector<LogitRecord> records_;
  int num_classes_;
  std::string name_;
};

// Per-class diagnostics. count, accuracy, and mean_max_logit group records by
// true label; mean_confidence groups by predicted class (the grouping used to
// pick temperatures at test time) with the true-label grouping alongside.
// Optionals are absent when the grouping has no members.
struct ClassStat {
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> mean_confidence;       // over records predicted as this class
  std::optional<double> mean_confidence_true;  // over records whose label is this class
  std::optional<double> mean_max_logit;        // over records whose label is this class
};

using ClassStats = std::vector<ClassStat>;

ClassStats class_stats(const LogitsDataset& ds);

// max class count / min class count over true labels.
double imbalance_factor(const LogitsDataset& ds);

// Deterministic stratified split into (fit, eval). A seeded shuffle picks the
// members; each side keeps the original record order. Every class present in
// the dataset lands in the fit side with at least one sample.
std::pair<LogitsDataset, LogitsDataset> split(const LogitsDataset& ds, double fraction,
                                              std::uint64_t seed);

// Number of records per true label.
std::vector<std::size_t> class_counts(const LogitsDataset& ds);

}  // namespace ltcal::data
