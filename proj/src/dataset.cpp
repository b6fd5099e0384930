#include "ltcal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltcal/errors.hpp"
#include "ltcal/rng.hpp"

namespace ltcal::data {

LogitsDataset::LogitsDataset(std::vector<LogitRecord> records, int num_classes, std::string name)
    : records_(std::move(records)), num_classes_(num_classes), name_(std::move(name)) {
  if (records_.empty()) {
    throw InvalidInputError("dataset '" + name_ + "' is empty");
  }
  if (num_classes_ < 2) {
    throw InvalidInputError("dataset needs at least 2 classes");
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const LogitRecord& r = records_[i];
    if (r.logits.size() != static_cast<std::size_t>(num_classes_)) {
      throw InvalidInputError("record " + std::to_string(i) + " has " +
                              std::to_string(r.logits.size()) + " logits, expected " +
                              std::to_string(num_classes_));
    }
    if (r.label < 0 || r.label >= num_classes_) {
      throw InvalidInputError("record " + std::to_string(i) + " label " +
                              std::to_string(r.label) + " out of range [0, " +
                              std::to_string(num_classes_) + ")");
    }
  }
}

std::vector<std::size_t> class_counts(const LogitsDataset& ds) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes()), 0);
  for (const LogitRecord& r : ds.records()) counts[static_cast<std::size_t>(r.label)]++;
  return counts;
}

ClassStats class_stats(const LogitsDataset& ds) {
  const std::size_t c = static_cast<std::size_t>(ds.num_classes());
  ClassStats stats(c);
  std::vector<double> correct(c, 0.0), logit_sum(c, 0.0);
  std::vector<double> conf_pred_sum(c, 0.0), conf_true_sum(c, 0.0);
  std::vector<std::size_t> pred_count(c, 0);

  for (const LogitRecord& r : ds.records()) {
    const auto probs = core::softmax_values(r.logits.span());
    const std::size_t pred = core::argmax_tiebreak(probs);
    const double conf = probs[pred];
    const std::size_t truth = static_cast<std::size_t>(r.label);

    stats[truth].count++;
    if (pred == truth) correct[truth] += 1.0;
    logit_sum[truth] += *std::max_element(r.logits.values().begin(), r.logits.values().end());
    conf_true_sum[truth] += conf;
    pred_count[pred]++;
    conf_pred_sum[pred] += conf;
  }

  for (std::size_t k = 0; k < c; ++k) {
    if (stats[k].count > 0) {
      const double n = static_cast<double>(stats[k].count);
      stats[k].accuracy = correct[k] / n;
      stats[k].mean_confidence_true = conf_true_sum[k] / n;
      stats[k].mean_max_logit = logit_sum[k] / n;
    }
    if (pred_count[k] > 0) {
      stats[k].mean_confidence = conf_pred_sum[k] / static_cast<double>(pred_count[k]);
    }
  }
  return stats;
}

double imbalance_factor(const LogitsDataset& ds) {
  const auto counts = class_counts(ds);
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  if (*lo == 0) {
    throw InvalidInputError("imbalance factor undefined: class " +
                            std::to_string(lo - counts.begin()) + " has no samples");
  }
  return static_cast<double>(*hi) / static_cast<double>(*lo);
}

std::pair<LogitsDataset, LogitsDataset> split(const LogitsDataset& ds, double fraction,
                                              std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw InvalidInputError("split fraction must lie strictly inside (0, 1)");
  }
  const std::size_t n = ds.size();
  const std::size_t total_fit =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (total_fit == 0 || total_fit >= n) {
    throw InvalidInputError("split fraction " + std::to_string(fraction) +
                            " leaves one side of " + std::to_string(n) + " records empty");
  }

  // Seeded Fisher-Yates decides membership; output keeps original order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.next_index(i + 1)]);
  }

  const auto counts = class_counts(ds);
  const std::size_t c = counts.size();
  std::size_t present = 0;
  for (auto k : counts) present += (k > 0) ? 1 : 0;
  if (total_fit < present) {
    throw InvalidInputError("fit side of " + std::to_string(total_fit) +
                            " records cannot cover all " + std::to_string(present) + " classes");
  }

  // Per-class quota: floor(fraction * n_c), at least 1 for present classes,
  // then largest-remainder adjustment until the quotas sum to total_fit.
  std::vector<std::size_t> quota(c, 0);
  std::vector<double> frac_part(c, 0.0);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < c; ++k) {
    if (counts[k] == 0) continue;
    const double target = fraction * static_cast<double>(counts[k]);
    quota[k] = std::min(counts[k], std::max<std::size_t>(1, static_cast<std::size_t>(target)));
    frac_part[k] = target - std::floor(target);
    assigned += quota[k];
  }
  std::vector<std::size_t> by_remainder;
  for (std::size_t k = 0; k < c; ++k) {
    if (counts[k] > 0) by_remainder.push_back(k);
  }
  std::sort(by_remainder.begin(), by_remainder.end(), [&](std::size_t a, std::size_t b) {
    if (frac_part[a] != frac_part[b]) return frac_part[a] > frac_part[b];
    return a < b;
  });
  std::size_t cursor = 0;
  while (assigned < total_fit) {
    const std::size_t k = by_remainder[cursor % by_remainder.size()];
    ++cursor;
    if (quota[k] < counts[k]) {
      quota[k]++;
      assigned++;
    }
    if (cursor > 4 * n) break;  // every quota at its cap
  }
  cursor = 0;
  while (assigned > total_fit) {
    const std::size_t k = by_remainder[by_remainder.size() - 1 - cursor % by_remainder.size()];
    ++cursor;
    if (quota[k] > 1) {
      quota[k]--;
      assigned--;
    }
    if (cursor > 4 * n) break;
  }

  // First quota[c] shuffled occurrences of each class go to the fit side.
  std::vector<std::size_t> taken(c, 0);
  std::vector<bool> in_fit(n, false);
  for (std::size_t idx : order) {
    const std::size_t k = static_cast<std::size_t>(ds[idx].label);
    if (taken[k] < quota[k]) {
      taken[k]++;
      in_fit[idx] = true;
    }
  }

  std::vector<LogitRecord> fit_records, eval_records;
  for (std::size_t i = 0; i < n; ++i) {
    (in_fit[i] ? fit_records : eval_records).push_back(ds[i]);
  }
  if (fit_records.empty() || eval_records.empty()) {
    throw InvalidInputError("split produced an empty side");
  }
  return {LogitsDataset(std::move(fit_records), ds.num_classes(), ds.name() + ":fit"),
          LogitsDataset(std::move(eval_records), ds.num_classes(), ds.name() + ":eval")};
}

}  // namespace ltcal::data
