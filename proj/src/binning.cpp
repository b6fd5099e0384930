#include "ltcal/binning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltcal/errors.hpp"

namespace ltcal::binning {

BinPartition equal_width_partition(std::span<const double> confidences, int num_bins) {
  if (num_bins < 1) {
    throw InvalidInputError("equal-width binning needs num_bins >= 1, got " +
                            std::to_string(num_bins));
  }
  BinPartition part{BinMode::kEqualWidth, num_bins, {}, {}};
  part.assignments.reserve(confidences.size());
  const double b = static_cast<double>(num_bins);
  for (double p : confidences) {
    int bin = static_cast<int>(std::floor(p * b));
    bin = std::clamp(bin, 0, num_bins - 1);
    part.assignments.push_back(bin);
  }
  part.boundaries.reserve(static_cast<std::size_t>(num_bins) - 1);
  for (int k = 1; k < num_bins; ++k) {
    part.boundaries.push_back(static_cast<double>(k) / b);
  }
  return part;
}

BinPartition equal_count_partition(std::span<const double> confidences, int num_bins) {
  const std::size_t n = confidences.size();
  if (num_bins < 1) {
    throw InvalidInputError("equal-count binning needs num_bins >= 1, got " +
                            std::to_string(num_bins));
  }
  if (static_cast<std::size_t>(num_bins) > n) {
    throw InvalidInputError("equal-count binning needs num_bins <= N; got B=" +
                            std::to_string(num_bins) + ", N=" + std::to_string(n));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (confidences[a] != confidences[b]) return confidences[a] < confidences[b];
    return a < b;
  });

  BinPartition part{BinMode::kEqualCount, num_bins, std::vector<int>(n, 0), {}};
  const std::size_t q = n / static_cast<std::size_t>(num_bins);
  const std::size_t r = n % static_cast<std::size_t>(num_bins);
  std::size_t pos = 0;
  for (int bin = 0; bin < num_bins; ++bin) {
    const std::size_t size = q + (static_cast<std::size_t>(bin) < r ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) {
      part.assignments[order[pos + k]] = bin;
    }
    pos += size;
    if (bin + 1 < num_bins) {
      part.boundaries.push_back((confidences[order[pos - 1]] + confidences[order[pos]]) / 2.0);
    }
  }
  return part;
}

int assign_by_boundaries(std::span<const double> boundaries, double confidence) {
  const auto it = std::lower_bound(boundaries.begin(), boundaries.end(), confidence);
  return static_cast<int>(it - boundaries.begin());
}

}  // namespace ltcal::binning
