#pragma once

#include <span>
#include <vector>

namespace ltcal::binning {

enum class BinMode { kEqualWidth, kEqualCount };

// A partition of samples into confidence bins.
//
// assignments holds one bin index per sample, in input order. boundaries
// holds the B-1 interior thresholds: fixed edges k/B for equal-width bins,
// midpoints between adjacent sorted confidences at the bin seams for
// equal-count bins. Boundaries transfer the partition to unseen samples via
// assign_by_boundaries.
struct BinPartition {
  BinMode mode;
  int num_bins;
  std::vector<int> assignments;
  std::vector<double> boundaries;
};

// Left-closed bins [k/B, (k+1)/B) over [0, 1]; the last bin closes at 1.
BinPartition equal_width_partition(std::span<const double> confidences, int num_bins);

// Stable sort by (confidence, original index); with N = qB + r the first r
// bins take q+1 samples and the rest take q.
BinPartition equal_count_partition(std::span<const double> confidences, int num_bins);

// Smallest k with confidence <= boundaries[k], else B-1. Total over [0, 1]:
// values beyond the trained range clamp to the end bins.
int assign_by_boundaries(std::span<const double> boundaries, double confidence);

}  // namespace ltcal::binning
