#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ltcal::core {

// Raw classifier scores for one sample. At least two classes, all entries
// finite; violations are rejected at construction.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> span() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// A probability vector: entries in [0, 1], summing to 1 within 1e-12.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> span() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// Predicted class index and the probability assigned to it.
struct Prediction {
  std::size_t predicted_class;
  double confidence;
};

// Index of the maximum; exact ties resolve to the lowest index.
std::size_t argmax_tiebreak(std::span<const double> v);

// log(sum_j exp(v_j)), computed with a max shift.
double log_sum_exp(std::span<const double> v);

// Max-shifted softmax over a raw span. No validation; callers own the input.
std::vector<double> softmax_values(std::span<const double> z);

ProbVector softmax(const LogitVector& z);

// Elementwise log of softmax(z) via the log-sum-exp shift.
std::vector<double> log_softmax(const LogitVector& z);

// -log_softmax(z)[label], in nats. Always >= 0.
double nll(const LogitVector& z, int label);

// z / T with a single positive temperature.
LogitVector scale_logits(const LogitVector& z, double temperature);

// Elementwise z_j / T_j; all temperatures strictly positive, length C.
LogitVector scale_logits(const LogitVector& z, std::span<const double> temperatures);

Prediction predict(const ProbVector& p);

}  // namespace ltcal::core
