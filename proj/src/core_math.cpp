#include "ltcal/core_math.hpp"

#include <algorithm>
#include <cmath>

#include "ltcal/errors.hpp"

namespace ltcal::core {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw InvalidInputError(std::string(what) + " contains a non-finite entry");
    }
  }
}

}  // namespace

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InvalidInputError("logit vector needs at least 2 classes, got " +
                            std::to_string(values_.size()));
  }
  require_finite(values_, "logit vector");
}

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InvalidInputError("probability vector needs at least 2 classes");
  }
  double sum = 0.0;
  for (double p : values_) {
    if (!(p >= 0.0) || p > 1.0) {
      throw InvalidInputError("probability entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidInputError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

std::size_t argmax_tiebreak(std::span<const double> v) {
  if (v.empty()) {
    throw InvalidInputError("argmax of an empty vector");
  }
  require_finite(v, "argmax input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

std::vector<double> softmax_values(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

ProbVector softmax(const LogitVector& z) { return ProbVector(softmax_values(z.span())); }

std::vector<double> log_softmax(const LogitVector& z) {
  const double lse = log_sum_exp(z.span());
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

double nll(const LogitVector& z, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= z.size()) {
    throw InvalidInputError("label " + std::to_string(label) + " out of range [0, " +
                            std::to_string(z.size()) + ")");
  }
  return log_sum_exp(z.span()) - z[static_cast<std::size_t>(label)];
}

LogitVector scale_logits(const LogitVector& z, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidInputError("temperature must be strictly positive and finite");
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] / temperature;
  return LogitVector(std::move(out));
}

LogitVector scale_logits(const LogitVector& z, std::span<const double> temperatures) {
  if (temperatures.size() != z.size()) {
    throw InvalidInputError("temperature vector length " + std::to_string(temperatures.size()) +
                            " does not match " + std::to_string(z.size()) + " classes");
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(temperatures[i] > 0.0) || !std::isfinite(temperatures[i])) {
      throw InvalidInputError("temperature must be strictly positive and finite");
    }
    out[i] = z[i] / temperatures[i];
  }
  return LogitVector(std::move(out));
}

Prediction predict(const ProbVector& p) {
  const std::size_t idx = argmax_tiebreak(p.span());
  return Prediction{idx, p[idx]};
}

}  // namespace ltcal::core
