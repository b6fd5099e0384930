#include "ltcal/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ltcal/errors.hpp"

namespace ltcal::optim {

namespace {

// Longest line-search step, in log-temperature units per coordinate.
constexpr double kMaxStepInfNorm = 20.0;
constexpr int kMaxBacktracks = 60;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void validate(const FitOptions& opts) {
  if (!(opts.initial_temperature > 0.0) || !std::isfinite(opts.initial_temperature)) {
    throw InvalidInputError("initial_temperature must be > 0");
  }
  if (!(opts.gradient_tolerance > 0.0)) {
    throw InvalidInputError("gradient_tolerance must be > 0");
  }
  if (opts.max_iterations < 1) {
    throw InvalidInputError("max_iterations must be >= 1");
  }
  if (opts.history_size < 1) {
    throw InvalidInputError("history_size must be >= 1");
  }
  if (!(opts.sufficient_decrease > 0.0) || !(opts.sufficient_decrease < 1.0)) {
    throw InvalidInputError("sufficient_decrease must lie in (0, 1)");
  }
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion; returns the descent direction for gradient g.
std::vector<double> lbfgs_direction(const std::deque<CurvaturePair>& history,
                                    std::span<const double> g) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(history.size());
  for (std::size_t k = history.size(); k-- > 0;) {
    alpha[k] = history[k].rho * dot(history[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * history[k].y[i];
  }
  if (!history.empty()) {
    const CurvaturePair& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& x : q) x *= gamma;
  }
  for (std::size_t k = 0; k < history.size(); ++k) {
    const double beta = history[k].rho * dot(history[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * history[k].s[i];
  }
  for (double& x : q) x = -x;
  return q;
}

}  // namespace

FitOutcome minimize(const Objective& objective, std::vector<double> theta,
                    const FitOptions& opts) {
  validate(opts);
  const std::size_t n = theta.size();
  if (n == 0) {
    throw InvalidInputError("minimize needs at least one parameter");
  }

  std::vector<double> grad(n), trial(n), trial_grad(n);
  double fx = objective(theta, grad);
  if (!std::isfinite(fx) || !all_finite(grad)) {
    throw FitError("objective not finite at the initial point");
  }
  double gnorm = max_norm(grad);
  if (gnorm <= opts.gradient_tolerance) {
    return FitOutcome{std::move(theta), fx, 0, true, gnorm};
  }

  // Best point visited so far; the returned iterate never regresses past it,
  // so the result cannot exceed the objective at theta0.
  const double initial_fx = fx;
  std::vector<double> best_theta = theta;
  std::vector<double> best_grad = grad;
  double best_fx = fx;

  const auto finish = [&](int iterations, bool hit_tolerance) {
    if (fx > best_fx) {
      theta = best_theta;
      grad = best_grad;
      fx = best_fx;
      gnorm = max_norm(grad);
    }
    const bool converged = hit_tolerance || gnorm <= opts.gradient_tolerance;
    return FitOutcome{std::move(theta), fx, iterations, converged, gnorm};
  };

  std::deque<CurvaturePair> history;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    std::vector<double> dir = lbfgs_direction(history, grad);
    double dg = dot(dir, grad);
    if (!(dg < 0.0) || !all_finite(dir)) {
      // Not a descent direction; fall back to steepest descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
      dg = dot(dir, grad);
    }

    // Sufficient decrease, with an absolute slack at the rounding-noise scale
    // so the terminal phase can step onto the flat bottom of the objective.
    const double noise_slack = 1e-14 * (1.0 + std::abs(fx));
    double step = std::min(1.0, kMaxStepInfNorm / std::max(max_norm(dir), 1e-300));
    bool accepted = false;
    double trial_fx = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = theta[i] + step * dir[i];
        moved = moved || trial[i] != theta[i];
      }
      if (!moved) break;  // step fell below representable movement
      trial_fx = objective(trial, trial_grad);
      if (std::isfinite(trial_fx) && all_finite(trial_grad) &&
          trial_fx <= fx + opts.sufficient_decrease * step * dg + noise_slack) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (iter == 1) {
        throw FitError("line search failed before any progress (gradient max-norm " +
                       std::to_string(gnorm) + ")");
      }
      return finish(iter - 1, false);
    }

    CurvaturePair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = trial[i] - theta[i];
      pair.y[i] = trial_grad[i] - grad[i];
    }
    const double sy = dot(pair.s, pair.y);
    const double s2 = std::sqrt(dot(pair.s, pair.s));
    const double y2 = std::sqrt(dot(pair.y, pair.y));
    if (sy > 1e-10 * s2 * y2) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > static_cast<std::size_t>(opts.history_size)) history.pop_front();
    }

    theta = trial;
    grad = trial_grad;
    fx = trial_fx;
    gnorm = max_norm(grad);
    if (fx < best_fx) {
      best_fx = fx;
      best_theta = theta;
      best_grad = grad;
    }
    if (gnorm <= opts.gradient_tolerance && fx <= initial_fx) {
      return FitOutcome{std::move(theta), fx, iter, true, gnorm};
    }
  }
  return finish(opts.max_iterations, false);
}

namespace {

// Per-sample contribution to the mean NLL and its log-temperature gradient.
// With u_j = z_j * exp(-theta_j): loss = lse(u) - u_label and
// d loss / d theta_j = (delta_{j,label} - p_j) * u_j where p = softmax(u).
struct NllAccumulator {
  explicit NllAccumulator(std::size_t c) : u(c), p(c) {}

  void add(const core::LogitVector& z, int label, std::span<const double> inv_temp_scale,
           double& value, std::span<double> grad_by_class) {
    const std::size_t c = z.size();
    for (std::size_t j = 0; j < c; ++j) u[j] = z[j] * inv_temp_scale[j];
    const double m = *std::max_element(u.begin(), u.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = std::exp(u[j] - m);
      sum += p[j];
    }
    const double lse = m + std::log(sum);
    value += lse - u[static_cast<std::size_t>(label)];
    for (std::size_t j = 0; j < c; ++j) {
      const double delta = (j == static_cast<std::size_t>(label)) ? 1.0 : 0.0;
      grad_by_class[j] += (delta - p[j] / sum) * u[j];
    }
  }

  std::vector<double> u, p;
};

}  // namespace

Objective scalar_nll_objective(const data::LogitsDataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) all[i] = i;
  return scalar_nll_objective(ds, std::move(all));
}

Objective scalar_nll_objective(const data::LogitsDataset& ds, std::vector<std::size_t> subset) {
  if (subset.empty()) {
    throw InvalidInputError("scalar NLL objective needs a non-empty subset");
  }
  for (std::size_t i : subset) {
    if (i >= ds.size()) {
      throw InvalidInputError("subset index " + std::to_string(i) + " out of range");
    }
  }
  const std::size_t c = static_cast<std::size_t>(ds.num_classes());
  return [&ds, subset = std::move(subset), c](std::span<const double> theta,
                                              std::span<double> grad) {
    const double scale = std::exp(-theta[0]);
    std::vector<double> inv_scale(c, scale), class_grad(c, 0.0);
    NllAccumulator acc(c);
    double value = 0.0;
    for (std::size_t i : subset) {
      acc.add(ds[i].logits, ds[i].label, inv_scale, value, class_grad);
    }
    const double n = static_cast<double>(subset.size());
    double g = 0.0;
    for (double gj : class_grad) g += gj;
    grad[0] = g / n;
    return value / n;
  };
}

Objective classwise_nll_objective(const data::LogitsDataset& ds) {
  const std::size_t c = static_cast<std::size_t>(ds.num_classes());
  return [&ds, c](std::span<const double> theta, std::span<double> grad) {
    std::vector<double> inv_scale(c);
    for (std::size_t j = 0; j < c; ++j) inv_scale[j] = std::exp(-theta[j]);
    std::fill(grad.begin(), grad.end(), 0.0);
    NllAccumulator acc(c);
    double value = 0.0;
    for (const data::LogitRecord& r : ds.records()) {
      acc.add(r.logits, r.label, inv_scale, value, grad);
    }
    const double n = static_cast<double>(ds.size());
    for (double& g : grad) g /= n;
    return value / n;
  };
}

Objective restrict_parameters(Objective full, std::vector<double> base_theta,
                              std::vector<std::size_t> free_indices) {
  for (std::size_t i : free_indices) {
    if (i >= base_theta.size()) {
      throw InvalidInputError("free index " + std::to_string(i) + " out of range");
    }
  }
  return [full = std::move(full), base = std::move(base_theta),
          idx = std::move(free_indices)](std::span<const double> theta,
                                         std::span<double> grad) mutable {
    std::vector<double> full_theta = base;
    for (std::size_t k = 0; k < idx.size(); ++k) full_theta[idx[k]] = theta[k];
    std::vector<double> full_grad(base.size(), 0.0);
    const double value = full(full_theta, full_grad);
    for (std::size_t k = 0; k < idx.size(); ++k) grad[k] = full_grad[idx[k]];
    return value;
  };
}

double gradient_check(const Objective& objective, std::span<const double> theta, double step) {
  const std::size_t n = theta.size();
  std::vector<double> analytic(n), scratch(n), point(theta.begin(), theta.end());
  objective(point, analytic);

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    point[i] = theta[i] + step;
    const double hi = objective(point, scratch);
    point[i] = theta[i] - step;
    const double lo = objective(point, scratch);
    point[i] = theta[i];
    const double numeric = (hi - lo) / (2.0 * step);
    const double err = std::abs(analytic[i] - numeric) /
                       std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace ltcal::optim
