#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ltcal/dataset.hpp"

namespace ltcal::optim {

// Options for one temperature fit. Temperatures are optimized as
// log-temperatures (T = exp(theta)), so the search space is unconstrained.
struct FitOptions {
  double initial_temperature = 1.5;
  double gradient_tolerance = 1e-8;  // max-norm of the gradient at exit
  int max_iterations = 500;
  int history_size = 10;              // quasi-Newton curvature pairs kept
  double sufficient_decrease = 1e-4;  // line-search Armijo constant
};

struct FitOutcome {
  std::vector<double> parameters;  // log-temperatures at exit
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;  // implies gradient_max_norm <= gradient_tolerance
  double gradient_max_norm = 0.0;
};

// Evaluates the objective at theta and fills the gradient (same length).
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

// Limited-memory quasi-Newton descent with a backtracking line search
// enforcing sufficient decrease. Accepted iterates have strictly decreasing
// objective values; the result never exceeds the objective at theta0.
// Throws FitError if the line search fails before any progress.
FitOutcome minimize(const Objective& objective, std::vector<double> theta0,
                    const FitOptions& opts);

// Mean NLL of softmax(z * exp(-theta)) over the dataset, one shared
// log-temperature. Gradient is analytic.
Objective scalar_nll_objective(const data::LogitsDataset& ds);

// Same, restricted to the given record indices (one bin's sub-problem).
Objective scalar_nll_objective(const data::LogitsDataset& ds, std::vector<std::size_t> subset);

// Mean NLL with one log-temperature per class, applied elementwise to every
// sample's logits. theta has length C.
Objective classwise_nll_objective(const data::LogitsDataset& ds);

// Reduce an objective to the coordinates in free_indices; the remaining
// coordinates stay pinned at base_theta.
Objective restrict_parameters(Objective full, std::vector<double> base_theta,
                              std::vector<std::size_t> free_indices);

// Max over coordinates of the mismatch between the analytic gradient and a
// central finite difference, relative to max(1, |analytic|, |numeric|).
double gradient_check(const Objective& objective, std::span<const double> theta,
                      double step = 1e-5);

}  // namespace ltcal::optim
