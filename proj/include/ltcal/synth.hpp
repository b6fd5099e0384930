#pragma once

#include <cstdint>
#include <string>

#include "ltcal/dataset.hpp"

namespace ltcal::data {

// Configuration for the synthetic long-tailed logits generator.
//
// Class c receives round(head_count * imbalance_factor^(-c/(C-1))) samples.
// A sample with true label y gets logits z = class_separation * boost(y) * e_y
// + noise, where boost(y) falls linearly from overconfidence_boost at class 0
// to 1 at class C-1 and the noise is i.i.d. Gaussian with noise_scale sigma.
struct SynthConfig {
  int num_classes = 10;
  double imbalance_factor = 10.0;  // head count / tail count, >= 1
  int head_count = 500;            // samples in class 0
  double class_separation = 1.5;   // logit margin on the true class
  double overconfidence_boost = 1.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

// Deterministic given the config; records appear in class order.
LogitsDataset gen_synthetic(const SynthConfig& cfg);

// Per-class sample counts the generator will produce for this config.
std::vector<std::size_t> synth_class_counts(const SynthConfig& cfg);

// Multiplier applied to the true-class margin for class c.
double synth_boost(const SynthConfig& cfg, int c);

std::string synth_name(const SynthConfig& cfg);

}  // namespace ltcal::data
