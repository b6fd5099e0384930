#include "ltcal/synth.hpp"

#include <cmath>

#include "ltcal/errors.hpp"
#include "ltcal/rng.hpp"

namespace ltcal::data {

namespace {

void validate(const SynthConfig& cfg) {
  if (cfg.num_classes < 2) {
    throw InvalidInputError("num_classes must be >= 2, got " + std::to_string(cfg.num_classes));
  }
  if (!(cfg.imbalance_factor >= 1.0) || !std::isfinite(cfg.imbalance_factor)) {
    throw InvalidInputError("imbalance_factor must be >= 1, got " +
                            std::to_string(cfg.imbalance_factor));
  }
  if (cfg.head_count < 1) {
    throw InvalidInputError("head_count must be >= 1, got " + std::to_string(cfg.head_count));
  }
  if (!(cfg.class_separation > 0.0) || !std::isfinite(cfg.class_separation)) {
    throw InvalidInputError("class_separation must be > 0");
  }
  if (!(cfg.overconfidence_boost >= 1.0) || !std::isfinite(cfg.overconfidence_boost)) {
    throw InvalidInputError("overconfidence_boost must be >= 1");
  }
  if (!(cfg.noise_scale > 0.0) || !std::isfinite(cfg.noise_scale)) {
    throw InvalidInputError("noise_scale must be > 0");
  }
}

}  // namespace

std::vector<std::size_t> synth_class_counts(const SynthConfig& cfg) {
  validate(cfg);
  std::vector<std::size_t> counts(static_cast<std::size_t>(cfg.num_classes));
  for (int c = 0; c < cfg.num_classes; ++c) {
    const double expnt = -static_cast<double>(c) / static_cast<double>(cfg.num_classes - 1);
    const double target = cfg.head_count * std::pow(cfg.imbalance_factor, expnt);
    counts[static_cast<std::size_t>(c)] = static_cast<std::size_t>(std::llround(target));
  }
  if (counts.back() == 0) {
    throw InvalidInputError("tail class count rounds to zero; lower imbalance_factor or raise "
                            "head_count");
  }
  return counts;
}

double synth_boost(const SynthConfig& cfg, int c) {
  return cfg.overconfidence_boost +
         (1.0 - cfg.overconfidence_boost) * static_cast<double>(c) /
             static_cast<double>(cfg.num_classes - 1);
}

std::string synth_name(const SynthConfig& cfg) {
  return "synth-c" + std::to_string(cfg.num_classes) + "-if" +
         std::to_string(static_cast<long long>(std::llround(cfg.imbalance_factor))) + "-n" +
         std::to_string(cfg.head_count) + "-seed" + std::to_string(cfg.seed);
}

LogitsDataset gen_synthetic(const SynthConfig& cfg) {
  const auto counts = synth_class_counts(cfg);
  Rng rng(cfg.seed);
  std::vector<LogitRecord> records;

  for (int c = 0; c < cfg.num_classes; ++c) {
    const double margin = cfg.class_separation * synth_boost(cfg, c);
    for (std::size_t k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
      std::vector<double> z(static_cast<std::size_t>(cfg.num_classes));
      for (double& zj : z) zj = cfg.noise_scale * rng.next_gaussian();
      z[static_cast<std::size_t>(c)] += margin;
      records.push_back(LogitRecord{c, core::LogitVector(std::move(z))});
    }
  }
  return LogitsDataset(std::move(records), cfg.num_classes, synth_name(cfg));
}

}  // namespace ltcal::data
