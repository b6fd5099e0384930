#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "ltcal/calibrate.hpp"
#include "ltcal/metrics.hpp"

namespace ltcal::report_io {

// Report JSON layout:
//   {config, dataset:{name,n,c,imbalance_factor},
//    metrics:{acc,ece,esbin_ece,nll,b_metric},
//    reliability:{equal_width:[...], equal_count:[...]}}
// imbalance_factor is null when some class has no samples. Values are stored
// unrounded; rounding happens only in printed summaries.
nlohmann::json report_to_json(const metrics::CalibrationReport& report,
                              std::optional<double> imbalance, int num_classes,
                              const nlohmann::json& config_echo);

void save_report(const nlohmann::json& report_json, const std::filesystem::path& path);

// CSV with header bin,count,acc,conf,lo,hi.
void save_reliability_csv(const std::vector<metrics::ReliabilityRow>& rows,
                          const std::filesystem::path& path);

// CSV with header alpha,ece,esbin_ece,acc,nll, one row per grid point.
void save_sweep_csv(const calibrate::SweepResult& sweep, const std::filesystem::path& path);

// Sidecar naming the argmin-ECE alpha.
nlohmann::json sweep_summary_json(const calibrate::SweepResult& sweep,
                                  const nlohmann::json& config_echo);

// ACC / ECE / Esbin-ECE / NLL with percentages at two decimals, NLL at three.
std::string summary_line(const metrics::CalibrationReport& report);

}  // namespace ltcal::report_io
