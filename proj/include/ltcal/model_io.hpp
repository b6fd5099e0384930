#pragma once

#include <filesystem>

#include <json.hpp>

#include "ltcal/calibrate.hpp"

namespace ltcal::calibrate {

// Model JSON schema: {"variant", "C", then the variant's own fields}.
//   Scalar:    temperature
//   ClassWise: class_temps
//   BinWise:   bin_temps, boundaries, assignment_mode
//   Dual:      class_temps, bin_temps, boundaries, alpha, fusion_mode,
//              assignment_mode
// Absent fields are omitted; loading re-validates every model invariant.

nlohmann::json model_to_json(const TemperatureModel& model);
TemperatureModel model_from_json(const nlohmann::json& j);

void save_model(const TemperatureModel& model, const std::filesystem::path& path);
TemperatureModel load_model(const std::filesystem::path& path);

}  // namespace ltcal::calibrate
