#include "ltcal/model_io.hpp"

#include <fstream>

#include "ltcal/errors.hpp"

namespace ltcal::calibrate {

namespace {

std::string assign_name(AssignMode mode) {
  return mode == AssignMode::kBoundaries ? "boundaries" : "resort";
}

std::string fusion_name(FusionMode mode) {
  return mode == FusionMode::kElementwise ? "elementwise" : "predicted-class";
}

AssignMode assign_from(const std::string& s) {
  if (s == "boundaries") return AssignMode::kBoundaries;
  if (s == "resort") return AssignMode::kResort;
  throw InvalidInputError("unknown assignment_mode '" + s + "'");
}

FusionMode fusion_from(const std::string& s) {
  if (s == "elementwise") return FusionMode::kElementwise;
  if (s == "predicted-class") return FusionMode::kPredictedClass;
  throw InvalidInputError("unknown fusion_mode '" + s + "'");
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) {
    throw InvalidInputError(std::string("model JSON is missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInputError(std::string("model JSON field '") + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json model_to_json(const TemperatureModel& model) {
  nlohmann::json j;
  j["variant"] = model.variant_name();
  j["C"] = model.num_classes();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScalarTemp>) {
          j["temperature"] = p.temperature;
        } else if constexpr (std::is_same_v<T, ClassWiseTemp>) {
          j["class_temps"] = p.temperatures;
        } else if constexpr (std::is_same_v<T, BinWiseTemp>) {
          j["bin_temps"] = p.temperatures;
          j["boundaries"] = p.boundaries;
          j["assignment_mode"] = assign_name(p.assignment);
        } else {
          j["class_temps"] = p.class_branch.temperatures;
          j["bin_temps"] = p.bin_branch.temperatures;
          j["boundaries"] = p.bin_branch.boundaries;
          j["assignment_mode"] = assign_name(p.bin_branch.assignment);
          j["alpha"] = p.alpha;
          j["fusion_mode"] = fusion_name(p.fusion);
        }
      },
      model.payload());
  return j;
}

TemperatureModel model_from_json(const nlohmann::json& j) {
  const auto variant = field<std::string>(j, "variant");
  const int num_classes = field<int>(j, "C");

  if (variant == "Scalar") {
    return TemperatureModel(num_classes, ScalarTemp{field<double>(j, "temperature")});
  }
  if (variant == "ClassWise") {
    return TemperatureModel(num_classes,
                            ClassWiseTemp{field<std::vector<double>>(j, "class_temps")});
  }
  if (variant == "BinWise") {
    BinWiseTemp bw;
    bw.temperatures = field<std::vector<double>>(j, "bin_temps");
    bw.boundaries = field<std::vector<double>>(j, "boundaries");
    bw.assignment = assign_from(field<std::string>(j, "assignment_mode"));
    return TemperatureModel(num_classes, std::move(bw));
  }
  if (variant == "Dual") {
    DualTemp dual;
    dual.class_branch.temperatures = field<std::vector<double>>(j, "class_temps");
    dual.bin_branch.temperatures = field<std::vector<double>>(j, "bin_temps");
    dual.bin_branch.boundaries = field<std::vector<double>>(j, "boundaries");
    dual.bin_branch.assignment = assign_from(field<std::string>(j, "assignment_mode"));
    dual.alpha = field<double>(j, "alpha");
    dual.fusion = fusion_from(field<std::string>(j, "fusion_mode"));
    return TemperatureModel(num_classes, std::move(dual));
  }
  throw InvalidInputError("unknown model variant '" + variant + "'");
}

void save_model(const TemperatureModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << model_to_json(model).dump(2) << '\n';
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

TemperatureModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace ltcal::calibrate
