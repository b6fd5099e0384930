#include "ltcal/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ltcal/errors.hpp"

namespace ltcal::report_io {

namespace {

nlohmann::json rows_to_json(const std::vector<metrics::ReliabilityRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const metrics::ReliabilityRow& r : rows) {
    arr.push_back({{"bin", r.bin},
                   {"count", r.count},
                   {"acc", r.accuracy},
                   {"conf", r.confidence},
                   {"lo", r.lo},
                   {"hi", r.hi}});
  }
  return arr;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const metrics::CalibrationReport& report,
                              std::optional<double> imbalance, int num_classes,
                              const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["config"] = config_echo;
  j["dataset"] = {{"name", report.dataset_name},
                  {"n", report.n},
                  {"c", num_classes},
                  {"imbalance_factor",
                   imbalance.has_value() ? nlohmann::json(*imbalance) : nlohmann::json()}};
  j["metrics"] = {{"acc", report.accuracy},
                  {"ece", report.ece},
                  {"esbin_ece", report.esbin_ece},
                  {"nll", report.mean_nll},
                  {"b_metric", report.ece_bins}};
  j["model"] = report.model;
  j["reliability"] = {{"equal_width", rows_to_json(report.equal_width)},
                      {"equal_count", rows_to_json(report.equal_count)}};
  return j;
}

void save_report(const nlohmann::json& report_json, const std::filesystem::path& path) {
  write_text(report_json.dump(2) + "\n", path);
}

void save_reliability_csv(const std::vector<metrics::ReliabilityRow>& rows,
                          const std::filesystem::path& path) {
  std::ostringstream out;
  out << "bin,count,acc,conf,lo,hi\n";
  for (const metrics::ReliabilityRow& r : rows) {
    out << r.bin << ',' << r.count << ',' << fmt17(r.accuracy) << ',' << fmt17(r.confidence)
        << ',' << fmt17(r.lo) << ',' << fmt17(r.hi) << '\n';
  }
  write_text(out.str(), path);
}

void save_sweep_csv(const calibrate::SweepResult& sweep, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "alpha,ece,esbin_ece,acc,nll\n";
  for (const calibrate::SweepRow& r : sweep.rows) {
    out << fmt17(r.alpha) << ',' << fmt17(r.ece) << ',' << fmt17(r.esbin_ece) << ','
        << fmt17(r.accuracy) << ',' << fmt17(r.mean_nll) << '\n';
  }
  write_text(out.str(), path);
}

nlohmann::json sweep_summary_json(const calibrate::SweepResult& sweep,
                                  const nlohmann::json& config_echo) {
  return nlohmann::json{
      {"config", config_echo}, {"best_alpha", sweep.best_alpha}, {"best_ece", sweep.best_ece}};
}

std::string summary_line(const metrics::CalibrationReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.2f / %.2f / %.2f / %.3f", report.accuracy * 100.0,
                report.ece, report.esbin_ece, report.mean_nll);
  return buf;
}

}  // namespace ltcal::report_io
