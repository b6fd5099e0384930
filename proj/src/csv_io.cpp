#include "ltcal/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ltcal/errors.hpp"

namespace ltcal::data {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInputError(where + ": cannot parse '" + field + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw InvalidInputError(where + ": non-finite value '" + field + "'");
  }
  return value;
}

int parse_label(const std::string& field, int num_classes, const std::string& where) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || value < 0) {
    throw InvalidInputError(where + ": cannot parse '" + field +
                            "' as a non-negative integer label");
  }
  if (value >= num_classes) {
    throw InvalidInputError(where + ": label " + std::to_string(value) + " out of range [0, " +
                            std::to_string(num_classes) + ")");
  }
  return value;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

LogitsDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInputError("'" + path.string() + "' is empty");
  }
  strip_cr(line);
  const auto header = split_fields(line);
  if (header.size() < 3 || header[0] != "label") {
    throw InvalidInputError("'" + path.string() +
                            "' line 1: header must be label,z0,...,z{C-1}");
  }
  const int num_classes = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < num_classes; ++j) {
    if (header[static_cast<std::size_t>(j) + 1] != "z" + std::to_string(j)) {
      throw InvalidInputError("'" + path.string() + "' line 1: expected column z" +
                              std::to_string(j) + ", got '" +
                              header[static_cast<std::size_t>(j) + 1] + "'");
    }
  }

  std::vector<LogitRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;  // tolerate a trailing blank line
    const std::string where = "'" + path.string() + "' line " + std::to_string(line_no);
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InvalidInputError(where + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(fields.size()));
    }
    const int label = parse_label(fields[0], num_classes, where);
    std::vector<double> logits(static_cast<std::size_t>(num_classes));
    for (int j = 0; j < num_classes; ++j) {
      logits[static_cast<std::size_t>(j)] = parse_double(fields[static_cast<std::size_t>(j) + 1], where);
    }
    records.push_back(LogitRecord{label, core::LogitVector(std::move(logits))});
  }
  if (records.empty()) {
    throw InvalidInputError("'" + path.string() + "' has a header but no records");
  }
  return LogitsDataset(std::move(records), num_classes, path.stem().string());
}

void save_csv(const LogitsDataset& ds, const std::filesystem::path& path) {
  if (ds.size() == 0) {
    throw InvalidInputError("refusing to write an empty dataset");
  }
  std::ostringstream out;
  out << "label";
  for (int j = 0; j < ds.num_classes(); ++j) out << ",z" << j;
  out << '\n';

  char buf[40];
  for (const LogitRecord& r : ds.records()) {
    out << r.label;
    for (double z : r.logits.values()) {
      std::snprintf(buf, sizeof(buf), "%.17g", z);
      out << ',' << buf;
    }
    out << '\n';
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  file << out.str();
  if (!file) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

}  // namespace ltcal::data
