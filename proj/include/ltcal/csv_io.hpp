#pragma once

#include <filesystem>

#include "ltcal/dataset.hpp"

namespace ltcal::data {

// Logits CSV schema: header `label,z0,...,z{C-1}`, one record per line,
// base-10 integer labels, decimal float logits, LF or CRLF line endings.
// Values are written with 17 significant digits so a save/load round trip
// reproduces every double exactly.

LogitsDataset load_csv(const std::filesystem::path& path);

void save_csv(const LogitsDataset& ds, const std::filesystem::path& path);

}  // namespace ltcal::data
