#pragma once

#include <filesystem>

#include "hec/tensor.hpp"

namespace hec::data {

// Strict numeric CSV reader: every row must have exactly `dims` comma
// separated numeric fields. Errors carry the 1-based line number and column.
// The 18-channel layout is documented in the README (ankle acc/gyro/mag xyz,
// then wrist acc/gyro/mag xyz).
Mat ingest_csv(const std::filesystem::path& path, int dims);

}  // namespace hec::data
