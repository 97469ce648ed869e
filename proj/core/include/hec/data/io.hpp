#pragma once

#include <cstdint>
#include <filesystem>

#include "hec/data/dataset.hpp"

namespace hec::data {

// On-disk layout: <dir>/manifest.json plus one JSON-lines file per
// partition (ad_train.jsonl, ad_test.jsonl, policy_train.jsonl,
// policy_test.jsonl). Byte-identical for identical inputs.
struct DatasetProvenance {
  std::uint64_t data_seed = 0;
  std::uint64_t split_seed = 0;
  SplitRatios ratios;
};

void save_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle,
                  const DatasetProvenance& provenance);
DatasetBundle load_dataset(const std::filesystem::path& dir);

}  // namespace hec::data
