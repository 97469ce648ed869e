#pragma once

#include <filesystem>
#include <variant>

#include "hec/nn/dense.hpp"
#include "hec/nn/lstm.hpp"
#include "hec/nn/params.hpp"

namespace hec::io {

// On-disk parameter checkpoint: the network spec, the flat parameter
// tensors, and the init seed, in the versioned "hecb-1" JSON container
// (see README for the schema). Values round-trip bit-exactly.
struct NetCheckpoint {
  std::variant<nn::DenseNetSpec, nn::LstmSpec> spec;
  nn::NetParams params;
};

void save_checkpoint(const std::filesystem::path& path, const NetCheckpoint& checkpoint);
NetCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hec::io
