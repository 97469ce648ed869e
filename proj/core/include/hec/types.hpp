#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hec {

// The three tiers of the hierarchy, ordered bottom to top.
enum class Layer : int { iot = 0, edge = 1, cloud = 2 };
inline constexpr int kNumLayers = 3;

enum class DatasetKind { univariate, multivariate };

std::string_view to_string(Layer l);
std::string_view to_string(DatasetKind k);
Layer layer_from_string(std::string_view s);
DatasetKind dataset_kind_from_string(std::string_view s);

// Error hierarchy. The CLI maps these onto exit codes:
// ConfigError -> 2, ArtifactError -> 3, everything else -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A referenced artifact (bundle, checkpoint, dataset) is missing or unreadable.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses, divergence, singular matrices after ridge escalation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace hec
