#include "hec/types.hpp"

namespace hec {

std::string_view to_string(Layer l) {
  switch (l) {
    case Layer::iot: return "iot";
    case Layer::edge: return "edge";
    case Layer::cloud: return "cloud";
  }
  return "?";
}

std::string_view to_string(DatasetKind k) {
  return k == DatasetKind::univariate ? "univariate" : "multivariate";
}

Layer layer_from_string(std::string_view s) {
  if (s == "iot") return Layer::iot;
  if (s == "edge") return Layer::edge;
  if (s == "cloud") return Layer::cloud;
  throw ConfigError("unknown layer: " + std::string(s));
}

DatasetKind dataset_kind_from_string(std::string_view s) {
  if (s == "univariate") return DatasetKind::univariate;
  if (s == "multivariate") return DatasetKind::multivariate;
  throw ConfigError("unknown dataset kind: " + std::string(s));
}

}  // namespace hec
