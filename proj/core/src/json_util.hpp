#pragma once

// Internal JSON helpers shared by the artifact containers, the dataset
// bundle, the wire payloads, and the experiment config. Not installed.

#include <filesystem>
#include <json.hpp>
#include <string>

#include "hec/nn/dense.hpp"
#include "hec/nn/lstm.hpp"
#include "hec/nn/optim.hpp"
#include "hec/nn/params.hpp"
#include "hec/tensor.hpp"
#include "hec/types.hpp"

namespace hec::iojson {

using nlohmann::json;

json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);
json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j);

json params_to_json(const nn::NetParams& p);
nn::NetParams params_from_json(const json& j);

json dense_spec_to_json(const nn::DenseNetSpec& s);
nn::DenseNetSpec dense_spec_from_json(const json& j);
json lstm_spec_to_json(const nn::LstmSpec& s);
nn::LstmSpec lstm_spec_from_json(const json& j);
json optimizer_to_json(const nn::OptimizerConfig& c);
nn::OptimizerConfig optimizer_from_json(const json& j);

void write_json_file(const std::filesystem::path& path, const json& j, int indent = 1);
json read_json_file(const std::filesystem::path& path);

// Throws ConfigError naming the key when absent.
const json& require(const json& j, const std::string& key);

}  // namespace hec::iojson
