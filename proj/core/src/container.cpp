#include "hec/container.hpp"

#include <fstream>

#include "json_util.hpp"

namespace hec::iojson {

json mat_to_json(const Mat& m) {
  json values = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

Mat mat_from_json(const json& j) {
  const long rows = require(j, "rows").get<long>();
  const long cols = require(j, "cols").get<long>();
  const auto& values = require(j, "values");
  if (static_cast<long>(values.size()) != rows * cols) {
    throw DataError("tensor value count does not match rows*cols");
  }
  Mat m(rows, cols);
  long i = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = values[i++].get<double>();
  }
  return m;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

json params_to_json(const nn::NetParams& p) {
  json tensors = json::array();
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    json t = mat_to_json(p.tensors[i]);
    t["name"] = p.names[i];
    tensors.push_back(std::move(t));
  }
  return json{{"seed", p.seed}, {"tensors", std::move(tensors)}};
}

nn::NetParams params_from_json(const json& j) {
  nn::NetParams p;
  p.seed = require(j, "seed").get<std::uint64_t>();
  for (const auto& t : require(j, "tensors")) {
    p.add(require(t, "name").get<std::string>(), mat_from_json(t));
  }
  return p;
}

json dense_spec_to_json(const nn::DenseNetSpec& s) {
  json acts = json::array();
  for (auto a : s.activations) acts.push_back(std::string(nn::to_string(a)));
  return json{{"type", "dense"},
              {"layer_widths", s.layer_widths},
              {"activations", std::move(acts)},
              {"dropout_rate", s.dropout_rate},
              {"l2_lambda", s.l2_lambda}};
}

nn::DenseNetSpec dense_spec_from_json(const json& j) {
  nn::DenseNetSpec s;
  s.layer_widths = require(j, "layer_widths").get<std::vector<int>>();
  for (const auto& a : require(j, "activations")) {
    s.activations.push_back(nn::activation_from_string(a.get<std::string>()));
  }
  s.dropout_rate = require(j, "dropout_rate").get<double>();
  s.l2_lambda = require(j, "l2_lambda").get<double>();
  s.validate();
  return s;
}

json lstm_spec_to_json(const nn::LstmSpec& s) {
  return json{{"type", "lstm"},
              {"input_dim", s.input_dim},
              {"hidden_units", s.hidden_units},
              {"bidirectional", s.bidirectional},
              {"dropout_rate", s.dropout_rate},
              {"l2_lambda", s.l2_lambda}};
}

nn::LstmSpec lstm_spec_from_json(const json& j) {
  nn::LstmSpec s;
  s.input_dim = require(j, "input_dim").get<int>();
  s.hidden_units = require(j, "hidden_units").get<int>();
  s.bidirectional = require(j, "bidirectional").get<bool>();
  s.dropout_rate = require(j, "dropout_rate").get<double>();
  s.l2_lambda = require(j, "l2_lambda").get<double>();
  s.validate();
  return s;
}

json optimizer_to_json(const nn::OptimizerConfig& c) {
  return json{{"kind", std::string(nn::to_string(c.kind))},
              {"learning_rate", c.learning_rate},
              {"rmsprop_decay", c.rmsprop_decay},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size}};
}

nn::OptimizerConfig optimizer_from_json(const json& j) {
  nn::OptimizerConfig c;
  c.kind = nn::optimizer_from_string(require(j, "kind").get<std::string>());
  c.learning_rate = require(j, "learning_rate").get<double>();
  c.rmsprop_decay = require(j, "rmsprop_decay").get<double>();
  c.epochs = require(j, "epochs").get<int>();
  c.batch_size = require(j, "batch_size").get<int>();
  c.validate();
  return c;
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << j.dump(indent) << "\n";
  if (!out) throw ArtifactError("short write to " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

const json& require(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key '" + key + "'");
  return *it;
}

}  // namespace hec::iojson

namespace hec::io {

namespace {
constexpr const char* kFormat = "hecb-1";
}

void save_checkpoint(const std::filesystem::path& path, const NetCheckpoint& checkpoint) {
  iojson::json j;
  j["format"] = kFormat;
  j["kind"] = "net_checkpoint";
  if (const auto* dense = std::get_if<nn::DenseNetSpec>(&checkpoint.spec)) {
    j["net"] = iojson::dense_spec_to_json(*dense);
  } else {
    j["net"] = iojson::lstm_spec_to_json(std::get<nn::LstmSpec>(checkpoint.spec));
  }
  j["params"] = iojson::params_to_json(checkpoint.params);
  iojson::write_json_file(path, j);
}

NetCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const iojson::json j = iojson::read_json_file(path);
  if (iojson::require(j, "format").get<std::string>() != kFormat) {
    throw DataError("unsupported container format in " + path.string());
  }
  if (iojson::require(j, "kind").get<std::string>() != "net_checkpoint") {
    throw DataError(path.string() + " is not a net checkpoint");
  }
  NetCheckpoint out;
  const auto& net = iojson::require(j, "net");
  if (iojson::require(net, "type").get<std::string>() == "dense") {
    out.spec = iojson::dense_spec_from_json(net);
  } else {
    out.spec = iojson::lstm_spec_from_json(net);
  }
  out.params = iojson::params_from_json(iojson::require(j, "params"));
  return out;
}

}  // namespace hec::io
