#include "hec/data/io.hpp"

#include <fstream>

#include "json_util.hpp"

namespace hec::data {

namespace {

using iojson::json;

constexpr const char* kPartitions[] = {"ad_train", "ad_test", "policy_train", "policy_test"};

json window_to_json(const Window& w) {
  json values = json::array();
  for (int r = 0; r < w.values.rows(); ++r) {
    for (int c = 0; c < w.values.cols(); ++c) values.push_back(w.values(r, c));
  }
  return json{{"id", w.id},
              {"index", w.index},
              {"label", w.is_anomalous() ? "anomalous" : "normal"},
              {"class", w.anomaly_class},
              {"rows", w.values.rows()},
              {"cols", w.values.cols()},
              {"values", std::move(values)}};
}

Window window_from_json(const json& j) {
  Window w;
  w.id = iojson::require(j, "id").get<long>();
  w.index = iojson::require(j, "index").get<long>();
  const std::string label = iojson::require(j, "label").get<std::string>();
  if (label != "normal" && label != "anomalous") throw DataError("bad window label " + label);
  w.label = label == "anomalous" ? WindowLabel::anomalous : WindowLabel::normal;
  w.anomaly_class = iojson::require(j, "class").get<int>();
  const long rows = iojson::require(j, "rows").get<long>();
  const long cols = iojson::require(j, "cols").get<long>();
  const auto& values = iojson::require(j, "values");
  if (static_cast<long>(values.size()) != rows * cols) {
    throw DataError("window value count mismatch");
  }
  w.values = Mat(rows, cols);
  long i = 0;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) w.values(r, c) = values[i++].get<double>();
  }
  return w;
}

void save_partition(const std::filesystem::path& file, const std::vector<Window>& windows) {
  std::ofstream out(file);
  if (!out) throw ArtifactError("cannot write " + file.string());
  for (const auto& w : windows) out << window_to_json(w).dump() << "\n";
}

std::vector<Window> load_partition(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArtifactError("cannot read " + file.string());
  std::vector<Window> windows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      windows.push_back(window_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return windows;
}

const std::vector<Window>& partition_of(const DatasetBundle& b, int i) {
  switch (i) {
    case 0: return b.ad_train;
    case 1: return b.ad_test;
    case 2: return b.policy_train;
    default: return b.policy_test;
  }
}

std::vector<Window>& partition_of(DatasetBundle& b, int i) {
  return const_cast<std::vector<Window>&>(partition_of(static_cast<const DatasetBundle&>(b), i));
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle,
                  const DatasetProvenance& provenance) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = "hecb-1";
  manifest["kind"] = "dataset_bundle";
  manifest["dataset_kind"] = std::string(to_string(bundle.kind));
  manifest["stats"] = json{{"mean", iojson::vec_to_json(bundle.stats.mean)},
                           {"stddev", iojson::vec_to_json(bundle.stats.stddev)}};
  manifest["constant_channels"] = bundle.constant_channels;
  manifest["data_seed"] = provenance.data_seed;
  manifest["split_seed"] = provenance.split_seed;
  manifest["ratios"] = json{{"ad_train_normal_fraction", provenance.ratios.ad_train_normal_fraction},
                            {"anomaly_test_fraction", provenance.ratios.anomaly_test_fraction}};
  json counts;
  for (int i = 0; i < 4; ++i) {
    const auto& part = partition_of(bundle, i);
    long anomalous = 0;
    for (const auto& w : part) anomalous += w.is_anomalous() ? 1 : 0;
    counts[kPartitions[i]] = json{{"windows", part.size()}, {"anomalous", anomalous}};
  }
  manifest["counts"] = std::move(counts);
  iojson::write_json_file(dir / "manifest.json", manifest);
  for (int i = 0; i < 4; ++i) {
    save_partition(dir / (std::string(kPartitions[i]) + ".jsonl"), partition_of(bundle, i));
  }
}

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  const json manifest = iojson::read_json_file(dir / "manifest.json");
  if (iojson::require(manifest, "kind").get<std::string>() != "dataset_bundle") {
    throw DataError(dir.string() + " is not a dataset bundle");
  }
  DatasetBundle bundle;
  bundle.kind =
      dataset_kind_from_string(iojson::require(manifest, "dataset_kind").get<std::string>());
  const auto& stats = iojson::require(manifest, "stats");
  bundle.stats.mean = iojson::vec_from_json(iojson::require(stats, "mean"));
  bundle.stats.stddev = iojson::vec_from_json(iojson::require(stats, "stddev"));
  bundle.constant_channels =
      iojson::require(manifest, "constant_channels").get<std::vector<int>>();
  for (int i = 0; i < 4; ++i) {
    partition_of(bundle, i) = load_partition(dir / (std::string(kPartitions[i]) + ".jsonl"));
  }
  return bundle;
}

}  // namespace hec::data
