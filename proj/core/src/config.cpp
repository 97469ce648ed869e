#include "hec/config.hpp"

#include "json_util.hpp"

namespace hec {

namespace {

using iojson::json;
using iojson::require;

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::array<double, kNumLayers> layer_map(const json& j, const std::string& key,
                                         std::array<double, kNumLayers> fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  std::array<double, kNumLayers> out = fallback;
  for (int l = 0; l < kNumLayers; ++l) {
    const std::string name(to_string(static_cast<Layer>(l)));
    if (it->contains(name)) out[l] = (*it)[name].get<double>();
  }
  return out;
}

}  // namespace

detectors::DetectorSpec ExperimentConfig::detector_spec(Layer layer) const {
  detectors::DetectorSpec spec = detectors::DetectorSpec::standard(kind, layer);
  const int idx = static_cast<int>(layer);
  if (detector_epochs[idx] > 0) spec.train.epochs = detector_epochs[idx];
  if (detector_learning_rate[idx] > 0.0) spec.train.learning_rate = detector_learning_rate[idx];
  return spec;
}

void ExperimentConfig::validate() const {
  synthetic.validate();
  split.validate();
  delay.validate();
  if (policy.epochs < 1 || policy.learning_rate <= 0.0) {
    throw ConfigError("policy epochs must be >= 1 and learning_rate > 0");
  }
  if (policy.reward.alpha <= 0.0) throw ConfigError("alpha must be > 0");
  if (policy.reward.baseline_decay < 0.0 || policy.reward.baseline_decay >= 1.0) {
    throw ConfigError("baseline_decay must be in [0, 1)");
  }
  if (confidence.threshold_multiplier < 1.0) {
    throw ConfigError("confidence threshold multiplier must be >= 1");
  }
  if (confidence.point_fraction <= 0.0 || confidence.point_fraction >= 1.0) {
    throw ConfigError("confidence point fraction must be in (0, 1)");
  }
  if (schemes.empty()) throw ConfigError("at least one scheme must be listed");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
  if (csv && kind == DatasetKind::univariate && csv->dims != 1) {
    throw ConfigError("univariate csv ingestion expects dims = 1");
  }
  if (csv && kind == DatasetKind::multivariate && csv->dims != data::kMultivariateChannels) {
    throw ConfigError("multivariate csv ingestion expects dims = 18");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  const auto& dataset = require(j, "dataset");
  cfg.kind = dataset_kind_from_string(require(dataset, "kind").get<std::string>());
  cfg.synthetic.kind = cfg.kind;
  if (dataset.contains("synthetic")) {
    const auto& s = dataset["synthetic"];
    cfg.synthetic.weeks = get_or(s, "weeks", cfg.synthetic.weeks);
    cfg.synthetic.subjects = get_or(s, "subjects", cfg.synthetic.subjects);
    cfg.synthetic.anomaly_fraction = get_or(s, "anomaly_fraction", cfg.synthetic.anomaly_fraction);
    cfg.synthetic.noise_std = get_or(s, "noise_std", cfg.synthetic.noise_std);
    cfg.synthetic.seed = get_or(s, "seed", cfg.synthetic.seed);
  }
  if (dataset.contains("csv") && !dataset["csv"].is_null()) {
    ExperimentConfig::CsvSource src;
    src.path = require(dataset["csv"], "path").get<std::string>();
    src.dims = get_or(dataset["csv"], "dims", cfg.kind == DatasetKind::univariate
                                                  ? 1
                                                  : data::kMultivariateChannels);
    cfg.csv = std::move(src);
  }
  if (dataset.contains("split")) {
    const auto& s = dataset["split"];
    cfg.split.ad_train_normal_fraction =
        get_or(s, "ad_train_normal_fraction", cfg.split.ad_train_normal_fraction);
    cfg.split.anomaly_test_fraction =
        get_or(s, "anomaly_test_fraction", cfg.split.anomaly_test_fraction);
    cfg.split_seed = get_or(s, "seed", cfg.split_seed);
  }

  if (j.contains("detectors")) {
    const auto& d = j["detectors"];
    cfg.detector_seed = get_or(d, "seed", cfg.detector_seed);
    const auto epochs = layer_map(d, "epochs", {0.0, 0.0, 0.0});
    const auto lr = layer_map(d, "learning_rate", {0.0, 0.0, 0.0});
    for (int l = 0; l < kNumLayers; ++l) {
      cfg.detector_epochs[l] = static_cast<int>(epochs[l]);
      cfg.detector_learning_rate[l] = lr[l];
    }
  }

  cfg.policy.reward.alpha = policy::RewardConfig::default_alpha(cfg.kind);
  if (j.contains("policy")) {
    const auto& p = j["policy"];
    if (p.contains("alpha") && !p["alpha"].is_null()) {
      cfg.policy.reward.alpha = p["alpha"].get<double>();
      cfg.alpha_explicit = true;
    }
    cfg.policy.reward.baseline_decay =
        get_or(p, "baseline_decay", cfg.policy.reward.baseline_decay);
    cfg.policy.learning_rate = get_or(p, "learning_rate", cfg.policy.learning_rate);
    cfg.policy.epochs = get_or(p, "epochs", cfg.policy.epochs);
    cfg.policy_seed = get_or(p, "seed", cfg.policy_seed);
  }

  if (j.contains("delay")) {
    const auto& d = j["delay"];
    auto to_array = [&](const char* key, std::array<double, kNumLayers> fallback) {
      return layer_map(d, key, fallback);
    };
    cfg.delay.exec_univariate_ms = to_array("exec_univariate_ms", cfg.delay.exec_univariate_ms);
    cfg.delay.exec_multivariate_ms =
        to_array("exec_multivariate_ms", cfg.delay.exec_multivariate_ms);
    cfg.delay.rtt_ms = to_array("rtt_ms", cfg.delay.rtt_ms);
  }

  if (j.contains("confidence")) {
    const auto& c = j["confidence"];
    cfg.confidence.threshold_multiplier =
        get_or(c, "threshold_multiplier", cfg.confidence.threshold_multiplier);
    cfg.confidence.point_fraction = get_or(c, "point_fraction", cfg.confidence.point_fraction);
  }

  if (j.contains("schemes")) {
    for (const auto& s : j["schemes"]) {
      cfg.schemes.push_back(sim::scheme_from_string(s.get<std::string>()));
    }
  } else {
    cfg.schemes.assign(sim::kAllSchemes.begin(), sim::kAllSchemes.end());
  }

  cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const json j = iojson::read_json_file(path);
  return parse_experiment_config(j.dump());
}

std::filesystem::path dataset_dir(const ExperimentConfig& config) {
  return config.output_dir / "dataset";
}

std::filesystem::path bundle_path(const ExperimentConfig& config, Layer layer) {
  return config.output_dir / "detectors" /
         (std::string(to_string(layer)) + ".bundle.json");
}

std::filesystem::path policy_checkpoint_path(const ExperimentConfig& config) {
  return config.output_dir / "policy" / "policy.json";
}

std::filesystem::path policy_curve_path(const ExperimentConfig& config) {
  return config.output_dir / "policy" / "curve.csv";
}

std::filesystem::path eval_dir(const ExperimentConfig& config) {
  return config.output_dir / "eval";
}

}  // namespace hec
