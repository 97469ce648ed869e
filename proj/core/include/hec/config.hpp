#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hec/data/dataset.hpp"
#include "hec/detectors/detector.hpp"
#include "hec/policy/policy.hpp"
#include "hec/sim/delay.hpp"
#include "hec/sim/schemes.hpp"

namespace hec {

// One experiment end to end: data generation/ingestion, detector training,
// policy training, and scheme evaluation, all reproducible from this file
// plus its seeds. JSON schema documented in the README; committed examples
// live under configs/.
struct ExperimentConfig {
  DatasetKind kind = DatasetKind::univariate;

  data::SyntheticConfig synthetic;
  struct CsvSource {
    std::filesystem::path path;
    int dims = 1;
  };
  std::optional<CsvSource> csv;  // alternative to the synthetic generator

  data::SplitRatios split;
  std::uint64_t split_seed = 11;

  std::uint64_t detector_seed = 13;
  // Per-layer overrides of the standard desk-scale specs (0 = keep default).
  std::array<int, kNumLayers> detector_epochs{0, 0, 0};
  std::array<double, kNumLayers> detector_learning_rate{0.0, 0.0, 0.0};

  policy::PolicyTrainConfig policy;
  std::uint64_t policy_seed = 17;

  sim::DelayModel delay;
  detectors::ConfidenceRule confidence;
  std::vector<sim::Scheme> schemes;
  std::filesystem::path output_dir = "out";

  bool alpha_explicit = false;  // set when the config file pinned alpha

  detectors::DetectorSpec detector_spec(Layer layer) const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

// Artifact layout under output_dir.
std::filesystem::path dataset_dir(const ExperimentConfig& config);
std::filesystem::path bundle_path(const ExperimentConfig& config, Layer layer);
std::filesystem::path policy_checkpoint_path(const ExperimentConfig& config);
std::filesystem::path policy_curve_path(const ExperimentConfig& config);
std::filesystem::path eval_dir(const ExperimentConfig& config);

}  // namespace hec
