#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "hec/data/window.hpp"
#include "hec/detectors/gaussian.hpp"
#include "hec/nn/dense.hpp"
#include "hec/nn/lstm.hpp"
#include "hec/nn/optim.hpp"
#include "hec/types.hpp"

namespace hec::detectors {

enum class ModelFamily { autoencoder, lstm_seq2seq, bilstm_seq2seq };

ModelFamily family_from_string(std::string_view s);
std::string_view to_string(ModelFamily f);

// One of the six models: AE iot/edge/cloud for univariate data, LSTM
// seq2seq iot/edge plus the bidirectional cloud variant for multivariate.
struct DetectorSpec {
  ModelFamily family = ModelFamily::autoencoder;
  Layer layer = Layer::iot;
  std::variant<nn::DenseNetSpec, nn::LstmSpec> net;
  nn::OptimizerConfig train;

  DatasetKind dataset_kind() const {
    return family == ModelFamily::autoencoder ? DatasetKind::univariate
                                              : DatasetKind::multivariate;
  }
  std::size_t param_count() const;
  void validate() const;

  // Desk-scale defaults for the given tier and data kind.
  static DetectorSpec standard(DatasetKind kind, Layer layer);
};

// Parameter counts must strictly increase from iot to cloud.
void validate_detector_suite(const std::vector<DetectorSpec>& specs);

struct TrainLog {
  std::vector<double> epoch_loss;
};

nn::NetParams train_detector(const DetectorSpec& spec,
                             const std::vector<data::Window>& normal_windows,
                             std::uint64_t seed, TrainLog* log = nullptr);

// Eval-mode reconstruction of one window (T x D in, T x D out).
Mat reconstruct(const nn::NetParams& params, const DetectorSpec& spec, const Mat& window);

GaussianErrorModel fit_error_model(const nn::NetParams& params, const DetectorSpec& spec,
                                   const std::vector<data::Window>& normal_windows,
                                   double initial_ridge = 1e-6);

// Confidence knobs; defaults follow the usual 2x threshold / 5% of sequence.
struct ConfidenceRule {
  double threshold_multiplier = 2.0;
  double point_fraction = 0.05;
};

struct Detection {
  bool is_anomaly = false;
  bool confident = false;
  double min_logpd = 0.0;
  double anomalous_point_fraction = 0.0;
  Vec per_point_logpd;
};

// A point is an outlier when its logPD falls below the training minimum; any
// outlier point makes the window anomalous.
Detection detect(const nn::NetParams& params, const DetectorSpec& spec,
                 const GaussianErrorModel& model, const data::Window& window,
                 const ConfidenceRule& rule = {});

// Confident anomaly: an anomalous window with a point below
// threshold_multiplier * threshold or more than point_fraction outliers.
// Confident normal: no outlier points at all.
bool is_confident(const Detection& detection, double threshold_logpd,
                  const ConfidenceRule& rule = {});

// Everything needed to serve one tier.
struct DetectorArtifact {
  DetectorSpec spec;
  nn::NetParams params;
  GaussianErrorModel error_model;
};

void save_bundle(const std::filesystem::path& path, const DetectorArtifact& artifact);
DetectorArtifact load_bundle(const std::filesystem::path& path);

}  // namespace hec::detectors
