#include "hec/detectors/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hec/rng.hpp"
#include "json_util.hpp"

namespace hec::detectors {

ModelFamily family_from_string(std::string_view s) {
  if (s == "autoencoder") return ModelFamily::autoencoder;
  if (s == "lstm_seq2seq") return ModelFamily::lstm_seq2seq;
  if (s == "bilstm_seq2seq") return ModelFamily::bilstm_seq2seq;
  throw ConfigError("unknown model family: " + std::string(s));
}

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::autoencoder: return "autoencoder";
    case ModelFamily::lstm_seq2seq: return "lstm_seq2seq";
    case ModelFamily::bilstm_seq2seq: return "bilstm_seq2seq";
  }
  return "?";
}

std::size_t DetectorSpec::param_count() const {
  if (const auto* dense = std::get_if<nn::DenseNetSpec>(&net)) return dense->param_count();
  return std::get<nn::LstmSpec>(net).param_count();
}

void DetectorSpec::validate() const {
  train.validate();
  switch (family) {
    case ModelFamily::autoencoder: {
      const auto* dense = std::get_if<nn::DenseNetSpec>(&net);
      if (!dense) throw ConfigError("autoencoder detector needs a dense net spec");
      dense->validate();
      if (dense->input_width() != dense->output_width()) {
        throw ConfigError("autoencoder input width must equal output width");
      }
      break;
    }
    case ModelFamily::lstm_seq2seq: {
      const auto* lstm = std::get_if<nn::LstmSpec>(&net);
      if (!lstm) throw ConfigError("lstm_seq2seq detector needs an lstm spec");
      lstm->validate();
      if (lstm->bidirectional) throw ConfigError("lstm_seq2seq is unidirectional");
      if (layer == Layer::cloud) {
        throw ConfigError("the cloud tier uses the bidirectional seq2seq family");
      }
      break;
    }
    case ModelFamily::bilstm_seq2seq: {
      const auto* lstm = std::get_if<nn::LstmSpec>(&net);
      if (!lstm) throw ConfigError("bilstm_seq2seq detector needs an lstm spec");
      lstm->validate();
      if (!lstm->bidirectional) throw ConfigError("bilstm_seq2seq must be bidirectional");
      if (layer != Layer::cloud) throw ConfigError("bilstm_seq2seq is the cloud model");
      break;
    }
  }
}

DetectorSpec DetectorSpec::standard(DatasetKind kind, Layer layer) {
  DetectorSpec spec;
  spec.layer = layer;
  if (kind == DatasetKind::univariate) {
    spec.family = ModelFamily::autoencoder;
    nn::DenseNetSpec net;
    switch (layer) {
      case Layer::iot: net.layer_widths = {96, 24, 96}; break;
      case Layer::edge: net.layer_widths = {96, 48, 16, 48, 96}; break;
      case Layer::cloud: net.layer_widths = {96, 64, 32, 12, 32, 64, 96}; break;
    }
    net.activations.assign(net.layer_widths.size() - 1, nn::Activation::tanh);
    net.activations.back() = nn::Activation::linear;
    net.dropout_rate = 0.3;
    net.l2_lambda = 1e-4;
    spec.net = std::move(net);
    spec.train.kind = nn::OptimizerKind::sgd;
    spec.train.learning_rate = 0.05;
    spec.train.epochs = 150;
    spec.train.batch_size = 16;
  } else {
    spec.family =
        layer == Layer::cloud ? ModelFamily::bilstm_seq2seq : ModelFamily::lstm_seq2seq;
    nn::LstmSpec net;
    net.input_dim = 18;
    net.hidden_units = layer == Layer::iot ? 16 : 32;
    net.bidirectional = layer == Layer::cloud;
    net.dropout_rate = 0.3;
    net.l2_lambda = 1e-4;
    spec.net = net;
    spec.train.kind = nn::OptimizerKind::rmsprop;
    spec.train.learning_rate = 1e-3;
    spec.train.epochs = 30;
    spec.train.batch_size = 8;
  }
  spec.validate();
  return spec;
}

void validate_detector_suite(const std::vector<DetectorSpec>& specs) {
  if (specs.size() != static_cast<std::size_t>(kNumLayers)) {
    throw ConfigError("a detector suite needs one model per layer");
  }
  for (int i = 0; i < kNumLayers; ++i) {
    if (specs[i].layer != static_cast<Layer>(i)) {
      throw ConfigError("detector suite must be ordered iot, edge, cloud");
    }
    specs[i].validate();
  }
  for (int i = 1; i < kNumLayers; ++i) {
    if (specs[i].param_count() <= specs[i - 1].param_count()) {
      throw ConfigError("model complexity must strictly increase from iot to cloud");
    }
  }
}

namespace {

void check_training_set(const DetectorSpec& spec, const std::vector<data::Window>& windows) {
  if (windows.empty()) throw DataError("empty training set");
  const long rows = windows.front().values.rows();
  const long cols = windows.front().values.cols();
  for (const auto& w : windows) {
    if (w.is_anomalous()) {
      throw DataError("window " + std::to_string(w.id) + " is labeled anomalous; detectors train on normal data only");
    }
    if (w.values.rows() != rows || w.values.cols() != cols) {
      throw ShapeError("window " + std::to_string(w.id) + " has inconsistent shape");
    }
  }
  if (const auto* dense = std::get_if<nn::DenseNetSpec>(&spec.net)) {
    if (rows * cols != dense->input_width()) {
      throw ShapeError("autoencoder expects " + std::to_string(dense->input_width()) +
                       " values per window, got " + std::to_string(rows * cols));
    }
  } else {
    const auto& lstm = std::get<nn::LstmSpec>(spec.net);
    if (cols != lstm.input_dim) {
      throw ShapeError("seq2seq expects " + std::to_string(lstm.input_dim) +
                       " channels, got " + std::to_string(cols));
    }
  }
}

Eigen::Map<const Eigen::RowVectorXd> flat_row(const Mat& m) {
  return {m.data(), m.size()};
}

nn::NetParams train_autoencoder(const DetectorSpec& spec, const nn::DenseNetSpec& net,
                                const std::vector<data::Window>& windows, std::uint64_t seed,
                                TrainLog* log) {
  const int n = static_cast<int>(windows.size());
  Mat x(n, net.input_width());
  for (int i = 0; i < n; ++i) x.row(i) = flat_row(windows[i].values);

  nn::NetParams params = nn::init_dense(net, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);  // decouple mask/shuffle stream from init
  nn::OptimizerState state;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  double first_epoch = 0.0, last_epoch = 0.0;
  for (int epoch = 0; epoch < spec.train.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += spec.train.batch_size) {
      const int count = std::min(spec.train.batch_size, n - start);
      Mat batch(count, net.input_width());
      for (int i = 0; i < count; ++i) batch.row(i) = x.row(order[start + i]);
      nn::DropoutPlan plan = nn::make_dense_dropout_plan(net, count, rng);
      auto res = nn::dense_backward(params, net, batch, batch, nn::Loss::mae,
                                    net.dropout_rate > 0.0 ? &plan : nullptr);
      nn::optimize_step(params, res.grads, spec.train, state);
      epoch_loss += res.loss * count;
    }
    epoch_loss /= n;
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("autoencoder training diverged at epoch " + std::to_string(epoch));
    }
    if (log) log->epoch_loss.push_back(epoch_loss);
    if (epoch == 0) first_epoch = epoch_loss;
    last_epoch = epoch_loss;
  }
  if (last_epoch > first_epoch) {
    throw NumericError("autoencoder training failed to reduce the loss");
  }
  return params;
}

nn::NetParams train_seq2seq(const DetectorSpec& spec, const nn::LstmSpec& net,
                            const std::vector<data::Window>& windows, std::uint64_t seed,
                            TrainLog* log) {
  const int n = static_cast<int>(windows.size());
  nn::NetParams params = nn::init_seq2seq(net, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  nn::OptimizerState state;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  double first_epoch = 0.0, last_epoch = 0.0;
  for (int epoch = 0; epoch < spec.train.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += spec.train.batch_size) {
      const int count = std::min(spec.train.batch_size, n - start);
      nn::GradSet batch_grads = nn::zeros_like(params);
      double batch_loss = 0.0;
      for (int i = 0; i < count; ++i) {
        const Mat& seq = windows[order[start + i]].values;
        nn::LstmDropoutPlan plan =
            nn::make_lstm_dropout_plan(net, static_cast<int>(seq.rows()), rng);
        auto res = nn::seq2seq_backward(params, net, seq,
                                        net.dropout_rate > 0.0 ? &plan : nullptr);
        nn::accumulate(batch_grads, res.grads, 1.0 / count);
        batch_loss += res.loss / count;
      }
      nn::optimize_step(params, batch_grads, spec.train, state);
      epoch_loss += batch_loss * count;
    }
    epoch_loss /= n;
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("seq2seq training diverged at epoch " + std::to_string(epoch));
    }
    if (log) log->epoch_loss.push_back(epoch_loss);
    if (epoch == 0) first_epoch = epoch_loss;
    last_epoch = epoch_loss;
  }
  if (last_epoch > first_epoch) {
    throw NumericError("seq2seq training failed to reduce the loss");
  }
  return params;
}

}  // namespace

nn::NetParams train_detector(const DetectorSpec& spec,
                             const std::vector<data::Window>& normal_windows,
                             std::uint64_t seed, TrainLog* log) {
  spec.validate();
  check_training_set(spec, normal_windows);
  if (const auto* dense = std::get_if<nn::DenseNetSpec>(&spec.net)) {
    return train_autoencoder(spec, *dense, normal_windows, seed, log);
  }
  return train_seq2seq(spec, std::get<nn::LstmSpec>(spec.net), normal_windows, seed, log);
}

Mat reconstruct(const nn::NetParams& params, const DetectorSpec& spec, const Mat& window) {
  if (const auto* dense = std::get_if<nn::DenseNetSpec>(&spec.net)) {
    if (window.size() != dense->input_width()) {
      throw ShapeError("window does not match autoencoder input width");
    }
    Mat flat(1, window.size());
    flat.row(0) = flat_row(window);
    Mat out = nn::dense_forward_masked(params, *dense, flat, nullptr);
    return Eigen::Map<const Mat>(out.data(), window.rows(), window.cols());
  }
  return nn::seq2seq_reconstruct(params, std::get<nn::LstmSpec>(spec.net), window);
}

GaussianErrorModel fit_error_model(const nn::NetParams& params, const DetectorSpec& spec,
                                   const std::vector<data::Window>& normal_windows,
                                   double initial_ridge) {
  if (normal_windows.empty()) throw DataError("empty training set");
  const long t = normal_windows.front().values.rows();
  const long d = normal_windows.front().values.cols();
  Mat errors(static_cast<long>(normal_windows.size()) * t, d);
  long row = 0;
  for (const auto& w : normal_windows) {
    const Mat rec = reconstruct(params, spec, w.values);
    errors.block(row, 0, t, d) = rec - w.values;
    row += t;
  }
  return fit_gaussian(errors, initial_ridge);
}

Detection detect(const nn::NetParams& params, const DetectorSpec& spec,
                 const GaussianErrorModel& model, const data::Window& window,
                 const ConfidenceRule& rule) {
  const Mat rec = reconstruct(params, spec, window.values);
  const long t = window.values.rows();
  Detection det;
  det.per_point_logpd = Vec(t);
  long below = 0;
  for (long i = 0; i < t; ++i) {
    const Vec err = (rec.row(i) - window.values.row(i)).transpose();
    const double lp = logpd(model, err);
    det.per_point_logpd(i) = lp;
    if (lp < model.threshold_logpd) ++below;
  }
  det.min_logpd = det.per_point_logpd.minCoeff();
  det.anomalous_point_fraction = static_cast<double>(below) / static_cast<double>(t);
  det.is_anomaly = below > 0;
  det.confident = is_confident(det, model.threshold_logpd, rule);
  return det;
}

bool is_confident(const Detection& detection, double threshold_logpd,
                  const ConfidenceRule& rule) {
  if (detection.anomalous_point_fraction == 0.0) return true;  // confidently normal
  if (!detection.is_anomaly) return false;
  return detection.min_logpd < rule.threshold_multiplier * threshold_logpd ||
         detection.anomalous_point_fraction > rule.point_fraction;
}

void save_bundle(const std::filesystem::path& path, const DetectorArtifact& artifact) {
  iojson::json j;
  j["format"] = "hecb-1";
  j["kind"] = "detector_bundle";
  iojson::json spec;
  spec["family"] = std::string(to_string(artifact.spec.family));
  spec["layer"] = std::string(to_string(artifact.spec.layer));
  if (const auto* dense = std::get_if<nn::DenseNetSpec>(&artifact.spec.net)) {
    spec["net"] = iojson::dense_spec_to_json(*dense);
  } else {
    spec["net"] = iojson::lstm_spec_to_json(std::get<nn::LstmSpec>(artifact.spec.net));
  }
  spec["train"] = iojson::optimizer_to_json(artifact.spec.train);
  j["spec"] = std::move(spec);
  j["params"] = iojson::params_to_json(artifact.params);
  j["error_model"] = iojson::json{{"mu", iojson::vec_to_json(artifact.error_model.mu)},
                                  {"sigma", iojson::mat_to_json(artifact.error_model.sigma)},
                                  {"threshold_logpd", artifact.error_model.threshold_logpd},
                                  {"ridge", artifact.error_model.ridge}};
  iojson::write_json_file(path, j);
}

DetectorArtifact load_bundle(const std::filesystem::path& path) {
  const iojson::json j = iojson::read_json_file(path);
  if (iojson::require(j, "kind").get<std::string>() != "detector_bundle") {
    throw DataError(path.string() + " is not a detector bundle");
  }
  DetectorArtifact artifact;
  const auto& spec = iojson::require(j, "spec");
  artifact.spec.family = family_from_string(iojson::require(spec, "family").get<std::string>());
  artifact.spec.layer = layer_from_string(iojson::require(spec, "layer").get<std::string>());
  const auto& net = iojson::require(spec, "net");
  if (iojson::require(net, "type").get<std::string>() == "dense") {
    artifact.spec.net = iojson::dense_spec_from_json(net);
  } else {
    artifact.spec.net = iojson::lstm_spec_from_json(net);
  }
  artifact.spec.train = iojson::optimizer_from_json(iojson::require(spec, "train"));
  artifact.spec.validate();
  artifact.params = iojson::params_from_json(iojson::require(j, "params"));
  const auto& em = iojson::require(j, "error_model");
  artifact.error_model.mu = iojson::vec_from_json(iojson::require(em, "mu"));
  artifact.error_model.sigma = iojson::mat_from_json(iojson::require(em, "sigma"));
  artifact.error_model.threshold_logpd = iojson::require(em, "threshold_logpd").get<double>();
  artifact.error_model.ridge = iojson::require(em, "ridge").get<double>();
  return artifact;
}

}  // namespace hec::detectors
