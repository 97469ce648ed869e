#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hec/detectors/detector.hpp"
#include "hec/detectors/gaussian.hpp"
#include "hec/rng.hpp"
#include "support/oracles.hpp"

using namespace hec;
using namespace hec::detectors;
using hec::data::Window;
using hec::data::WindowLabel;
namespace ts = hec::testsupport;

namespace {

Window make_window(const Mat& values, long id = 0,
                   WindowLabel label = WindowLabel::normal) {
  Window w;
  w.id = id;
  w.values = values;
  w.label = label;
  return w;
}

// Small univariate AE detector for fixtures: 12-sample windows.
DetectorSpec tiny_ae_spec(int epochs = 120) {
  DetectorSpec spec;
  spec.family = ModelFamily::autoencoder;
  spec.layer = Layer::iot;
  nn::DenseNetSpec net;
  net.layer_widths = {12, 6, 12};
  net.activations = {nn::Activation::tanh, nn::Activation::linear};
  net.dropout_rate = 0.0;
  net.l2_lambda = 0.0;
  spec.net = net;
  spec.train.kind = nn::OptimizerKind::sgd;
  spec.train.learning_rate = 0.05;
  spec.train.epochs = epochs;
  spec.train.batch_size = 8;
  return spec;
}

// AE artifact with all-zero weights: reconstruction is identically zero, so
// the per-point error equals -x. Handy for exact detection fixtures.
DetectorArtifact zero_reconstructor(double threshold, int window_len = 96) {
  DetectorArtifact artifact;
  artifact.spec.family = ModelFamily::autoencoder;
  artifact.spec.layer = Layer::iot;
  nn::DenseNetSpec net;
  net.layer_widths = {window_len, 4, window_len};
  net.activations = {nn::Activation::tanh, nn::Activation::linear};
  artifact.spec.net = net;
  artifact.params = nn::init_dense(net, 0);
  for (auto& t : artifact.params.tensors) t.setZero();
  artifact.error_model.mu = Vec::Zero(1);
  artifact.error_model.sigma = Mat::Constant(1, 1, 1.0);
  artifact.error_model.threshold_logpd = threshold;
  artifact.error_model.ridge = 0.0;
  return artifact;
}

// logpd of a scalar error under the unit Gaussian used above.
double unit_logpd(double e) { return -0.5 * (std::log(2.0 * std::numbers::pi) + e * e); }

// Error magnitude that lands at a given logpd under the unit Gaussian.
double error_for_logpd(double lp) {
  return std::sqrt(-2.0 * lp - std::log(2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("logpd: 1-D standard normal at the mean") {
  GaussianErrorModel m;
  m.mu = Vec::Zero(1);
  m.sigma = Mat::Constant(1, 1, 1.0);
  CHECK(logpd(m, Vec::Zero(1)) == doctest::Approx(-0.918939).epsilon(1e-6));
}

TEST_CASE("logpd: 2-D identity covariance at the mean") {
  GaussianErrorModel m;
  m.mu = Vec::Constant(2, 0.7);
  m.sigma = Mat::Identity(2, 2);
  CHECK(logpd(m, m.mu) == doctest::Approx(-1.837877).epsilon(1e-6));
}

TEST_CASE("logpd matches the independent dense oracle on random 3-D cases") {
  Rng rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(3));
    Mat a(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) a(r, c) = rng.gaussian();
    }
    GaussianErrorModel m;
    m.sigma = a * a.transpose() + 0.5 * Mat::Identity(d, d);
    m.mu = Vec(d);
    Vec e(d);
    for (int i = 0; i < d; ++i) {
      m.mu(i) = rng.gaussian();
      e(i) = rng.gaussian();
    }

    std::vector<double> xo(d), muo(d);
    ts::Grid sig(d, std::vector<double>(d));
    for (int r = 0; r < d; ++r) {
      xo[r] = e(r);
      muo[r] = m.mu(r);
      for (int c = 0; c < d; ++c) sig[r][c] = m.sigma(r, c);
    }
    const double expected = ts::gaussian_logpdf_oracle(xo, muo, sig);
    CHECK(std::abs(logpd(m, e) - expected) < 1e-10);
  }
}

TEST_CASE("logpd is maximal at the mean and decreases along rays") {
  Rng rng(555);
  Mat a(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a(r, c) = rng.gaussian();
  }
  GaussianErrorModel m;
  m.sigma = a * a.transpose() + 0.3 * Mat::Identity(3, 3);
  m.mu = Vec::Constant(3, 0.25);
  const double peak = logpd(m, m.mu);
  for (int trial = 0; trial < 50; ++trial) {
    Vec dir(3);
    for (int i = 0; i < 3; ++i) dir(i) = rng.gaussian();
    dir.normalize();
    double prev = peak;
    for (double radius : {0.5, 1.0, 2.0, 4.0}) {
      const double lp = logpd(m, m.mu + radius * dir);
      CHECK(lp < prev);
      prev = lp;
    }
  }
}

TEST_CASE("fit_gaussian: two-point 1-D sample has unit population variance") {
  Mat errors(2, 1);
  errors << -1.0, 1.0;
  GaussianErrorModel m = fit_gaussian(errors);
  CHECK(m.mu(0) == doctest::Approx(0.0));
  CHECK(m.sigma(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(logpd(m, Vec::Zero(1)) == doctest::Approx(-0.9189).epsilon(1e-4));
  // Threshold is the minimum over the sample, attained at either point.
  CHECK(m.threshold_logpd == doctest::Approx(logpd(m, errors.row(0).transpose())));
}

TEST_CASE("fit_gaussian: degenerate zero errors trigger the ridge path") {
  Mat errors = Mat::Zero(50, 2);
  GaussianErrorModel m = fit_gaussian(errors);
  CHECK(m.ridge > 0.0);
  CHECK(m.sigma(0, 0) == doctest::Approx(m.ridge));
  CHECK(std::isfinite(m.threshold_logpd));
}

TEST_CASE("fit_gaussian: recovers a 2-D standard normal from 10k samples") {
  Rng rng(42);
  Mat errors(10000, 2);
  for (int r = 0; r < errors.rows(); ++r) {
    errors(r, 0) = rng.gaussian();
    errors(r, 1) = rng.gaussian();
  }
  GaussianErrorModel m = fit_gaussian(errors);
  CHECK(m.mu.cwiseAbs().maxCoeff() < 0.05);
  CHECK((m.sigma - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("fit_gaussian: threshold bounds every training point") {
  Rng rng(77);
  Mat errors(400, 3);
  for (int r = 0; r < errors.rows(); ++r) {
    for (int c = 0; c < 3; ++c) errors(r, c) = rng.gaussian(0.1 * c, 1.0 + c);
  }
  GaussianErrorModel m = fit_gaussian(errors);
  double min_seen = 1e300;
  for (int r = 0; r < errors.rows(); ++r) {
    min_seen = std::min(min_seen, logpd(m, errors.row(r).transpose()));
  }
  CHECK(m.threshold_logpd == doctest::Approx(min_seen));
  CHECK(m.threshold_logpd <= min_seen + 1e-12);
}

TEST_CASE("detect: clean window is not anomalous, outlier points flip the verdict") {
  DetectorArtifact artifact = zero_reconstructor(-3.0);
  // All-zero window: every error is 0, logpd ~ -0.919 > -3.
  Window clean = make_window(Mat::Zero(96, 1));
  Detection det = detect(artifact.params, artifact.spec, artifact.error_model, clean);
  CHECK_FALSE(det.is_anomaly);
  CHECK(det.confident);  // confidently normal: zero outlier points
  CHECK(det.anomalous_point_fraction == 0.0);
  CHECK(det.min_logpd == doctest::Approx(unit_logpd(0.0)));

  // One point dips just below the threshold but stays above 2x threshold.
  Mat values = Mat::Zero(96, 1);
  values(10, 0) = error_for_logpd(-4.0);
  Detection borderline =
      detect(artifact.params, artifact.spec, artifact.error_model, make_window(values));
  CHECK(borderline.is_anomaly);
  CHECK_FALSE(borderline.confident);
  CHECK(borderline.anomalous_point_fraction == doctest::Approx(1.0 / 96));
}

TEST_CASE("detect: a point below 2x threshold makes the anomaly confident") {
  DetectorArtifact artifact = zero_reconstructor(-10.0);
  Mat values = Mat::Zero(96, 1);
  values(3, 0) = error_for_logpd(-30.0);  // 3x the threshold, well past 2x
  Detection det =
      detect(artifact.params, artifact.spec, artifact.error_model, make_window(values));
  CHECK(det.is_anomaly);
  CHECK(det.confident);
  CHECK(det.min_logpd == doctest::Approx(-30.0));
}

TEST_CASE("detect: more than 5% outlier points makes the anomaly confident") {
  DetectorArtifact artifact = zero_reconstructor(-3.0, 100);
  Mat values = Mat::Zero(100, 1);
  const double mild = error_for_logpd(-3.5);  // below threshold, above 2x
  for (int i = 0; i < 10; ++i) values(i, 0) = mild;
  Detection det =
      detect(artifact.params, artifact.spec, artifact.error_model, make_window(values));
  CHECK(det.is_anomaly);
  CHECK(det.anomalous_point_fraction == doctest::Approx(0.10));
  CHECK(det.confident);
}

TEST_CASE("detect is a pure function of its inputs") {
  DetectorArtifact artifact = zero_reconstructor(-3.0);
  Rng rng(9);
  Mat values(96, 1);
  for (int i = 0; i < 96; ++i) values(i, 0) = rng.gaussian();
  Window w = make_window(values);
  Detection a = detect(artifact.params, artifact.spec, artifact.error_model, w);
  Detection b = detect(artifact.params, artifact.spec, artifact.error_model, w);
  CHECK(a.is_anomaly == b.is_anomaly);
  CHECK(a.confident == b.confident);
  CHECK(a.min_logpd == b.min_logpd);
  CHECK(a.per_point_logpd == b.per_point_logpd);
}

TEST_CASE("confidence rule arithmetic") {
  Detection det;
  det.is_anomaly = false;
  det.anomalous_point_fraction = 0.0;
  det.min_logpd = -1.0;
  CHECK(is_confident(det, -8.0));  // confidently normal

  det.is_anomaly = true;
  det.anomalous_point_fraction = 0.02;
  det.min_logpd = -17.0;
  CHECK(is_confident(det, -8.0));  // -17 < -16

  det.min_logpd = -12.0;
  det.anomalous_point_fraction = 0.03;
  CHECK_FALSE(is_confident(det, -8.0));  // neither condition holds
}

TEST_CASE("confidence implications hold on randomized detections") {
  DetectorArtifact artifact = zero_reconstructor(-2.5, 64);
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    Mat values(64, 1);
    for (int i = 0; i < 64; ++i) values(i, 0) = 2.2 * rng.gaussian();
    Detection det =
        detect(artifact.params, artifact.spec, artifact.error_model, make_window(values));
    const bool confident_normal = det.anomalous_point_fraction == 0.0;
    if (det.confident && !confident_normal) CHECK(det.is_anomaly);
    if (confident_normal) CHECK_FALSE(det.is_anomaly);
  }
}

TEST_CASE("train_detector: constant windows become easy to reconstruct") {
  DetectorSpec spec = tiny_ae_spec();
  std::vector<Window> windows;
  for (int i = 0; i < 32; ++i) {
    windows.push_back(make_window(Mat::Constant(12, 1, 0.8), i));
  }
  nn::NetParams initial = nn::init_dense(std::get<nn::DenseNetSpec>(spec.net), 5);
  double initial_err = 0.0;
  for (const auto& w : windows) {
    initial_err += (reconstruct(initial, spec, w.values) - w.values).cwiseAbs().mean();
  }
  nn::NetParams trained = train_detector(spec, windows, 5);
  double trained_err = 0.0;
  for (const auto& w : windows) {
    trained_err += (reconstruct(trained, spec, w.values) - w.values).cwiseAbs().mean();
  }
  CHECK(trained_err < 0.1 * initial_err);
}

TEST_CASE("train_detector is deterministic per seed") {
  DetectorSpec spec = tiny_ae_spec(20);
  std::vector<Window> windows;
  Rng rng(8);
  for (int i = 0; i < 16; ++i) {
    Mat v(12, 1);
    for (int r = 0; r < 12; ++r) v(r, 0) = std::sin(0.5 * r) + 0.1 * rng.gaussian();
    windows.push_back(make_window(v, i));
  }
  nn::NetParams a = train_detector(spec, windows, 99);
  nn::NetParams b = train_detector(spec, windows, 99);
  REQUIRE(a.tensors.size() == b.tensors.size());
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    CHECK(a.tensors[i] == b.tensors[i]);  // bit-identical
  }
  nn::NetParams c = train_detector(spec, windows, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    if (a.tensors[i] != c.tensors[i]) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("train_detector rejects anomalous windows and empty sets") {
  DetectorSpec spec = tiny_ae_spec(5);
  CHECK_THROWS_AS(train_detector(spec, {}, 1), DataError);
  std::vector<Window> windows{make_window(Mat::Zero(12, 1), 0, WindowLabel::anomalous)};
  CHECK_THROWS_AS(train_detector(spec, windows, 1), DataError);
}

TEST_CASE("fit_error_model pools per-point errors across windows") {
  DetectorArtifact artifact = zero_reconstructor(0.0, 4);
  std::vector<Window> windows;
  Mat a(4, 1), b(4, 1);
  a << 1, 1, -1, -1;
  b << 2, -2, 2, -2;
  windows.push_back(make_window(a, 0));
  windows.push_back(make_window(b, 1));
  // Errors are -x pooled over 8 points: mean 0, population variance 2.5.
  GaussianErrorModel m = fit_error_model(artifact.params, artifact.spec, windows);
  CHECK(m.mu(0) == doctest::Approx(0.0));
  CHECK(m.sigma(0, 0) == doctest::Approx(2.5).epsilon(1e-5));
}

TEST_CASE("detector bundle round-trips through disk") {
  DetectorSpec spec = tiny_ae_spec(15);
  std::vector<Window> windows;
  Rng rng(3);
  for (int i = 0; i < 12; ++i) {
    Mat v(12, 1);
    for (int r = 0; r < 12; ++r) v(r, 0) = std::cos(0.4 * r) + 0.05 * rng.gaussian();
    windows.push_back(make_window(v, i));
  }
  DetectorArtifact artifact;
  artifact.spec = spec;
  artifact.params = train_detector(spec, windows, 7);
  artifact.error_model = fit_error_model(artifact.params, artifact.spec, windows);

  const auto path = std::filesystem::temp_directory_path() / "hec_test_bundle.json";
  save_bundle(path, artifact);
  DetectorArtifact loaded = load_bundle(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.params.tensors.size() == artifact.params.tensors.size());
  for (std::size_t i = 0; i < loaded.params.tensors.size(); ++i) {
    CHECK(loaded.params.tensors[i] == artifact.params.tensors[i]);
  }
  CHECK(loaded.error_model.threshold_logpd == artifact.error_model.threshold_logpd);
  CHECK(loaded.error_model.sigma == artifact.error_model.sigma);

  Window probe = windows.front();
  Detection before = detect(artifact.params, artifact.spec, artifact.error_model, probe);
  Detection after = detect(loaded.params, loaded.spec, loaded.error_model, probe);
  CHECK(before.min_logpd == after.min_logpd);
  CHECK(before.is_anomaly == after.is_anomaly);
}

TEST_CASE("standard specs cover the six models with increasing complexity") {
  for (DatasetKind kind : {DatasetKind::univariate, DatasetKind::multivariate}) {
    std::vector<DetectorSpec> suite;
    for (int l = 0; l < kNumLayers; ++l) {
      suite.push_back(DetectorSpec::standard(kind, static_cast<Layer>(l)));
    }
    CHECK_NOTHROW(validate_detector_suite(suite));
    CHECK(suite[0].param_count() < suite[1].param_count());
    CHECK(suite[1].param_count() < suite[2].param_count());
  }
  CHECK(DetectorSpec::standard(DatasetKind::multivariate, Layer::cloud).family ==
        ModelFamily::bilstm_seq2seq);
}
