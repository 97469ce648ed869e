#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hec/data/csv.hpp"
#include "hec/data/dataset.hpp"
#include "hec/data/io.hpp"

using namespace hec;
using namespace hec::data;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("standardize: three-point series") {
  Mat series(3, 1);
  series << 1, 2, 3;
  auto res = standardize(series);
  CHECK(res.stats.mean(0) == doctest::Approx(2.0));
  CHECK(res.stats.stddev(0) == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(res.values(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(res.values(1, 0) == doctest::Approx(0.0));
  CHECK(res.values(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK(res.constant_channels.empty());
}

TEST_CASE("standardize: constant channel maps to zeros and is flagged") {
  Mat series(3, 2);
  series << 5, 1, 5, 2, 5, 3;
  auto res = standardize(series);
  CHECK(res.values.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  REQUIRE(res.constant_channels.size() == 1);
  CHECK(res.constant_channels[0] == 0);
}

TEST_CASE("standardize: reapplying training stats keeps the training mean at zero") {
  Mat series(200, 3);
  for (int r = 0; r < 200; ++r) {
    for (int c = 0; c < 3; ++c) series(r, c) = std::sin(0.1 * r + c) * (c + 1) + 2 * c;
  }
  auto first = standardize(series);
  auto again = standardize(series, first.stats);
  CHECK(again.values.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(again.values == first.values);
}

TEST_CASE("make_windows: counts and offsets") {
  LabeledSeries series;
  series.values = Mat(256, 1);
  for (int i = 0; i < 256; ++i) series.values(i, 0) = i;
  auto windows = make_windows(series, 128, 64);
  REQUIRE(windows.size() == 3);
  CHECK(windows[0].values(0, 0) == 0);
  CHECK(windows[1].values(0, 0) == 64);
  CHECK(windows[2].values(0, 0) == 128);

  series.values = Mat::Zero(128, 1);
  CHECK(make_windows(series, 128, 64).size() == 1);

  series.values = Mat::Zero(672, 1);
  CHECK(make_windows(series, 96, 96).size() == 7);
}

TEST_CASE("make_windows: majority labeling with the dominant anomalous class") {
  LabeledSeries series;
  series.values = Mat::Zero(10, 1);
  series.point_class = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  // Window covering points 2..8: 5 anomalous of 7 -> anomalous, class 1 wins.
  auto windows = make_windows(series, 7, 2);
  REQUIRE(windows.size() == 2);
  CHECK_FALSE(windows[0].is_anomalous());  // points 0..6: 3 of 7 anomalous
  CHECK(windows[1].is_anomalous());
  CHECK(windows[1].anomaly_class == 1);
}

TEST_CASE("make_windows: adjacent windows with step == length tile the series") {
  LabeledSeries series;
  series.values = Mat(10, 2);
  for (int r = 0; r < 10; ++r) {
    series.values(r, 0) = r;
    series.values(r, 1) = -r;
  }
  auto windows = make_windows(series, 3, 3);
  REQUIRE(windows.size() == 3);
  Mat rebuilt(9, 2);
  for (int w = 0; w < 3; ++w) rebuilt.block(3 * w, 0, 3, 2) = windows[w].values;
  CHECK(rebuilt == series.values.topRows(9));
  CHECK_THROWS_AS(make_windows(series, 11, 1), DataError);
}

TEST_CASE("synth_univariate: label bookkeeping matches the contract") {
  SyntheticConfig cfg;
  cfg.kind = DatasetKind::univariate;
  cfg.weeks = 10;
  cfg.anomaly_fraction = 0.2;
  cfg.seed = 7;
  LabeledSeries series = synth_univariate(cfg);
  CHECK(series.values.rows() == 10 * 672);

  auto windows = make_windows(series, kPointsPerDay, kPointsPerDay);
  REQUIRE(windows.size() == 70);
  long anomalous = 0;
  for (const auto& w : windows) anomalous += w.is_anomalous() ? 1 : 0;
  CHECK(anomalous == 2);  // two anomalous weeks, one bad day each
}

TEST_CASE("synth_univariate: noiseless anomalies sag below the weekday plateau") {
  SyntheticConfig cfg;
  cfg.kind = DatasetKind::univariate;
  cfg.weeks = 12;
  cfg.anomaly_fraction = 0.25;
  cfg.noise_std = 0.0;
  cfg.seed = 3;
  LabeledSeries series = synth_univariate(cfg);
  auto windows = make_windows(series, kPointsPerDay, kPointsPerDay);
  int checked = 0;
  for (const auto& w : windows) {
    if (!w.is_anomalous()) continue;
    ++checked;
    double max_sag = 0.0;
    for (int i = 0; i < kPointsPerDay; ++i) {
      const double weekday = kWeekdayLevel * univariate_day_shape(i);
      const double sag = weekday - w.values(i, 0);
      CHECK(sag >= -1e-12);  // never above the weekday profile
      max_sag = std::max(max_sag, sag);
    }
    CHECK(max_sag > 0.2);
  }
  CHECK(checked == 3);
}

TEST_CASE("generators are pure functions of their config") {
  SyntheticConfig cfg;
  cfg.kind = DatasetKind::univariate;
  cfg.weeks = 5;
  cfg.anomaly_fraction = 0.2;
  cfg.seed = 11;
  auto a = synth_univariate(cfg);
  auto b = synth_univariate(cfg);
  CHECK(a.values == b.values);
  CHECK(a.point_class == b.point_class);
  cfg.seed = 12;
  CHECK(synth_univariate(cfg).values != a.values);

  SyntheticConfig mcfg;
  mcfg.kind = DatasetKind::multivariate;
  mcfg.subjects = 1;
  mcfg.anomaly_fraction = 0.3;
  mcfg.seed = 4;
  auto m1 = synth_multivariate(mcfg);
  auto m2 = synth_multivariate(mcfg);
  CHECK(m1.values == m2.values);
  CHECK(m1.point_class == m2.point_class);
}

TEST_CASE("synth_multivariate: zero anomaly fraction yields only normal windows") {
  SyntheticConfig cfg;
  cfg.kind = DatasetKind::multivariate;
  cfg.subjects = 1;
  cfg.anomaly_fraction = 0.0;
  cfg.seed = 5;
  LabeledSeries series = synth_multivariate(cfg);
  CHECK(series.values.cols() == kMultivariateChannels);
  auto windows = make_windows(series, kMultivariateWindowLen, kMultivariateWindowStep);
  CHECK(windows.size() > 100);
  for (const auto& w : windows) CHECK_FALSE(w.is_anomalous());
}

TEST_CASE("synth_multivariate: normal channel means track the regime means") {
  SyntheticConfig cfg;
  cfg.kind = DatasetKind::multivariate;
  cfg.subjects = 1;
  cfg.anomaly_fraction = 0.0;
  cfg.noise_std = 0.1;
  cfg.seed = 6;
  LabeledSeries series = synth_multivariate(cfg);
  const Vec means = series.values.colwise().mean().transpose();
  for (int c = 0; c < kMultivariateChannels; ++c) {
    CHECK(std::abs(means(c) - multivariate_regime_mean(c)) < 0.2);
  }
}

namespace {

std::vector<Window> fixture_windows(int normals, int anomalies, int cls = 1) {
  std::vector<Window> windows;
  long id = 0;
  for (int i = 0; i < normals; ++i) {
    Window w;
    w.id = id++;
    w.index = w.id;
    w.values = Mat::Constant(4, 2, 1.0 + 0.01 * i);
    windows.push_back(std::move(w));
  }
  for (int i = 0; i < anomalies; ++i) {
    Window w;
    w.id = id++;
    w.index = w.id;
    w.values = Mat::Constant(4, 2, 9.0);
    w.label = WindowLabel::anomalous;
    w.anomaly_class = cls;
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace

TEST_CASE("split_windows: 70/30 normals plus 5% of each anomalous class") {
  auto raw = fixture_windows(100, 40);
  DatasetBundle bundle = split_windows(raw, DatasetKind::univariate, {}, 21);
  CHECK(bundle.ad_train.size() == 70);
  CHECK(bundle.ad_test.size() == 30 + 2);  // 5% of 40
  CHECK(bundle.policy_train.size() == bundle.ad_test.size());
  CHECK(bundle.policy_test.size() == raw.size());
  for (const auto& w : bundle.ad_train) CHECK_FALSE(w.is_anomalous());
  for (std::size_t i = 0; i < bundle.ad_test.size(); ++i) {
    CHECK(bundle.policy_train[i].id == bundle.ad_test[i].id);
  }
}

TEST_CASE("split_windows: standardization comes from ad_train alone") {
  auto raw = fixture_windows(40, 20);
  DatasetBundle bundle = split_windows(raw, DatasetKind::univariate, {}, 3);
  Mat pooled(static_cast<long>(bundle.ad_train.size()) * 4, 2);
  for (std::size_t i = 0; i < bundle.ad_train.size(); ++i) {
    pooled.block(static_cast<long>(i) * 4, 0, 4, 2) = bundle.ad_train[i].values;
  }
  CHECK(pooled.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
  // Anomalous windows stay far from zero after the same transform.
  double max_anom = 0.0;
  for (const auto& w : bundle.ad_test) {
    if (w.is_anomalous()) max_anom = std::max(max_anom, w.values.cwiseAbs().maxCoeff());
  }
  CHECK(max_anom > 3.0);
}

TEST_CASE("split_windows is deterministic per seed") {
  auto raw = fixture_windows(50, 30);
  DatasetBundle a = split_windows(raw, DatasetKind::univariate, {}, 9);
  DatasetBundle b = split_windows(raw, DatasetKind::univariate, {}, 9);
  REQUIRE(a.ad_train.size() == b.ad_train.size());
  for (std::size_t i = 0; i < a.ad_train.size(); ++i) {
    CHECK(a.ad_train[i].id == b.ad_train[i].id);
  }
  DatasetBundle c = split_windows(raw, DatasetKind::univariate, {}, 10);
  bool differs = false;
  for (std::size_t i = 0; i < a.ad_train.size(); ++i) {
    if (a.ad_train[i].id != c.ad_train[i].id) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("split_windows: scarce anomaly classes are rejected with advice") {
  auto raw = fixture_windows(100, 5);
  CHECK_THROWS_WITH_AS(split_windows(raw, DatasetKind::univariate, {}, 1),
                       doctest::Contains("larger dataset"), DataError);
}

TEST_CASE("ingest_csv: single column") {
  auto path = temp_file("hec_csv_single.csv", "1\n2\n3\n");
  Mat series = ingest_csv(path, 1);
  std::filesystem::remove(path);
  REQUIRE(series.rows() == 3);
  CHECK(series(0, 0) == 1);
  CHECK(series(2, 0) == 3);
}

TEST_CASE("ingest_csv: bad cell names line and column") {
  std::string row;
  for (int c = 0; c < 18; ++c) row += (c == 11 ? std::string("oops") : std::to_string(c)) + (c < 17 ? "," : "");
  auto path = temp_file("hec_csv_bad.csv", row + "\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path, 18), doctest::Contains("column 12"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("ingest_csv: empty files and ragged rows are rejected") {
  auto empty = temp_file("hec_csv_empty.csv", "");
  CHECK_THROWS_AS(ingest_csv(empty, 1), DataError);
  std::filesystem::remove(empty);
  auto ragged = temp_file("hec_csv_ragged.csv", "1,2\n3\n");
  CHECK_THROWS_WITH_AS(ingest_csv(ragged, 2), doctest::Contains("line 2"), DataError);
  std::filesystem::remove(ragged);
}

TEST_CASE("dataset bundle round-trips through a directory byte-identically") {
  SyntheticConfig cfg;
  cfg.kind = DatasetKind::univariate;
  cfg.weeks = 8;
  cfg.anomaly_fraction = 0.25;
  cfg.seed = 13;
  auto windows = make_windows(synth_univariate(cfg), kPointsPerDay, kPointsPerDay);
  // Duplicate the anomalies so the 5% draw is feasible on a small fixture.
  std::vector<Window> raw = windows;
  long next_id = static_cast<long>(raw.size());
  for (int copy = 0; copy < 10; ++copy) {
    for (const auto& w : windows) {
      if (w.is_anomalous()) {
        Window dup = w;
        dup.id = next_id++;
        raw.push_back(std::move(dup));
      }
    }
  }
  DatasetBundle bundle = split_windows(raw, DatasetKind::univariate, {}, 17);

  const auto dir = std::filesystem::temp_directory_path() / "hec_dataset_roundtrip";
  std::filesystem::remove_all(dir);
  DatasetProvenance prov{cfg.seed, 17, {}};
  save_dataset(dir, bundle, prov);
  DatasetBundle loaded = load_dataset(dir);

  REQUIRE(loaded.ad_train.size() == bundle.ad_train.size());
  REQUIRE(loaded.policy_test.size() == bundle.policy_test.size());
  CHECK(loaded.stats.mean == bundle.stats.mean);
  for (std::size_t i = 0; i < bundle.ad_train.size(); ++i) {
    CHECK(loaded.ad_train[i].values == bundle.ad_train[i].values);
    CHECK(loaded.ad_train[i].id == bundle.ad_train[i].id);
  }

  // Saving again produces identical bytes (idempotent outputs).
  const auto dir2 = std::filesystem::temp_directory_path() / "hec_dataset_roundtrip2";
  std::filesystem::remove_all(dir2);
  save_dataset(dir2, bundle, prov);
  for (const char* name : {"manifest.json", "ad_train.jsonl", "policy_test.jsonl"}) {
    std::ifstream a(dir / name), b(dir2 / name);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}
