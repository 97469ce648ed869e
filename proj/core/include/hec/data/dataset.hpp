#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hec/data/window.hpp"
#include "hec/tensor.hpp"
#include "hec/types.hpp"

namespace hec::data {

struct StandardizeResult {
  Mat values;
  Standardization stats;
  std::vector<int> constant_channels;  // zero-variance channels, std forced to 1
};

// Per-channel zero-mean unit-variance transform (population statistics). When
// stats are given they are applied as-is; otherwise they are computed from
// the series itself.
StandardizeResult standardize(const Mat& series,
                              const std::optional<Standardization>& stats = std::nullopt);

// Raw multichannel series with a per-point class: 0 normal, 1..C anomalous.
struct LabeledSeries {
  DatasetKind kind = DatasetKind::univariate;
  Mat values;
  std::vector<int> point_class;
};

// Sliding windows: floor((L - len)/step) + 1 of them, in order. A window is
// anomalous when more than half of its points are; its class is the most
// common anomalous class inside it.
std::vector<Window> make_windows(const LabeledSeries& series, int window_len, int step);

struct SyntheticConfig {
  DatasetKind kind = DatasetKind::univariate;
  int weeks = 10;     // univariate
  int subjects = 2;   // multivariate
  double anomaly_fraction = 0.2;
  double noise_std = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

// Weekly power-style cycle: 15-minute sampling, 96 points per day, five
// weekday plateaus and two weekend lows. Anomalous weeks get one weekday
// whose plateau drops toward the weekend level; labels are per day.
LabeledSeries synth_univariate(const SyntheticConfig& config);

// 18-channel quasi-periodic activity recording at 50 Hz in segments. The
// dominant regime is normal; three shifted frequency/amplitude regimes stand
// in for other activities, graded from obvious to subtle.
LabeledSeries synth_multivariate(const SyntheticConfig& config);

// Day profile helpers used by the generator and its tests.
double univariate_day_shape(int point_in_day);
inline constexpr int kPointsPerDay = 96;
inline constexpr int kDaysPerWeek = 7;
inline constexpr double kWeekdayLevel = 1.0;
inline constexpr double kWeekendLevel = 0.3;
inline constexpr int kMultivariateChannels = 18;
inline constexpr int kMultivariateWindowLen = 128;
inline constexpr int kMultivariateWindowStep = 64;

// Regime mean of a channel under the normal activity.
double multivariate_regime_mean(int channel);

struct SplitRatios {
  double ad_train_normal_fraction = 0.7;
  double anomaly_test_fraction = 0.05;  // per anomalous class

  void validate() const;
};

struct DatasetBundle {
  DatasetKind kind = DatasetKind::univariate;
  std::vector<Window> ad_train;      // standardized, normal only
  std::vector<Window> ad_test;       // remaining normals + 5% of each anomaly class
  std::vector<Window> policy_train;  // same recipe as ad_test
  std::vector<Window> policy_test;   // every window
  Standardization stats;             // computed on ad_train, applied everywhere
  std::vector<int> constant_channels;
};

// Splits raw windows per the evaluation protocol and standardizes every
// partition with the ad_train statistics.
DatasetBundle split_windows(const std::vector<Window>& raw, DatasetKind kind,
                            const SplitRatios& ratios, std::uint64_t seed);

}  // namespace hec::data
