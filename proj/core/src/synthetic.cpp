#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "hec/data/dataset.hpp"
#include "hec/rng.hpp"

namespace hec::data {

namespace {

constexpr int kPointsPerWeek = kPointsPerDay * kDaysPerWeek;  // 672

// Plateau window within a day, in 15-minute samples (9:00 to 18:00).
constexpr int kPlateauStart = 36;
constexpr int kPlateauEnd = 72;
constexpr int kRampLen = 8;

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace

double univariate_day_shape(int point_in_day) {
  // Night base 0.5, daytime plateau 1.0, raised-cosine style ramps.
  const int i = point_in_day;
  if (i < kPlateauStart - kRampLen) return 0.5;
  if (i < kPlateauStart) {
    return 0.5 + 0.5 * smoothstep((i - (kPlateauStart - kRampLen)) / double(kRampLen));
  }
  if (i < kPlateauEnd) return 1.0;
  if (i < kPlateauEnd + kRampLen) {
    return 1.0 - 0.5 * smoothstep((i - kPlateauEnd) / double(kRampLen));
  }
  return 0.5;
}

LabeledSeries synth_univariate(const SyntheticConfig& config) {
  SyntheticConfig cfg = config;
  cfg.kind = DatasetKind::univariate;
  cfg.validate();
  Rng rng(cfg.seed);

  const int weeks = cfg.weeks;
  const long total = static_cast<long>(weeks) * kPointsPerWeek;
  LabeledSeries series;
  series.kind = DatasetKind::univariate;
  series.values = Mat(total, 1);
  series.point_class.assign(total, 0);

  // Pick the anomalous weeks and, inside each, one weekday with a plateau dip.
  const long n_anomalous = std::llround(cfg.anomaly_fraction * weeks);
  std::vector<int> week_order(weeks);
  std::iota(week_order.begin(), week_order.end(), 0);
  rng.shuffle(week_order);
  std::vector<int> dip_day(weeks, -1);        // weekday index 0..4, -1 = none
  std::vector<double> dip_depth(weeks, 0.0);  // fraction of the weekday/weekend gap
  std::vector<int> dip_start(weeks, 0), dip_len(weeks, 0);
  for (long a = 0; a < n_anomalous; ++a) {
    const int w = week_order[a];
    dip_day[w] = static_cast<int>(rng.below(5));
    dip_depth[w] = rng.uniform(0.35, 1.0);
    dip_len[w] = 12 + static_cast<int>(rng.below(25));  // 3h .. 9h of plateau
    dip_start[w] = kPlateauStart +
                   static_cast<int>(rng.below(kPlateauEnd - kPlateauStart - dip_len[w] + 1));
  }

  for (int w = 0; w < weeks; ++w) {
    for (int d = 0; d < kDaysPerWeek; ++d) {
      const bool weekend = d >= 5;
      const double level = weekend ? kWeekendLevel : kWeekdayLevel;
      const bool dipped = !weekend && d == dip_day[w];
      for (int i = 0; i < kPointsPerDay; ++i) {
        const long t = static_cast<long>(w) * kPointsPerWeek + d * kPointsPerDay + i;
        double value = level * univariate_day_shape(i);
        if (dipped && i >= dip_start[w] && i < dip_start[w] + dip_len[w]) {
          // The plateau sags toward the weekend level for part of the day.
          value -= dip_depth[w] * (kWeekdayLevel - kWeekendLevel) * univariate_day_shape(i);
        }
        series.values(t, 0) = value + cfg.noise_std * rng.gaussian();
        if (dipped) series.point_class[t] = 1;
      }
    }
  }
  return series;
}

namespace {

// Channel layout: ankle acc/gyro/mag xyz then wrist acc/gyro/mag xyz.
// Instrument groups share a stride frequency; regimes scale it.
struct Regime {
  double freq_scale;
  double amp_scale;
  double mean_shift;
};

constexpr Regime kRegimes[] = {
    {1.00, 1.00, 0.0},   // class 0: dominant activity
    {1.60, 1.55, 0.45},  // class 1: obvious
    {1.30, 1.28, 0.22},  // class 2: moderate
    {1.12, 1.12, 0.09},  // class 3: subtle
};
constexpr int kAnomalyClasses = 3;
constexpr double kSampleHz = 50.0;

double group_base_freq(int group) {
  // Ankle instruments swing at the stride rate, wrist slightly slower.
  constexpr double f[] = {1.8, 1.8, 0.9, 1.1, 1.1, 0.55};
  return f[group];
}

double channel_base_amp(int channel) {
  constexpr double amp[] = {1.0, 0.8, 0.6};  // per axis within a triplet
  const int group = channel / 3;
  constexpr double group_amp[] = {1.2, 0.9, 0.5, 1.0, 0.8, 0.45};
  return group_amp[group] * amp[channel % 3];
}

}  // namespace

double multivariate_regime_mean(int channel) {
  constexpr double group_mean[] = {0.2, -0.1, 0.35, 0.05, -0.2, 0.3};
  return group_mean[channel / 3] + 0.05 * (channel % 3);
}

LabeledSeries synth_multivariate(const SyntheticConfig& config) {
  SyntheticConfig cfg = config;
  cfg.kind = DatasetKind::multivariate;
  cfg.validate();
  Rng rng(cfg.seed);

  constexpr int kSegmentsPerSubject = 30;
  LabeledSeries series;
  series.kind = DatasetKind::multivariate;

  std::vector<Mat> chunks;
  long total = 0;
  for (int subject = 0; subject < cfg.subjects; ++subject) {
    for (int seg = 0; seg < kSegmentsPerSubject; ++seg) {
      int cls = 0;
      if (cfg.anomaly_fraction > 0.0 && rng.uniform() < cfg.anomaly_fraction) {
        cls = 1 + static_cast<int>(rng.below(kAnomalyClasses));
      }
      const Regime regime = kRegimes[cls];
      const long len = 600 + static_cast<long>(rng.below(601));  // 12..24 s at 50 Hz
      Mat chunk(len, kMultivariateChannels);
      double phase[kMultivariateChannels];
      for (int c = 0; c < kMultivariateChannels; ++c) {
        phase[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      }
      for (long t = 0; t < len; ++t) {
        for (int c = 0; c < kMultivariateChannels; ++c) {
          const double f = group_base_freq(c / 3) * regime.freq_scale;
          const double amp = channel_base_amp(c) * regime.amp_scale;
          const double omega = 2.0 * std::numbers::pi * f * (t / kSampleHz);
          double v = multivariate_regime_mean(c) + regime.mean_shift +
                     amp * std::sin(omega + phase[c]) +
                     0.3 * amp * std::sin(2.0 * omega + 1.7 * phase[c]);
          chunk(t, c) = v + cfg.noise_std * rng.gaussian();
        }
      }
      chunks.push_back(std::move(chunk));
      series.point_class.insert(series.point_class.end(), len, cls);
      total += len;
    }
  }

  series.values = Mat(total, kMultivariateChannels);
  long row = 0;
  for (const auto& chunk : chunks) {
    series.values.block(row, 0, chunk.rows(), kMultivariateChannels) = chunk;
    row += chunk.rows();
  }
  return series;
}

}  // namespace hec::data
