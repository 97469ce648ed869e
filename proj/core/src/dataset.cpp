#include "hec/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "hec/rng.hpp"

namespace hec::data {

StandardizeResult standardize(const Mat& series, const std::optional<Standardization>& stats) {
  if (series.rows() == 0) throw DataError("cannot standardize an empty series");
  StandardizeResult out;
  if (stats) {
    if (stats->mean.size() != series.cols() || stats->stddev.size() != series.cols()) {
      throw ShapeError("standardization statistics do not match the channel count");
    }
    out.stats = *stats;
  } else {
    const double n = static_cast<double>(series.rows());
    out.stats.mean = series.colwise().mean().transpose();
    Mat centered = series.rowwise() - out.stats.mean.transpose();
    out.stats.stddev = (centered.array().square().colwise().sum() / n).sqrt().transpose();
    for (int c = 0; c < series.cols(); ++c) {
      if (out.stats.stddev(c) == 0.0) {
        out.stats.stddev(c) = 1.0;
        out.constant_channels.push_back(c);
      }
    }
  }
  out.values = (series.rowwise() - out.stats.mean.transpose()).array().rowwise() /
               out.stats.stddev.transpose().array();
  return out;
}

std::vector<Window> make_windows(const LabeledSeries& series, int window_len, int step) {
  if (window_len < 1 || step < 1) throw ConfigError("window_len and step must be >= 1");
  const long length = series.values.rows();
  if (length < window_len) {
    throw DataError("series of length " + std::to_string(length) +
                    " is shorter than one window (" + std::to_string(window_len) + ")");
  }
  if (!series.point_class.empty() &&
      static_cast<long>(series.point_class.size()) != length) {
    throw ShapeError("point class labels do not match the series length");
  }

  std::vector<Window> windows;
  const long count = (length - window_len) / step + 1;
  windows.reserve(count);
  for (long w = 0; w < count; ++w) {
    const long start = w * step;
    Window win;
    win.id = w;
    win.index = w;
    win.values = series.values.block(start, 0, window_len, series.values.cols());
    if (!series.point_class.empty()) {
      long anomalous_points = 0;
      std::map<int, long> class_counts;
      for (long t = start; t < start + window_len; ++t) {
        if (series.point_class[t] > 0) {
          ++anomalous_points;
          ++class_counts[series.point_class[t]];
        }
      }
      if (2 * anomalous_points > window_len) {
        win.label = WindowLabel::anomalous;
        long best = 0;
        for (const auto& [cls, n] : class_counts) {
          if (n > best) {
            best = n;
            win.anomaly_class = cls;
          }
        }
      }
    }
    windows.push_back(std::move(win));
  }
  return windows;
}

void SyntheticConfig::validate() const {
  if (anomaly_fraction < 0.0 || anomaly_fraction > 0.5) {
    throw ConfigError("anomaly_fraction must be in [0, 0.5]");
  }
  if (noise_std < 0.0) throw ConfigError("noise_std must be >= 0");
  if (kind == DatasetKind::univariate && weeks < 3) {
    throw ConfigError("univariate generation needs at least 3 weeks");
  }
  if (kind == DatasetKind::multivariate && subjects < 1) {
    throw ConfigError("multivariate generation needs at least 1 subject");
  }
}

void SplitRatios::validate() const {
  if (ad_train_normal_fraction <= 0.0 || ad_train_normal_fraction >= 1.0) {
    throw ConfigError("ad_train_normal_fraction must be in (0, 1)");
  }
  if (anomaly_test_fraction <= 0.0 || anomaly_test_fraction > 1.0) {
    throw ConfigError("anomaly_test_fraction must be in (0, 1]");
  }
}

namespace {

std::vector<Window> pick(const std::vector<Window>& all, const std::vector<long>& ids) {
  std::vector<Window> out;
  out.reserve(ids.size());
  for (long id : ids) out.push_back(all[id]);
  return out;
}

}  // namespace

DatasetBundle split_windows(const std::vector<Window>& raw, DatasetKind kind,
                            const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  if (raw.empty()) throw DataError("no windows to split");

  std::vector<long> normal_ids;
  std::map<int, std::vector<long>> class_ids;
  for (long i = 0; i < static_cast<long>(raw.size()); ++i) {
    if (raw[i].is_anomalous()) {
      class_ids[raw[i].anomaly_class].push_back(i);
    } else {
      normal_ids.push_back(i);
    }
  }
  if (normal_ids.empty()) throw DataError("no normal windows to train on");

  Rng rng(seed);
  rng.shuffle(normal_ids);
  const long n_train =
      std::llround(ratios.ad_train_normal_fraction * static_cast<double>(normal_ids.size()));
  if (n_train < 1 || n_train >= static_cast<long>(normal_ids.size())) {
    throw DataError("split leaves an empty partition; generate more normal windows");
  }
  std::vector<long> train_ids(normal_ids.begin(), normal_ids.begin() + n_train);
  std::vector<long> test_ids(normal_ids.begin() + n_train, normal_ids.end());
  for (auto& [cls, ids] : class_ids) {
    const long take =
        std::llround(ratios.anomaly_test_fraction * static_cast<double>(ids.size()));
    if (take < 1) {
      throw DataError("anomalous class " + std::to_string(cls) + " has only " +
                      std::to_string(ids.size()) +
                      " windows; too few to draw " +
                      std::to_string(100.0 * ratios.anomaly_test_fraction) +
                      "% from - generate a larger dataset");
    }
    rng.shuffle(ids);
    test_ids.insert(test_ids.end(), ids.begin(), ids.begin() + take);
  }
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());

  // Standardization statistics come from ad_train only.
  const long t = raw.front().values.rows();
  const long d = raw.front().values.cols();
  Mat pooled(static_cast<long>(train_ids.size()) * t, d);
  for (long i = 0; i < static_cast<long>(train_ids.size()); ++i) {
    pooled.block(i * t, 0, t, d) = raw[train_ids[i]].values;
  }
  StandardizeResult std_res = standardize(pooled);

  std::vector<Window> standardized = raw;
  for (auto& w : standardized) {
    w.values = standardize(w.values, std_res.stats).values;
  }

  DatasetBundle bundle;
  bundle.kind = kind;
  bundle.stats = std_res.stats;
  bundle.constant_channels = std_res.constant_channels;
  bundle.ad_train = pick(standardized, train_ids);
  bundle.ad_test = pick(standardized, test_ids);
  bundle.policy_train = bundle.ad_test;
  bundle.policy_test = standardized;
  return bundle;
}

}  // namespace hec::data
