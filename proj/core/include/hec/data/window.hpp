#pragma once

#include <cstdint>
#include <vector>

#include "hec/tensor.hpp"
#include "hec/types.hpp"

namespace hec::data {

enum class WindowLabel { normal, anomalous };

// One detection unit: T x D standardized sensor values plus ground truth.
// anomaly_class is 0 for normal windows and 1..C for the anomalous regimes,
// so splits can draw per-class fractions.
struct Window {
  long id = 0;
  Mat values;
  WindowLabel label = WindowLabel::normal;
  long index = 0;  // day index (univariate) or window index (multivariate)
  int anomaly_class = 0;

  bool is_anomalous() const { return label == WindowLabel::anomalous; }
};

struct Standardization {
  Vec mean;
  Vec stddev;
};

}  // namespace hec::data
