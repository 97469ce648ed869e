#pragma once

#include <optional>
#include <vector>

#include "hec/types.hpp"

namespace hec::sim {

struct WindowRecord {
  long window_id = 0;
  std::vector<Layer> hops;  // layers visited, in order
  Layer final_layer = Layer::iot;
  bool verdict = false;  // true = anomalous
  bool truth = false;
  double delay_ms = 0.0;
  std::optional<double> reward;  // absent for the successive scheme

  bool correct() const { return verdict == truth; }
};

// Anomaly is the positive class. When precision or recall is undefined the
// F1 is reported as 0 with the degenerate flag set.
struct Metrics {
  double accuracy_pct = 0.0;
  double f1 = 0.0;
  bool f1_degenerate = false;
  double mean_delay_ms = 0.0;
  std::optional<double> mean_reward;
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

Metrics compute_metrics(const std::vector<WindowRecord>& records);

}  // namespace hec::sim
