#include "hec/sim/delay.hpp"

#include <string>

namespace hec::sim {

double DelayModel::exec_ms(Layer layer, DatasetKind kind) const {
  const auto& exec =
      kind == DatasetKind::univariate ? exec_univariate_ms : exec_multivariate_ms;
  return exec[static_cast<int>(layer)];
}

double DelayModel::rtt(Layer layer) const { return rtt_ms[static_cast<int>(layer)]; }

void DelayModel::validate() const {
  for (int i = 0; i < kNumLayers; ++i) {
    if (exec_univariate_ms[i] <= 0.0 || exec_multivariate_ms[i] <= 0.0) {
      throw ConfigError("execution times must be > 0");
    }
  }
  if (rtt_ms[0] != 0.0) throw ConfigError("rtt of the iot layer must be 0 (device-local)");
  for (int i = 1; i < kNumLayers; ++i) {
    if (rtt_ms[i] <= rtt_ms[i - 1]) {
      throw ConfigError("rtt must strictly increase from iot to cloud");
    }
  }
}

double e2e_delay(const DelayModel& model, Layer layer, DatasetKind kind) {
  return model.exec_ms(layer, kind) + model.rtt(layer);
}

double e2e_delay(const DelayModel& model, DatasetKind kind, std::span<const Layer> hops) {
  if (hops.empty()) throw ConfigError("delay of an empty path is undefined");
  double total = 0.0;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    total += model.exec_ms(hops[i], kind);
    const double prev_rtt = i == 0 ? 0.0 : model.rtt(hops[i - 1]);
    if (i > 0 && model.rtt(hops[i]) < prev_rtt) {
      throw ConfigError("escalation path must move up the hierarchy");
    }
    total += model.rtt(hops[i]) - prev_rtt;
  }
  return total;
}

}  // namespace hec::sim
