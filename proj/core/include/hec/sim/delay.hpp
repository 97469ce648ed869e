#pragma once

#include <array>
#include <span>

#include "hec/types.hpp"

namespace hec::sim {

// Per-layer execution times and device-to-layer round-trip times, in
// milliseconds. rtt is measured from the device, so rtt[iot] is 0 and the
// values must strictly increase up the hierarchy.
struct DelayModel {
  std::array<double, kNumLayers> exec_univariate_ms{12.4, 7.4, 4.5};
  std::array<double, kNumLayers> exec_multivariate_ms{591.0, 417.3, 232.3};
  std::array<double, kNumLayers> rtt_ms{0.0, 250.0, 500.0};

  double exec_ms(Layer layer, DatasetKind kind) const;
  double rtt(Layer layer) const;
  void validate() const;

  static DelayModel standard() { return {}; }
};

// Single-layer end-to-end delay: execution plus the round trip to the layer.
double e2e_delay(const DelayModel& model, Layer layer, DatasetKind kind);

// Escalation path: every visited layer executes; each hop up pays the
// round-trip delta between the two layers, so the total communication cost
// telescopes to rtt of the last layer reached.
double e2e_delay(const DelayModel& model, DatasetKind kind, std::span<const Layer> hops);

}  // namespace hec::sim
