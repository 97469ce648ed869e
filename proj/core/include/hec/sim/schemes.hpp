#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "hec/data/window.hpp"
#include "hec/detectors/detector.hpp"
#include "hec/policy/policy.hpp"
#include "hec/sim/delay.hpp"
#include "hec/sim/metrics.hpp"

namespace hec::sim {

enum class Scheme { iot_only, edge_only, cloud_only, successive, adaptive };

Scheme scheme_from_string(std::string_view s);
std::string_view to_string(Scheme s);
inline constexpr std::array<Scheme, 5> kAllSchemes = {
    Scheme::iot_only, Scheme::edge_only, Scheme::cloud_only, Scheme::successive,
    Scheme::adaptive};

struct EpisodeResult {
  Scheme scheme = Scheme::iot_only;
  std::vector<WindowRecord> records;
  Metrics metrics;
};

// Runs one scheme over a test set. Fixed-layer schemes always use their
// tier's detector; successive starts at iot and escalates while the verdict
// is not confident; adaptive asks the policy (greedy) per window. Simulated
// time only: delays are computed from the model, never slept.
EpisodeResult run_scheme(Scheme scheme, const std::vector<data::Window>& windows,
                         const std::array<detectors::DetectorArtifact, kNumLayers>& suite,
                         const policy::PolicyParams* policy_params,
                         const DelayModel& delay_model, const policy::RewardConfig& reward_config,
                         DatasetKind kind, const detectors::ConfidenceRule& rule = {});

}  // namespace hec::sim
