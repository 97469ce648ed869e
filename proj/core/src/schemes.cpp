#include "hec/sim/schemes.hpp"

#include <string>

namespace hec::sim {

Scheme scheme_from_string(std::string_view s) {
  if (s == "iot_only") return Scheme::iot_only;
  if (s == "edge_only") return Scheme::edge_only;
  if (s == "cloud_only") return Scheme::cloud_only;
  if (s == "successive") return Scheme::successive;
  if (s == "adaptive") return Scheme::adaptive;
  throw ConfigError("unknown scheme: " + std::string(s));
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::iot_only: return "iot_only";
    case Scheme::edge_only: return "edge_only";
    case Scheme::cloud_only: return "cloud_only";
    case Scheme::successive: return "successive";
    case Scheme::adaptive: return "adaptive";
  }
  return "?";
}

namespace {

detectors::Detection detect_at(const std::array<detectors::DetectorArtifact, kNumLayers>& suite,
                               Layer layer, const data::Window& window,
                               const detectors::ConfidenceRule& rule) {
  const auto& artifact = suite[static_cast<int>(layer)];
  return detectors::detect(artifact.params, artifact.spec, artifact.error_model, window, rule);
}

WindowRecord fixed_layer_record(Layer layer, const data::Window& window,
                                const std::array<detectors::DetectorArtifact, kNumLayers>& suite,
                                const DelayModel& delay_model,
                                const policy::RewardConfig& reward_config, DatasetKind kind,
                                const detectors::ConfidenceRule& rule) {
  WindowRecord rec;
  rec.window_id = window.id;
  rec.hops = {layer};
  rec.final_layer = layer;
  rec.truth = window.is_anomalous();
  rec.verdict = detect_at(suite, layer, window, rule).is_anomaly;
  rec.delay_ms = e2e_delay(delay_model, layer, kind);
  rec.reward = (rec.correct() ? 1.0 : 0.0) - policy::cost(rec.delay_ms, reward_config.alpha);
  return rec;
}

}  // namespace

EpisodeResult run_scheme(Scheme scheme, const std::vector<data::Window>& windows,
                         const std::array<detectors::DetectorArtifact, kNumLayers>& suite,
                         const policy::PolicyParams* policy_params,
                         const DelayModel& delay_model, const policy::RewardConfig& reward_config,
                         DatasetKind kind, const detectors::ConfidenceRule& rule) {
  delay_model.validate();
  if (windows.empty()) throw DataError("no windows to evaluate");
  if (scheme == Scheme::adaptive && !policy_params) {
    throw ArtifactError("the adaptive scheme needs a trained policy");
  }

  EpisodeResult result;
  result.scheme = scheme;
  result.records.reserve(windows.size());
  const detectors::DetectorArtifact* iot_encoder =
      kind == DatasetKind::multivariate ? &suite[0] : nullptr;
  Rng greedy_rng(0);  // greedy selection never consumes randomness

  for (const auto& window : windows) {
    switch (scheme) {
      case Scheme::iot_only:
      case Scheme::edge_only:
      case Scheme::cloud_only: {
        const Layer layer = scheme == Scheme::iot_only   ? Layer::iot
                            : scheme == Scheme::edge_only ? Layer::edge
                                                          : Layer::cloud;
        result.records.push_back(fixed_layer_record(layer, window, suite, delay_model,
                                                    reward_config, kind, rule));
        break;
      }
      case Scheme::successive: {
        WindowRecord rec;
        rec.window_id = window.id;
        rec.truth = window.is_anomalous();
        for (int k = 0; k < kNumLayers; ++k) {
          const Layer layer = static_cast<Layer>(k);
          rec.hops.push_back(layer);
          const detectors::Detection det = detect_at(suite, layer, window, rule);
          rec.verdict = det.is_anomaly;
          rec.final_layer = layer;
          if (det.confident) break;  // stop at a confident verdict or the cloud
        }
        rec.delay_ms = e2e_delay(delay_model, kind, rec.hops);
        result.records.push_back(std::move(rec));
        break;
      }
      case Scheme::adaptive: {
        const policy::ContextState ctx = policy::extract_context(window, kind, iot_encoder);
        const policy::ActionDist dist = policy::policy_forward(*policy_params, ctx);
        const int arm = policy::select_action(dist, policy::SelectMode::greedy, greedy_rng);
        result.records.push_back(fixed_layer_record(static_cast<Layer>(arm), window, suite,
                                                    delay_model, reward_config, kind, rule));
        break;
      }
    }
  }
  result.metrics = compute_metrics(result.records);
  return result;
}

}  // namespace hec::sim
