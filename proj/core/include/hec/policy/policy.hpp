#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hec/data/window.hpp"
#include "hec/detectors/detector.hpp"
#include "hec/rng.hpp"
#include "hec/sim/delay.hpp"
#include "hec/tensor.hpp"
#include "hec/types.hpp"

namespace hec::policy {

// Compact per-window features the selector sees instead of raw data:
// univariate uses [min, max, mean, std] of the day; multivariate uses the
// final hidden state of the iot-tier LSTM encoder.
struct ContextState {
  Vec features;
};

ContextState extract_context(const data::Window& window, DatasetKind kind,
                             const detectors::DetectorArtifact* iot_encoder = nullptr);

// Single hidden layer (tanh) with a softmax head over the K layers.
struct PolicyParams {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
  std::uint64_t seed = 0;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_units() const { return static_cast<int>(w1.rows()); }
  int arms() const { return static_cast<int>(w2.rows()); }

  static PolicyParams init(int input_dim, std::uint64_t seed, int hidden = 100,
                           int arms = kNumLayers);
};

struct ActionDist {
  Vec probs;  // strictly positive, sums to 1
};

ActionDist policy_forward(const PolicyParams& params, const ContextState& context);

enum class SelectMode { sample, greedy };

// Greedy resolves ties toward the lowest (cheapest) layer index.
int select_action(const ActionDist& dist, SelectMode mode, Rng& rng);

// Delay cost mapped into [0, 1): alpha*t / (1 + alpha*t).
double cost(double delay_ms, double alpha);

struct RewardConfig {
  double alpha = 0.0005;
  double baseline_decay = 0.9;

  static double default_alpha(DatasetKind kind) {
    return kind == DatasetKind::univariate ? 0.0005 : 0.00035;
  }
};

// Precomputed per-arm outcomes for one window, so bandit training never
// re-runs the detectors.
struct BanditSample {
  ContextState context;
  Vec correctness;  // 1 when that layer's verdict matches the ground truth
  Vec delay_ms;
  long window_id = 0;
};

// correctness[arm] - cost(delay[arm]); always in (-1, 1].
double reward(const BanditSample& sample, int arm, const RewardConfig& config);

struct PolicyGradients {
  Mat dw1;
  Vec db1;
  Mat dw2;
  Vec db2;
};

// Gradient of -advantage * ln pi(arm | context) with respect to the
// parameters; at the output logits this is -advantage * (onehot - probs).
PolicyGradients policy_gradient(const PolicyParams& params, const ContextState& context,
                                int arm, double advantage);

struct PolicyTrainConfig {
  RewardConfig reward;
  double learning_rate = 1e-3;
  int epochs = 500;
};

struct CurvePoint {
  int epoch = 0;
  double mean_reward = 0.0;
  double baseline = 0.0;
};

struct PolicyTrainResult {
  PolicyParams params;
  std::vector<CurvePoint> curve;
};

// REINFORCE with reinforcement comparison: actions are sampled from the
// policy, the baseline is an exponentially decayed running mean of observed
// rewards, and each step follows -advantage * grad ln pi by plain SGD.
PolicyTrainResult train_policy(const std::vector<BanditSample>& samples,
                               const PolicyTrainConfig& config, PolicyParams initial,
                               std::uint64_t seed);

std::vector<BanditSample> build_bandit_samples(
    const std::vector<data::Window>& windows,
    const std::array<detectors::DetectorArtifact, kNumLayers>& suite,
    const sim::DelayModel& delay_model, DatasetKind kind,
    const detectors::ConfidenceRule& rule = {});

void save_policy(const std::filesystem::path& path, const PolicyParams& params,
                 DatasetKind kind);
std::pair<PolicyParams, DatasetKind> load_policy(const std::filesystem::path& path);

}  // namespace hec::policy
