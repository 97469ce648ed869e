#include "hec/policy/policy.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "json_util.hpp"

namespace hec::policy {

ContextState extract_context(const data::Window& window, DatasetKind kind,
                             const detectors::DetectorArtifact* iot_encoder) {
  ContextState ctx;
  if (kind == DatasetKind::univariate) {
    const auto& v = window.values;
    if (v.size() == 0) throw DataError("empty window");
    ctx.features = Vec(4);
    ctx.features(0) = v.minCoeff();
    ctx.features(1) = v.maxCoeff();
    const double mean = v.mean();
    ctx.features(2) = mean;
    const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size());
    ctx.features(3) = std::sqrt(var);
  } else {
    if (!iot_encoder) {
      throw ArtifactError("multivariate context extraction needs the iot encoder artifact");
    }
    const auto* lstm = std::get_if<nn::LstmSpec>(&iot_encoder->spec.net);
    if (!lstm) throw ConfigError("iot encoder artifact is not a sequence model");
    ctx.features = nn::lstm_encode(iot_encoder->params, *lstm, window.values).hidden;
  }
  if (!all_finite(ctx.features)) throw NumericError("non-finite context features");
  return ctx;
}

PolicyParams PolicyParams::init(int input_dim, std::uint64_t seed, int hidden, int arms) {
  if (input_dim < 1 || hidden < 1 || arms < 2) throw ConfigError("bad policy dimensions");
  Rng rng(seed);
  PolicyParams p;
  p.seed = seed;
  const double bound1 = std::sqrt(6.0 / (input_dim + hidden));
  const double bound2 = std::sqrt(6.0 / (hidden + arms));
  p.w1 = Mat(hidden, input_dim);
  for (int r = 0; r < hidden; ++r) {
    for (int c = 0; c < input_dim; ++c) p.w1(r, c) = rng.uniform(-bound1, bound1);
  }
  p.b1 = Vec::Zero(hidden);
  p.w2 = Mat(arms, hidden);
  for (int r = 0; r < arms; ++r) {
    for (int c = 0; c < hidden; ++c) p.w2(r, c) = rng.uniform(-bound2, bound2);
  }
  p.b2 = Vec::Zero(arms);
  return p;
}

namespace {

Vec hidden_activation(const PolicyParams& p, const ContextState& ctx) {
  if (ctx.features.size() != p.w1.cols()) {
    throw ShapeError("context has " + std::to_string(ctx.features.size()) +
                     " features, policy expects " + std::to_string(p.w1.cols()));
  }
  return (p.w1 * ctx.features + p.b1).array().tanh().matrix();
}

Vec softmax(const Vec& logits) {
  const double shift = logits.maxCoeff();
  Vec e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

}  // namespace

ActionDist policy_forward(const PolicyParams& params, const ContextState& context) {
  const Vec hidden = hidden_activation(params, context);
  ActionDist dist;
  dist.probs = softmax(params.w2 * hidden + params.b2);
  return dist;
}

int select_action(const ActionDist& dist, SelectMode mode, Rng& rng) {
  const int k = static_cast<int>(dist.probs.size());
  if (mode == SelectMode::greedy) {
    int best = 0;
    for (int i = 1; i < k; ++i) {
      if (dist.probs(i) > dist.probs(best)) best = i;
    }
    return best;
  }
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += dist.probs(i);
    if (u < acc) return i;
  }
  return k - 1;
}

double cost(double delay_ms, double alpha) {
  if (delay_ms < 0.0) throw ConfigError("delay must be >= 0");
  if (alpha <= 0.0) throw ConfigError("alpha must be > 0");
  const double scaled = alpha * delay_ms;
  return scaled / (1.0 + scaled);
}

double reward(const BanditSample& sample, int arm, const RewardConfig& config) {
  if (arm < 0 || arm >= sample.correctness.size()) throw ConfigError("arm out of range");
  return sample.correctness(arm) - cost(sample.delay_ms(arm), config.alpha);
}

PolicyGradients policy_gradient(const PolicyParams& params, const ContextState& context,
                                int arm, double advantage) {
  if (arm < 0 || arm >= params.arms()) throw ConfigError("arm out of range");
  const Vec hidden = hidden_activation(params, context);
  const Vec probs = softmax(params.w2 * hidden + params.b2);

  Vec dlogits = advantage * probs;
  dlogits(arm) -= advantage;  // -advantage * (onehot - probs)

  PolicyGradients g;
  g.dw2 = dlogits * hidden.transpose();
  g.db2 = dlogits;
  const Vec dhidden =
      (params.w2.transpose() * dlogits).cwiseProduct((1.0 - hidden.array().square()).matrix());
  g.dw1 = dhidden * context.features.transpose();
  g.db1 = dhidden;
  return g;
}

PolicyTrainResult train_policy(const std::vector<BanditSample>& samples,
                               const PolicyTrainConfig& config, PolicyParams initial,
                               std::uint64_t seed) {
  if (samples.empty()) throw DataError("no bandit samples to train on");
  if (config.learning_rate <= 0.0 || config.epochs < 1) {
    throw ConfigError("bad policy training config");
  }

  PolicyTrainResult result;
  result.params = std::move(initial);
  PolicyParams& p = result.params;
  Rng rng(seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  double baseline = 0.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double reward_sum = 0.0;
    for (int idx : order) {
      const BanditSample& sample = samples[idx];
      const ActionDist dist = policy_forward(p, sample.context);
      const int arm = select_action(dist, SelectMode::sample, rng);
      const double r = reward(sample, arm, config.reward);
      const double advantage = r - baseline;
      const PolicyGradients g = policy_gradient(p, sample.context, arm, advantage);
      p.w1 -= config.learning_rate * g.dw1;
      p.b1 -= config.learning_rate * g.db1;
      p.w2 -= config.learning_rate * g.dw2;
      p.b2 -= config.learning_rate * g.db2;
      baseline = config.reward.baseline_decay * baseline +
                 (1.0 - config.reward.baseline_decay) * r;
      reward_sum += r;
    }
    if (!all_finite(p.w1) || !all_finite(p.w2)) {
      throw NumericError("policy training diverged at epoch " + std::to_string(epoch));
    }
    result.curve.push_back(
        {epoch, reward_sum / static_cast<double>(samples.size()), baseline});
  }
  return result;
}

std::vector<BanditSample> build_bandit_samples(
    const std::vector<data::Window>& windows,
    const std::array<detectors::DetectorArtifact, kNumLayers>& suite,
    const sim::DelayModel& delay_model, DatasetKind kind,
    const detectors::ConfidenceRule& rule) {
  delay_model.validate();
  const detectors::DetectorArtifact* iot_encoder =
      kind == DatasetKind::multivariate ? &suite[0] : nullptr;
  std::vector<BanditSample> samples;
  samples.reserve(windows.size());
  for (const auto& window : windows) {
    BanditSample s;
    s.window_id = window.id;
    s.context = extract_context(window, kind, iot_encoder);
    s.correctness = Vec(kNumLayers);
    s.delay_ms = Vec(kNumLayers);
    for (int k = 0; k < kNumLayers; ++k) {
      const auto layer = static_cast<Layer>(k);
      const detectors::Detection det =
          detectors::detect(suite[k].params, suite[k].spec, suite[k].error_model, window, rule);
      s.correctness(k) = det.is_anomaly == window.is_anomalous() ? 1.0 : 0.0;
      s.delay_ms(k) = sim::e2e_delay(delay_model, layer, kind);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void save_policy(const std::filesystem::path& path, const PolicyParams& params,
                 DatasetKind kind) {
  iojson::json j;
  j["format"] = "hecb-1";
  j["kind"] = "policy_checkpoint";
  j["dataset_kind"] = std::string(to_string(kind));
  j["seed"] = params.seed;
  j["tensors"] = iojson::json{{"w1", iojson::mat_to_json(params.w1)},
                              {"b1", iojson::vec_to_json(params.b1)},
                              {"w2", iojson::mat_to_json(params.w2)},
                              {"b2", iojson::vec_to_json(params.b2)}};
  iojson::write_json_file(path, j);
}

std::pair<PolicyParams, DatasetKind> load_policy(const std::filesystem::path& path) {
  const iojson::json j = iojson::read_json_file(path);
  if (iojson::require(j, "kind").get<std::string>() != "policy_checkpoint") {
    throw DataError(path.string() + " is not a policy checkpoint");
  }
  PolicyParams p;
  p.seed = iojson::require(j, "seed").get<std::uint64_t>();
  const auto& t = iojson::require(j, "tensors");
  p.w1 = iojson::mat_from_json(iojson::require(t, "w1"));
  p.b1 = iojson::vec_from_json(iojson::require(t, "b1"));
  p.w2 = iojson::mat_from_json(iojson::require(t, "w2"));
  p.b2 = iojson::vec_from_json(iojson::require(t, "b2"));
  const DatasetKind kind =
      dataset_kind_from_string(iojson::require(j, "dataset_kind").get<std::string>());
  return {std::move(p), kind};
}

}  // namespace hec::policy
