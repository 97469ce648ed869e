#include "hec/nn/optim.hpp"

#include <cmath>
#include <string>

#include "hec/types.hpp"

namespace hec::nn {

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  throw ConfigError("unknown optimizer: " + std::string(s));
}

std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "rmsprop";
}

void OptimizerConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (rmsprop_decay <= 0.0 || rmsprop_decay >= 1.0) {
    throw ConfigError("rmsprop_decay must be in (0, 1)");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

void optimize_step(NetParams& params, const GradSet& grads, const OptimizerConfig& config,
                   OptimizerState& state) {
  if (grads.size() != params.tensors.size()) throw ShapeError("gradient/parameter count mismatch");
  constexpr double kEps = 1e-8;
  if (config.kind == OptimizerKind::rmsprop && state.accum.empty()) {
    for (const auto& t : params.tensors) state.accum.push_back(Mat::Zero(t.rows(), t.cols()));
  }
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    Mat& w = params.tensors[i];
    const Mat& g = grads[i];
    if (g.rows() != w.rows() || g.cols() != w.cols()) {
      throw ShapeError("gradient shape mismatch for tensor " + params.names[i]);
    }
    switch (config.kind) {
      case OptimizerKind::sgd:
        w -= config.learning_rate * g;
        break;
      case OptimizerKind::rmsprop: {
        Mat& a = state.accum[i];
        a = config.rmsprop_decay * a +
            (1.0 - config.rmsprop_decay) * g.cwiseProduct(g);
        w -= (config.learning_rate * g.array() / (a.array() + kEps).sqrt()).matrix();
        break;
      }
    }
  }
}

}  // namespace hec::nn
