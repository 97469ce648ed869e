#pragma once

#include <string_view>
#include <vector>

#include "hec/nn/params.hpp"

namespace hec::nn {

enum class OptimizerKind { sgd, rmsprop };

OptimizerKind optimizer_from_string(std::string_view s);
std::string_view to_string(OptimizerKind k);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 0.01;
  double rmsprop_decay = 0.9;
  int epochs = 1;
  int batch_size = 1;

  void validate() const;
};

// Lazily sized on the first step.
struct OptimizerState {
  std::vector<Mat> accum;
};

// sgd:     w <- w - lr * g
// rmsprop: a <- rho*a + (1-rho)*g^2;  w <- w - lr * g / sqrt(a + 1e-8)
void optimize_step(NetParams& params, const GradSet& grads, const OptimizerConfig& config,
                   OptimizerState& state);

}  // namespace hec::nn
