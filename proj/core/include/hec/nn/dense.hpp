#pragma once

#include <cstdint>
#include <vector>

#include "hec/nn/params.hpp"
#include "hec/rng.hpp"
#include "hec/tensor.hpp"

namespace hec::nn {

enum class Activation { tanh, relu, linear };

Activation activation_from_string(std::string_view s);
std::string_view to_string(Activation a);

// Feed-forward network. layer_widths includes the input width, so a
// three-layer autoencoder over 96 inputs is {96, 24, 96} with one activation
// per transition.
struct DenseNetSpec {
  std::vector<int> layer_widths;
  std::vector<Activation> activations;
  double dropout_rate = 0.0;  // applied after each hidden layer, train mode only
  double l2_lambda = 0.0;

  int input_width() const { return layer_widths.front(); }
  int output_width() const { return layer_widths.back(); }
  int num_transitions() const { return static_cast<int>(layer_widths.size()) - 1; }
  std::size_t param_count() const;

  void validate() const;
};

NetParams init_dense(const DenseNetSpec& spec, std::uint64_t seed);

// One 0/1 mask per hidden layer, pre-scaled by 1/(1-p) (inverted dropout).
struct DropoutPlan {
  std::vector<Mat> masks;
};

DropoutPlan make_dense_dropout_plan(const DenseNetSpec& spec, int batch_rows, Rng& rng);

// plan == nullptr means eval mode: no dropout, no scaling.
Mat dense_forward_masked(const NetParams& params, const DenseNetSpec& spec,
                         const Mat& input, const DropoutPlan* plan);

Mat dense_forward(const NetParams& params, const DenseNetSpec& spec, const Mat& input,
                  bool train_mode, Rng& rng);

enum class Loss { mae, mse };

Loss loss_from_string(std::string_view s);
std::string_view to_string(Loss l);

struct BackwardResult {
  GradSet grads;
  double loss = 0.0;
};

// Loss is the mean over all output elements, plus lambda * sum(w^2) over
// weight matrices when l2_lambda > 0. Gradients include the L2 term.
BackwardResult dense_backward(const NetParams& params, const DenseNetSpec& spec,
                              const Mat& input, const Mat& target, Loss loss,
                              const DropoutPlan* plan = nullptr);

}  // namespace hec::nn
