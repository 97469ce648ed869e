#include "hec/nn/dense.hpp"

#include <cmath>
#include <string>

#include "hec/types.hpp"

namespace hec::nn {

Activation activation_from_string(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  throw ConfigError("unknown activation: " + std::string(s));
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
  }
  return "?";
}

Loss loss_from_string(std::string_view s) {
  if (s == "mae") return Loss::mae;
  if (s == "mse") return Loss::mse;
  throw ConfigError("unknown loss: " + std::string(s));
}

std::string_view to_string(Loss l) { return l == Loss::mae ? "mae" : "mse"; }

std::size_t DenseNetSpec::param_count() const {
  std::size_t n = 0;
  for (int i = 0; i + 1 < static_cast<int>(layer_widths.size()); ++i) {
    n += static_cast<std::size_t>(layer_widths[i + 1]) * layer_widths[i] + layer_widths[i + 1];
  }
  return n;
}

void DenseNetSpec::validate() const {
  if (layer_widths.size() < 2) throw ConfigError("dense net needs at least 2 layers");
  for (int w : layer_widths) {
    if (w < 1) throw ConfigError("dense layer width must be >= 1");
  }
  if (activations.size() != layer_widths.size() - 1) {
    throw ConfigError("dense net needs one activation per transition");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("dropout_rate must be in [0, 1)");
  }
  if (l2_lambda < 0.0) throw ConfigError("l2_lambda must be >= 0");
}

NetParams init_dense(const DenseNetSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  NetParams params;
  params.seed = seed;
  for (int i = 0; i < spec.num_transitions(); ++i) {
    const int fan_in = spec.layer_widths[i];
    const int fan_out = spec.layer_widths[i + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Mat w(fan_out, fan_in);
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) {
        w(r, c) = rng.uniform(-bound, bound);
      }
    }
    params.add("dense" + std::to_string(i) + ".W", std::move(w));
    params.add("dense" + std::to_string(i) + ".b", Mat::Zero(fan_out, 1));
  }
  return params;
}

DropoutPlan make_dense_dropout_plan(const DenseNetSpec& spec, int batch_rows, Rng& rng) {
  DropoutPlan plan;
  const double p = spec.dropout_rate;
  const double keep_scale = p > 0.0 ? 1.0 / (1.0 - p) : 1.0;
  for (int i = 0; i + 1 < spec.num_transitions(); ++i) {
    Mat mask(batch_rows, spec.layer_widths[i + 1]);
    for (int r = 0; r < mask.rows(); ++r) {
      for (int c = 0; c < mask.cols(); ++c) {
        mask(r, c) = (p > 0.0 && rng.uniform() < p) ? 0.0 : keep_scale;
      }
    }
    plan.masks.push_back(std::move(mask));
  }
  return plan;
}

namespace {

Mat apply_activation(const Mat& pre, Activation act) {
  switch (act) {
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::linear: return pre;
  }
  return pre;
}

Mat activation_derivative(const Mat& pre, const Mat& act_value, Activation act) {
  switch (act) {
    case Activation::tanh: return (1.0 - act_value.array().square()).matrix();
    case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::linear: return Mat::Ones(pre.rows(), pre.cols());
  }
  return Mat::Ones(pre.rows(), pre.cols());
}

void check_input_shape(const DenseNetSpec& spec, const Mat& input) {
  if (input.cols() != spec.input_width()) {
    throw ShapeError("dense layer 0 expects " + std::to_string(spec.input_width()) +
                     " input columns, got " + std::to_string(input.cols()));
  }
}

struct ForwardTrace {
  std::vector<Mat> inputs;      // h_i fed into transition i
  std::vector<Mat> pre;         // pre-activation of transition i
  std::vector<Mat> activated;   // activation output before dropout
  Mat output;
};

ForwardTrace run_forward(const NetParams& params, const DenseNetSpec& spec, const Mat& input,
                         const DropoutPlan* plan) {
  check_input_shape(spec, input);
  if (plan && static_cast<int>(plan->masks.size()) != spec.num_transitions() - 1) {
    throw ShapeError("dropout plan does not match hidden layer count");
  }
  ForwardTrace trace;
  Mat h = input;
  for (int i = 0; i < spec.num_transitions(); ++i) {
    const Mat& w = params.tensors[2 * i];
    const Mat& b = params.tensors[2 * i + 1];
    if (w.cols() != h.cols()) {
      throw ShapeError("dense layer " + std::to_string(i) + ": weight expects " +
                       std::to_string(w.cols()) + " inputs, got " + std::to_string(h.cols()));
    }
    trace.inputs.push_back(h);
    Mat pre = h * w.transpose();
    pre.rowwise() += b.col(0).transpose();
    Mat act = apply_activation(pre, spec.activations[i]);
    trace.pre.push_back(std::move(pre));
    if (i + 1 < spec.num_transitions() && plan) {
      h = act.cwiseProduct(plan->masks[i]);
    } else {
      h = act;
    }
    trace.activated.push_back(std::move(act));
  }
  trace.output = h;
  return trace;
}

}  // namespace

Mat dense_forward_masked(const NetParams& params, const DenseNetSpec& spec, const Mat& input,
                         const DropoutPlan* plan) {
  return run_forward(params, spec, input, plan).output;
}

Mat dense_forward(const NetParams& params, const DenseNetSpec& spec, const Mat& input,
                  bool train_mode, Rng& rng) {
  if (!train_mode || spec.dropout_rate == 0.0) {
    return dense_forward_masked(params, spec, input, nullptr);
  }
  DropoutPlan plan = make_dense_dropout_plan(spec, static_cast<int>(input.rows()), rng);
  return dense_forward_masked(params, spec, input, &plan);
}

BackwardResult dense_backward(const NetParams& params, const DenseNetSpec& spec,
                              const Mat& input, const Mat& target, Loss loss,
                              const DropoutPlan* plan) {
  ForwardTrace trace = run_forward(params, spec, input, plan);
  if (target.rows() != trace.output.rows() || target.cols() != trace.output.cols()) {
    throw ShapeError("target shape does not match network output");
  }

  const double n = static_cast<double>(trace.output.size());
  const Mat diff = trace.output - target;
  double data_loss = 0.0;
  Mat delta;  // dL/d(output)
  if (loss == Loss::mse) {
    data_loss = diff.squaredNorm() / n;
    delta = (2.0 / n) * diff;
  } else {
    data_loss = diff.array().abs().sum() / n;
    delta = diff.array().sign().matrix() / n;
  }
  if (!std::isfinite(data_loss)) {
    int bad_row = 0;
    for (int r = 0; r < trace.output.rows(); ++r) {
      if (!trace.output.row(r).allFinite()) {
        bad_row = r;
        break;
      }
    }
    throw NumericError("non-finite loss at batch index " + std::to_string(bad_row));
  }

  BackwardResult result;
  result.loss = data_loss + l2_penalty(params, spec.l2_lambda);
  result.grads = zeros_like(params);

  for (int i = spec.num_transitions() - 1; i >= 0; --i) {
    if (i + 1 < spec.num_transitions() && plan) {
      delta = delta.cwiseProduct(plan->masks[i]);
    }
    Mat dpre =
        delta.cwiseProduct(activation_derivative(trace.pre[i], trace.activated[i],
                                                 spec.activations[i]));
    result.grads[2 * i] = dpre.transpose() * trace.inputs[i];
    result.grads[2 * i + 1] = dpre.colwise().sum().transpose();
    if (i > 0) delta = dpre * params.tensors[2 * i];
  }
  add_l2_gradient(result.grads, params, spec.l2_lambda);
  return result;
}

}  // namespace hec::nn
