#include "hec/nn/lstm.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hec/types.hpp"

namespace hec::nn {

namespace {

inline Vec sigmoid(const Vec& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); }

// Row blocks within the stacked 4H gate matrices: input, forget, candidate, output.
struct GateSeg {
  int h;
  auto i(const Vec& z) const { return z.segment(0, h); }
  auto f(const Vec& z) const { return z.segment(h, h); }
  auto g(const Vec& z) const { return z.segment(2 * h, h); }
  auto o(const Vec& z) const { return z.segment(3 * h, h); }
};

struct StepTrace {
  Vec x;       // input fed into this step
  Vec i, f, g, o;
  Vec c, tanh_c, h;
};

StepTrace cell_forward(const Mat& wx, const Mat& wh, const Mat& b, const Vec& x,
                       const Vec& h_prev, const Vec& c_prev) {
  const int h_dim = static_cast<int>(wh.cols());
  Vec z = wx * x + wh * h_prev + b.col(0);
  GateSeg seg{h_dim};
  StepTrace t;
  t.x = x;
  t.i = sigmoid(seg.i(z));
  t.f = sigmoid(seg.f(z));
  t.g = seg.g(z).array().tanh().matrix();
  t.o = sigmoid(seg.o(z));
  t.c = t.f.cwiseProduct(c_prev) + t.i.cwiseProduct(t.g);
  t.tanh_c = t.c.array().tanh().matrix();
  t.h = t.o.cwiseProduct(t.tanh_c);
  return t;
}

// Backward through one cell step. dh is the total gradient flowing into h_t,
// dc_in the carry flowing into c_t from step t+1. Returns the stacked gate
// pre-activation gradient plus the carries for step t-1.
struct StepGrad {
  Vec dz;
  Vec dh_prev;
  Vec dc_prev;
};

StepGrad cell_backward(const StepTrace& t, const Vec& c_prev, const Vec& dh, const Vec& dc_in,
                       const Mat& wh) {
  const int h_dim = static_cast<int>(t.h.size());
  Vec dc = dc_in + dh.cwiseProduct(t.o).cwiseProduct(
                       (1.0 - t.tanh_c.array().square()).matrix());
  Vec dz(4 * h_dim);
  GateSeg seg{h_dim};
  // d(pre-activation) for each gate
  dz.segment(0, h_dim) =
      dc.cwiseProduct(t.g).cwiseProduct(t.i).cwiseProduct((1.0 - t.i.array()).matrix());
  dz.segment(h_dim, h_dim) =
      dc.cwiseProduct(c_prev).cwiseProduct(t.f).cwiseProduct((1.0 - t.f.array()).matrix());
  dz.segment(2 * h_dim, h_dim) =
      dc.cwiseProduct(t.i).cwiseProduct((1.0 - t.g.array().square()).matrix());
  dz.segment(3 * h_dim, h_dim) =
      dh.cwiseProduct(t.tanh_c).cwiseProduct(t.o).cwiseProduct((1.0 - t.o.array()).matrix());
  StepGrad g;
  g.dz = dz;
  g.dh_prev = wh.transpose() * dz;
  g.dc_prev = dc.cwiseProduct(t.f);
  return g;
}

struct DirectionTrace {
  std::vector<StepTrace> steps;
};

DirectionTrace run_direction(const Mat& wx, const Mat& wh, const Mat& b, const Mat& sequence,
                             bool reversed) {
  const int steps = static_cast<int>(sequence.rows());
  const int h_dim = static_cast<int>(wh.cols());
  DirectionTrace trace;
  trace.steps.reserve(steps);
  Vec h = Vec::Zero(h_dim);
  Vec c = Vec::Zero(h_dim);
  for (int s = 0; s < steps; ++s) {
    const int row = reversed ? steps - 1 - s : s;
    StepTrace st = cell_forward(wx, wh, b, sequence.row(row).transpose(), h, c);
    h = st.h;
    c = st.c;
    trace.steps.push_back(std::move(st));
  }
  return trace;
}

struct ParamIdx {
  int enc_wx, enc_wh, enc_b;
  int encr_wx = -1, encr_wh = -1, encr_b = -1;
  int dec_wx, dec_wh, dec_b;
  int proj_w, proj_b;
};

int index_of(const NetParams& p, std::string_view name) {
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    if (p.names[i] == name) return static_cast<int>(i);
  }
  throw ShapeError("seq2seq parameters missing tensor '" + std::string(name) + "'");
}

ParamIdx resolve(const NetParams& p, const LstmSpec& spec) {
  ParamIdx idx{};
  idx.enc_wx = index_of(p, "enc.Wx");
  idx.enc_wh = index_of(p, "enc.Wh");
  idx.enc_b = index_of(p, "enc.b");
  if (spec.bidirectional) {
    idx.encr_wx = index_of(p, "enc_r.Wx");
    idx.encr_wh = index_of(p, "enc_r.Wh");
    idx.encr_b = index_of(p, "enc_r.b");
  }
  idx.dec_wx = index_of(p, "dec.Wx");
  idx.dec_wh = index_of(p, "dec.Wh");
  idx.dec_b = index_of(p, "dec.b");
  idx.proj_w = index_of(p, "proj.W");
  idx.proj_b = index_of(p, "proj.b");
  return idx;
}

void check_sequence(const LstmSpec& spec, const Mat& sequence) {
  if (sequence.rows() == 0) throw DataError("empty sequence");
  if (sequence.cols() != spec.input_dim) {
    throw ShapeError("sequence has " + std::to_string(sequence.cols()) +
                     " columns, spec expects " + std::to_string(spec.input_dim));
  }
}

Mat glorot(int rows, int cols, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

Mat gate_bias(int h_dim) {
  Mat b = Mat::Zero(4 * h_dim, 1);
  b.block(h_dim, 0, h_dim, 1).setConstant(1.0);  // forget gate opens at init
  return b;
}

}  // namespace

std::size_t LstmSpec::param_count() const {
  const std::size_t d = input_dim, h = hidden_units, hd = state_dim();
  std::size_t enc = 4 * h * (d + h) + 4 * h;
  if (bidirectional) enc *= 2;
  const std::size_t dec = 4 * hd * (d + hd) + 4 * hd;
  const std::size_t proj = d * hd + d;
  return enc + dec + proj;
}

void LstmSpec::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("dropout_rate must be in [0, 1)");
  if (l2_lambda < 0.0) throw ConfigError("l2_lambda must be >= 0");
}

NetParams init_seq2seq(const LstmSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  NetParams params;
  params.seed = seed;
  const int d = spec.input_dim;
  const int h = spec.hidden_units;
  const int hd = spec.state_dim();

  auto add_cell = [&](const std::string& prefix, int in_dim, int h_dim) {
    // Per-gate fan for the stacked matrices; recurrent blocks use the same rule.
    Mat wx(4 * h_dim, in_dim);
    Mat wh(4 * h_dim, h_dim);
    for (int gate = 0; gate < 4; ++gate) {
      wx.block(gate * h_dim, 0, h_dim, in_dim) = glorot(h_dim, in_dim, in_dim, h_dim, rng);
      wh.block(gate * h_dim, 0, h_dim, h_dim) = glorot(h_dim, h_dim, h_dim, h_dim, rng);
    }
    params.add(prefix + ".Wx", std::move(wx));
    params.add(prefix + ".Wh", std::move(wh));
    params.add(prefix + ".b", gate_bias(h_dim));
  };

  add_cell("enc", d, h);
  if (spec.bidirectional) add_cell("enc_r", d, h);
  add_cell("dec", d, hd);
  params.add("proj.W", glorot(d, hd, hd, d, rng));
  params.add("proj.b", Mat::Zero(d, 1));
  return params;
}

EncodedState lstm_encode(const NetParams& params, const LstmSpec& spec, const Mat& sequence) {
  check_sequence(spec, sequence);
  const ParamIdx idx = resolve(params, spec);
  const int h = spec.hidden_units;
  EncodedState out;
  out.hidden = Vec::Zero(spec.state_dim());
  out.cell = Vec::Zero(spec.state_dim());

  const DirectionTrace fwd = run_direction(params.tensors[idx.enc_wx], params.tensors[idx.enc_wh],
                                           params.tensors[idx.enc_b], sequence, false);
  out.hidden.segment(0, h) = fwd.steps.back().h;
  out.cell.segment(0, h) = fwd.steps.back().c;
  if (spec.bidirectional) {
    const DirectionTrace bwd =
        run_direction(params.tensors[idx.encr_wx], params.tensors[idx.encr_wh],
                      params.tensors[idx.encr_b], sequence, true);
    out.hidden.segment(h, h) = bwd.steps.back().h;
    out.cell.segment(h, h) = bwd.steps.back().c;
  }
  return out;
}

LstmDropoutPlan make_lstm_dropout_plan(const LstmSpec& spec, int steps, Rng& rng) {
  LstmDropoutPlan plan;
  const double p = spec.dropout_rate;
  const double keep_scale = p > 0.0 ? 1.0 / (1.0 - p) : 1.0;
  plan.step_masks = Mat(steps, spec.state_dim());
  for (int r = 0; r < steps; ++r) {
    for (int c = 0; c < plan.step_masks.cols(); ++c) {
      plan.step_masks(r, c) = (p > 0.0 && rng.uniform() < p) ? 0.0 : keep_scale;
    }
  }
  return plan;
}

namespace {

struct DecoderTrace {
  std::vector<StepTrace> steps;
  Mat dropped_h;  // steps x state_dim, post-dropout hidden fed to projection
  Mat outputs;    // steps x input_dim
};

DecoderTrace run_decoder(const NetParams& params, const LstmSpec& spec, const ParamIdx& idx,
                         const EncodedState& state, int steps, const LstmDropoutPlan* plan) {
  if (steps < 1) throw DataError("decoder needs steps >= 1");
  if (state.hidden.size() != spec.state_dim() || state.cell.size() != spec.state_dim()) {
    throw ShapeError("encoded state size does not match decoder width");
  }
  const Mat& wp = params.tensors[idx.proj_w];
  if (wp.rows() != spec.input_dim || wp.cols() != spec.state_dim()) {
    throw ShapeError("projection shape does not match decoder/input dims");
  }
  if (plan && (plan->step_masks.rows() < steps || plan->step_masks.cols() != spec.state_dim())) {
    throw ShapeError("lstm dropout plan does not cover the decode steps");
  }
  DecoderTrace trace;
  trace.steps.reserve(steps);
  trace.dropped_h = Mat(steps, spec.state_dim());
  trace.outputs = Mat(steps, spec.input_dim);
  Vec h = state.hidden;
  Vec c = state.cell;
  Vec y = Vec::Zero(spec.input_dim);  // start-of-sequence token
  for (int t = 0; t < steps; ++t) {
    StepTrace st = cell_forward(params.tensors[idx.dec_wx], params.tensors[idx.dec_wh],
                                params.tensors[idx.dec_b], y, h, c);
    h = st.h;
    c = st.c;
    Vec dropped = plan ? st.h.cwiseProduct(plan->step_masks.row(t).transpose()) : st.h;
    y = wp * dropped + params.tensors[idx.proj_b].col(0);
    if (!y.allFinite()) throw NumericError("non-finite decoder output at step " + std::to_string(t));
    trace.dropped_h.row(t) = dropped.transpose();
    trace.outputs.row(t) = y.transpose();
    trace.steps.push_back(std::move(st));
  }
  return trace;
}

}  // namespace

Mat lstm_decode(const NetParams& params, const LstmSpec& spec, const EncodedState& state,
                int steps, const LstmDropoutPlan* plan) {
  const ParamIdx idx = resolve(params, spec);
  return run_decoder(params, spec, idx, state, steps, plan).outputs;
}

Mat seq2seq_reconstruct(const NetParams& params, const LstmSpec& spec, const Mat& sequence) {
  const EncodedState state = lstm_encode(params, spec, sequence);
  return lstm_decode(params, spec, state, static_cast<int>(sequence.rows()), nullptr);
}

BackwardResult seq2seq_backward(const NetParams& params, const LstmSpec& spec,
                                const Mat& sequence, const LstmDropoutPlan* plan) {
  check_sequence(spec, sequence);
  const ParamIdx idx = resolve(params, spec);
  const int steps = static_cast<int>(sequence.rows());
  const int h = spec.hidden_units;
  const int hd = spec.state_dim();

  // Forward with full traces.
  const DirectionTrace enc_fwd =
      run_direction(params.tensors[idx.enc_wx], params.tensors[idx.enc_wh],
                    params.tensors[idx.enc_b], sequence, false);
  DirectionTrace enc_bwd;
  if (spec.bidirectional) {
    enc_bwd = run_direction(params.tensors[idx.encr_wx], params.tensors[idx.encr_wh],
                            params.tensors[idx.encr_b], sequence, true);
  }
  EncodedState state;
  state.hidden = Vec::Zero(hd);
  state.cell = Vec::Zero(hd);
  state.hidden.segment(0, h) = enc_fwd.steps.back().h;
  state.cell.segment(0, h) = enc_fwd.steps.back().c;
  if (spec.bidirectional) {
    state.hidden.segment(h, h) = enc_bwd.steps.back().h;
    state.cell.segment(h, h) = enc_bwd.steps.back().c;
  }
  const DecoderTrace dec = run_decoder(params, spec, idx, state, steps, plan);

  const double n = static_cast<double>(steps) * spec.input_dim;
  const Mat diff = dec.outputs - sequence;
  const double data_loss = diff.squaredNorm() / n;
  if (!std::isfinite(data_loss)) throw NumericError("non-finite seq2seq loss");

  BackwardResult result;
  result.loss = data_loss + l2_penalty(params, spec.l2_lambda);
  result.grads = zeros_like(params);

  const Mat& dec_wx = params.tensors[idx.dec_wx];
  const Mat& dec_wh = params.tensors[idx.dec_wh];
  const Mat& wp = params.tensors[idx.proj_w];

  // Decoder BPTT. y_t feeds both the loss and step t+1's input.
  Vec dh_next = Vec::Zero(hd);
  Vec dc_next = Vec::Zero(hd);
  Vec dy_from_next = Vec::Zero(spec.input_dim);
  for (int t = steps - 1; t >= 0; --t) {
    const Vec dy_total =
        (2.0 / n) * diff.row(t).transpose() + dy_from_next;
    const Vec dropped = dec.dropped_h.row(t).transpose();
    result.grads[idx.proj_w] += dy_total * dropped.transpose();
    result.grads[idx.proj_b] += dy_total;
    Vec dh_dropped = wp.transpose() * dy_total;
    if (plan) dh_dropped = dh_dropped.cwiseProduct(plan->step_masks.row(t).transpose());
    const Vec dh = dh_dropped + dh_next;
    const Vec c_prev = t > 0 ? dec.steps[t - 1].c : state.cell;
    const Vec h_prev = t > 0 ? dec.steps[t - 1].h : state.hidden;
    StepGrad sg = cell_backward(dec.steps[t], c_prev, dh, dc_next, dec_wh);
    result.grads[idx.dec_wx] += sg.dz * dec.steps[t].x.transpose();
    result.grads[idx.dec_wh] += sg.dz * h_prev.transpose();
    result.grads[idx.dec_b] += sg.dz;
    dy_from_next = dec_wx.transpose() * sg.dz;
    dh_next = sg.dh_prev;
    dc_next = sg.dc_prev;
  }
  // After the loop these are the gradients w.r.t. the encoder's final states.
  const Vec dh0 = dh_next;
  const Vec dc0 = dc_next;

  // Encoder BPTT per direction; only the final states carry gradient in.
  auto run_encoder_backward = [&](const DirectionTrace& trace, int wx_i, int wh_i, int b_i,
                                  const Vec& dh_final, const Vec& dc_final, bool reversed) {
    const Mat& wh_m = params.tensors[wh_i];
    Vec dh_carry = dh_final;
    Vec dc_carry = dc_final;
    for (int s = steps - 1; s >= 0; --s) {
      const Vec c_prev = s > 0 ? trace.steps[s - 1].c : Vec::Zero(h);
      const Vec h_prev = s > 0 ? trace.steps[s - 1].h : Vec::Zero(h);
      StepGrad sg = cell_backward(trace.steps[s], c_prev, dh_carry, dc_carry, wh_m);
      result.grads[wx_i] += sg.dz * trace.steps[s].x.transpose();
      result.grads[wh_i] += sg.dz * h_prev.transpose();
      result.grads[b_i] += sg.dz;
      dh_carry = sg.dh_prev;
      dc_carry = sg.dc_prev;
    }
    (void)reversed;  // input rows were already stored in processing order
  };

  run_encoder_backward(enc_fwd, idx.enc_wx, idx.enc_wh, idx.enc_b, dh0.segment(0, h),
                       dc0.segment(0, h), false);
  if (spec.bidirectional) {
    run_encoder_backward(enc_bwd, idx.encr_wx, idx.encr_wh, idx.encr_b, dh0.segment(h, h),
                         dc0.segment(h, h), true);
  }

  add_l2_gradient(result.grads, params, spec.l2_lambda);
  return result;
}

}  // namespace hec::nn
