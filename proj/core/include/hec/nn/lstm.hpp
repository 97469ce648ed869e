#pragma once

#include <cstdint>

#include "hec/nn/dense.hpp"
#include "hec/nn/params.hpp"
#include "hec/rng.hpp"
#include "hec/tensor.hpp"

namespace hec::nn {

// Sequence-to-sequence reconstruction model: an LSTM encoder (optionally
// bidirectional), an LSTM decoder that feeds each emitted output back in as
// the next input (zero vector on the first step), and a linear projection
// from decoder state to the input dimension.
struct LstmSpec {
  int input_dim = 1;
  int hidden_units = 16;
  bool bidirectional = false;
  double dropout_rate = 0.0;  // on decoder outputs before the projection
  double l2_lambda = 0.0;

  // Decoder state width; the encoder's final states are its initial states.
  int state_dim() const { return bidirectional ? 2 * hidden_units : hidden_units; }
  std::size_t param_count() const;

  void validate() const;
};

struct EncodedState {
  Vec hidden;  // forward and backward halves concatenated if bidirectional
  Vec cell;
};

// Tensor names: enc.Wx enc.Wh enc.b [enc_r.*] dec.Wx dec.Wh dec.b proj.W proj.b
// Gate blocks within the 4H rows are ordered input, forget, candidate, output.
NetParams init_seq2seq(const LstmSpec& spec, std::uint64_t seed);

EncodedState lstm_encode(const NetParams& params, const LstmSpec& spec, const Mat& sequence);

// One pre-scaled mask row per decode step (inverted dropout on the decoder
// hidden state ahead of the projection).
struct LstmDropoutPlan {
  Mat step_masks;  // steps x state_dim
};

LstmDropoutPlan make_lstm_dropout_plan(const LstmSpec& spec, int steps, Rng& rng);

Mat lstm_decode(const NetParams& params, const LstmSpec& spec, const EncodedState& state,
                int steps, const LstmDropoutPlan* plan = nullptr);

Mat seq2seq_reconstruct(const NetParams& params, const LstmSpec& spec, const Mat& sequence);

// Full backpropagation through time: through the decoder (including the
// output-feedback path), the projection, and back into the encoder. MSE loss,
// mean over all sequence elements, plus the L2 weight penalty.
BackwardResult seq2seq_backward(const NetParams& params, const LstmSpec& spec,
                                const Mat& sequence, const LstmDropoutPlan* plan = nullptr);

}  // namespace hec::nn
