#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hec/nn/dense.hpp"
#include "hec/nn/lstm.hpp"
#include "hec/nn/optim.hpp"
#include "hec/types.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace hec;
using namespace hec::nn;
namespace ts = hec::testsupport;

namespace {

DenseNetSpec small_dense_spec() {
  DenseNetSpec spec;
  spec.layer_widths = {3, 5, 4, 3};
  spec.activations = {Activation::tanh, Activation::relu, Activation::linear};
  return spec;
}

Mat random_mat(int rows, int cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.gaussian();
  }
  return m;
}

}  // namespace

TEST_CASE("dense forward: identity single layer") {
  DenseNetSpec spec;
  spec.layer_widths = {2, 2};
  spec.activations = {Activation::linear};
  NetParams params = init_dense(spec, 1);
  params.at("dense0.W") = Mat::Identity(2, 2);
  Mat input(1, 2);
  input << 1.0, 2.0;
  Rng rng(0);
  Mat out = dense_forward(params, spec, input, false, rng);
  CHECK(out(0, 0) == doctest::Approx(1.0));
  CHECK(out(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("dense forward: zero weights leave only biases") {
  DenseNetSpec spec;
  spec.layer_widths = {4, 3};
  spec.activations = {Activation::linear};
  NetParams params = init_dense(spec, 2);
  params.at("dense0.W").setZero();
  params.at("dense0.b") << 0.5, -1.0, 2.0;
  Mat input(2, 4);
  input.setRandom();
  Rng rng(0);
  Mat out = dense_forward(params, spec, input, false, rng);
  for (int r = 0; r < 2; ++r) {
    CHECK(out(r, 0) == doctest::Approx(0.5));
    CHECK(out(r, 1) == doctest::Approx(-1.0));
    CHECK(out(r, 2) == doctest::Approx(2.0));
  }
}

TEST_CASE("dense forward matches hand-rolled oracle") {
  DenseNetSpec spec = small_dense_spec();
  NetParams params = init_dense(spec, 42);
  Mat input(1, 3);
  input << 0.3, -1.2, 0.7;

  // Walk the net with the loop-based oracle.
  std::vector<double> x = {0.3, -1.2, 0.7};
  const char* acts[] = {"tanh", "relu", "linear"};
  for (int layer = 0; layer < 3; ++layer) {
    const Mat& w = params.at("dense" + std::to_string(layer) + ".W");
    const Mat& b = params.at("dense" + std::to_string(layer) + ".b");
    ts::Grid wg(w.rows(), std::vector<double>(w.cols()));
    std::vector<double> bg(w.rows());
    for (int r = 0; r < w.rows(); ++r) {
      bg[r] = b(r, 0);
      for (int c = 0; c < w.cols(); ++c) wg[r][c] = w(r, c);
    }
    x = ts::dense_transition_oracle(x, wg, bg, acts[layer]);
  }

  Rng rng(0);
  Mat out = dense_forward(params, spec, input, false, rng);
  REQUIRE(out.cols() == 3);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(out(0, c) - x[c]) < 1e-12);
  }
}

TEST_CASE("dense forward: eval mode ignores rng, train mode is seeded") {
  DenseNetSpec spec = small_dense_spec();
  spec.dropout_rate = 0.4;
  NetParams params = init_dense(spec, 7);
  Mat input = random_mat(3, 3, *std::make_unique<Rng>(5));

  Rng r1(111), r2(222);
  Mat eval1 = dense_forward(params, spec, input, false, r1);
  Mat eval2 = dense_forward(params, spec, input, false, r2);
  CHECK(eval1 == eval2);  // bit-for-bit

  Rng t1(9), t2(9), t3(10);
  Mat train1 = dense_forward(params, spec, input, true, t1);
  Mat train2 = dense_forward(params, spec, input, true, t2);
  Mat train3 = dense_forward(params, spec, input, true, t3);
  CHECK(train1 == train2);
  CHECK(train1 != train3);
}

TEST_CASE("dense forward: shape mismatch names the layer") {
  DenseNetSpec spec = small_dense_spec();
  NetParams params = init_dense(spec, 3);
  Mat input(1, 4);
  input.setZero();
  Rng rng(0);
  CHECK_THROWS_WITH_AS(dense_forward(params, spec, input, false, rng),
                       doctest::Contains("layer 0"), ShapeError);
}

TEST_CASE("dense backward: single linear neuron hand derivative") {
  DenseNetSpec spec;
  spec.layer_widths = {1, 1};
  spec.activations = {Activation::linear};
  NetParams params = init_dense(spec, 0);
  params.at("dense0.W")(0, 0) = 1.0;
  Mat input(1, 1), target(1, 1);
  input << 1.0;
  target << 0.0;
  auto res = dense_backward(params, spec, input, target, Loss::mse);
  CHECK(res.loss == doctest::Approx(1.0));
  CHECK(res.grads[0](0, 0) == doctest::Approx(2.0));
  CHECK(res.grads[1](0, 0) == doctest::Approx(2.0));
}

TEST_CASE("dense backward: perfect reconstruction gives zero loss and gradients") {
  DenseNetSpec spec = small_dense_spec();
  NetParams params = init_dense(spec, 11);
  Mat input = random_mat(2, 3, *std::make_unique<Rng>(4));
  Rng rng(0);
  Mat target = dense_forward(params, spec, input, false, rng);
  auto res = dense_backward(params, spec, input, target, Loss::mse);
  CHECK(res.loss == doctest::Approx(0.0));
  for (const auto& g : res.grads) {
    CHECK(g.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("dense backward matches finite differences") {
  DenseNetSpec spec = small_dense_spec();
  spec.l2_lambda = 1e-3;
  NetParams params = init_dense(spec, 13);
  Rng data_rng(21);
  Mat input = random_mat(4, 3, data_rng);
  Mat target = random_mat(4, 3, data_rng);

  for (Loss loss : {Loss::mse, Loss::mae}) {
    auto res = dense_backward(params, spec, input, target, loss);
    double err = ts::max_gradient_error(
        params, res.grads,
        [&](const NetParams& p) { return dense_backward(p, spec, input, target, loss).loss; });
    CAPTURE(static_cast<int>(loss));
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("dense backward matches finite differences under a fixed dropout plan") {
  DenseNetSpec spec = small_dense_spec();
  spec.dropout_rate = 0.5;
  NetParams params = init_dense(spec, 17);
  Rng data_rng(22);
  Mat input = random_mat(3, 3, data_rng);
  Mat target = random_mat(3, 3, data_rng);
  Rng mask_rng(33);
  DropoutPlan plan = make_dense_dropout_plan(spec, 3, mask_rng);

  auto res = dense_backward(params, spec, input, target, Loss::mse, &plan);
  double err = ts::max_gradient_error(params, res.grads, [&](const NetParams& p) {
    return dense_backward(p, spec, input, target, Loss::mse, &plan).loss;
  });
  CHECK(err <= 1e-4);
}

TEST_CASE("L2 penalty shifts the loss by exactly lambda * sum(w^2)") {
  DenseNetSpec spec = small_dense_spec();
  NetParams params = init_dense(spec, 19);
  Rng data_rng(23);
  Mat input = random_mat(2, 3, data_rng);
  Mat target = random_mat(2, 3, data_rng);

  spec.l2_lambda = 0.0;
  const double base = dense_backward(params, spec, input, target, Loss::mse).loss;
  spec.l2_lambda = 0.37;
  const double reg = dense_backward(params, spec, input, target, Loss::mse).loss;

  double ssq = 0.0;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (!is_bias_name(params.names[i])) ssq += params.tensors[i].squaredNorm();
  }
  CHECK(reg - base == doctest::Approx(0.37 * ssq).epsilon(1e-12));
}

TEST_CASE("optimizer: sgd step") {
  NetParams params;
  params.add("w.W", Mat::Constant(1, 1, 1.0));
  GradSet grads = {Mat::Constant(1, 1, 2.0)};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd;
  cfg.learning_rate = 0.1;
  OptimizerState state;
  optimize_step(params, grads, cfg, state);
  CHECK(params.tensors[0](0, 0) == doctest::Approx(0.8));
}

TEST_CASE("optimizer: rmsprop first step follows the update rule") {
  NetParams params;
  params.add("w.W", Mat::Constant(1, 1, 1.0));
  GradSet grads = {Mat::Constant(1, 1, 3.0)};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::rmsprop;
  cfg.learning_rate = 0.01;
  cfg.rmsprop_decay = 0.9;
  OptimizerState state;
  optimize_step(params, grads, cfg, state);
  CHECK(state.accum[0](0, 0) == doctest::Approx(0.9));
  const double expected = 1.0 - 0.01 * 3.0 / std::sqrt(0.9 + 1e-8);
  CHECK(params.tensors[0](0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("optimizer: zero gradient leaves parameters unchanged") {
  NetParams params;
  params.add("w.W", Mat::Constant(2, 2, 0.5));
  GradSet grads = {Mat::Zero(2, 2)};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd;
  cfg.learning_rate = 0.3;
  OptimizerState state;
  optimize_step(params, grads, cfg, state);
  CHECK(params.tensors[0] == Mat::Constant(2, 2, 0.5));
}

namespace {

LstmSpec tiny_lstm_spec(bool bidirectional = false) {
  LstmSpec spec;
  spec.input_dim = 2;
  spec.hidden_units = 3;
  spec.bidirectional = bidirectional;
  return spec;
}

void zero_params(NetParams& params) {
  for (auto& t : params.tensors) t.setZero();
}

}  // namespace

TEST_CASE("lstm encode: all-zero parameters give zero states") {
  LstmSpec spec = tiny_lstm_spec();
  NetParams params = init_seq2seq(spec, 1);
  zero_params(params);
  Mat seq = random_mat(5, 2, *std::make_unique<Rng>(3));
  EncodedState st = lstm_encode(params, spec, seq);
  CHECK(st.hidden.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(st.cell.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("lstm encode: length-1 sequence equals the single-step oracle") {
  LstmSpec spec = tiny_lstm_spec();
  NetParams params = init_seq2seq(spec, 5);
  Mat seq(1, 2);
  seq << 0.4, -0.9;

  const Mat& wx = params.at("enc.Wx");
  const Mat& wh = params.at("enc.Wh");
  const Mat& b = params.at("enc.b");
  ts::Grid wxg(wx.rows(), std::vector<double>(wx.cols()));
  ts::Grid whg(wh.rows(), std::vector<double>(wh.cols()));
  std::vector<double> bg(b.rows());
  for (int r = 0; r < wx.rows(); ++r) {
    bg[r] = b(r, 0);
    for (int c = 0; c < wx.cols(); ++c) wxg[r][c] = wx(r, c);
    for (int c = 0; c < wh.cols(); ++c) whg[r][c] = wh(r, c);
  }
  auto oracle = ts::lstm_step_oracle(wxg, whg, bg, {0.4, -0.9}, {0, 0, 0}, {0, 0, 0});

  EncodedState st = lstm_encode(params, spec, seq);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(st.hidden(j) - oracle.h[j]) < 1e-12);
    CHECK(std::abs(st.cell(j) - oracle.c[j]) < 1e-12);
  }
}

TEST_CASE("lstm encode: palindrome with shared directional weights is symmetric") {
  LstmSpec spec = tiny_lstm_spec(true);
  NetParams params = init_seq2seq(spec, 6);
  params.at("enc_r.Wx") = params.at("enc.Wx");
  params.at("enc_r.Wh") = params.at("enc.Wh");
  params.at("enc_r.b") = params.at("enc.b");
  Mat seq(5, 2);
  seq << 1, 2, 3, 4, 5, 6, 3, 4, 1, 2;  // palindromic rows
  EncodedState st = lstm_encode(params, spec, seq);
  CHECK((st.hidden.segment(0, 3) - st.hidden.segment(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((st.cell.segment(0, 3) - st.cell.segment(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bidirectional encoding equals forward encodings of sequence and its reversal") {
  LstmSpec bi = tiny_lstm_spec(true);
  NetParams params = init_seq2seq(bi, 8);
  Mat seq = random_mat(6, 2, *std::make_unique<Rng>(12));

  LstmSpec uni = tiny_lstm_spec(false);
  NetParams fwd_only = init_seq2seq(uni, 8);
  fwd_only.at("enc.Wx") = params.at("enc.Wx");
  fwd_only.at("enc.Wh") = params.at("enc.Wh");
  fwd_only.at("enc.b") = params.at("enc.b");
  NetParams bwd_only = init_seq2seq(uni, 8);
  bwd_only.at("enc.Wx") = params.at("enc_r.Wx");
  bwd_only.at("enc.Wh") = params.at("enc_r.Wh");
  bwd_only.at("enc.b") = params.at("enc_r.b");

  Mat reversed = seq.colwise().reverse();
  EncodedState full = lstm_encode(params, bi, seq);
  EncodedState f = lstm_encode(fwd_only, uni, seq);
  EncodedState r = lstm_encode(bwd_only, uni, reversed);
  CHECK((full.hidden.segment(0, 3) - f.hidden).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((full.hidden.segment(3, 3) - r.hidden).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((full.cell.segment(0, 3) - f.cell).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((full.cell.segment(3, 3) - r.cell).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lstm encode: empty sequence is an error") {
  LstmSpec spec = tiny_lstm_spec();
  NetParams params = init_seq2seq(spec, 2);
  Mat seq(0, 2);
  CHECK_THROWS_AS(lstm_encode(params, spec, seq), DataError);
}

TEST_CASE("lstm decode: zero parameters reconstruct zeros") {
  LstmSpec spec = tiny_lstm_spec();
  NetParams params = init_seq2seq(spec, 3);
  zero_params(params);
  EncodedState st{Vec::Zero(3), Vec::Zero(3)};
  Mat out = lstm_decode(params, spec, st, 4);
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 2);
  CHECK(out.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("lstm decode: one step equals the hand-computed projection of one cell step") {
  LstmSpec spec = tiny_lstm_spec();
  NetParams params = init_seq2seq(spec, 9);
  Rng rng(14);
  EncodedState st{random_mat(3, 1, rng).col(0), random_mat(3, 1, rng).col(0)};

  const Mat& wx = params.at("dec.Wx");
  const Mat& wh = params.at("dec.Wh");
  const Mat& b = params.at("dec.b");
  ts::Grid wxg(wx.rows(), std::vector<double>(wx.cols()));
  ts::Grid whg(wh.rows(), std::vector<double>(wh.cols()));
  std::vector<double> bg(b.rows());
  for (int r = 0; r < wx.rows(); ++r) {
    bg[r] = b(r, 0);
    for (int c = 0; c < wx.cols(); ++c) wxg[r][c] = wx(r, c);
    for (int c = 0; c < wh.cols(); ++c) whg[r][c] = wh(r, c);
  }
  std::vector<double> h_prev(3), c_prev(3);
  for (int j = 0; j < 3; ++j) {
    h_prev[j] = st.hidden(j);
    c_prev[j] = st.cell(j);
  }
  auto cell = ts::lstm_step_oracle(wxg, whg, bg, {0.0, 0.0}, h_prev, c_prev);
  const Mat& wp = params.at("proj.W");
  const Mat& bp = params.at("proj.b");
  std::vector<double> expected(2);
  for (int r = 0; r < 2; ++r) {
    double acc = bp(r, 0);
    for (int c = 0; c < 3; ++c) acc += wp(r, c) * cell.h[c];
    expected[r] = acc;
  }

  Mat out = lstm_decode(params, spec, st, 1);
  CHECK(std::abs(out(0, 0) - expected[0]) < 1e-12);
  CHECK(std::abs(out(0, 1) - expected[1]) < 1e-12);
}

TEST_CASE("seq2seq reconstruction shape matches the input") {
  for (bool bi : {false, true}) {
    LstmSpec spec = tiny_lstm_spec(bi);
    NetParams params = init_seq2seq(spec, 10);
    Mat seq = random_mat(7, 2, *std::make_unique<Rng>(15));
    Mat rec = seq2seq_reconstruct(params, spec, seq);
    CHECK(rec.rows() == seq.rows());
    CHECK(rec.cols() == seq.cols());
  }
}

TEST_CASE("seq2seq loss at zero parameters on a zero sequence is zero") {
  LstmSpec spec = tiny_lstm_spec();
  NetParams params = init_seq2seq(spec, 4);
  zero_params(params);
  Mat seq = Mat::Zero(5, 2);
  auto res = seq2seq_backward(params, spec, seq);
  CHECK(res.loss == doctest::Approx(0.0));
}

TEST_CASE("seq2seq backward matches finite differences") {
  for (bool bi : {false, true}) {
    LstmSpec spec = tiny_lstm_spec(bi);
    spec.l2_lambda = 1e-3;
    NetParams params = init_seq2seq(spec, 77);
    Mat seq = random_mat(4, 2, *std::make_unique<Rng>(16), 0.8);

    auto res = seq2seq_backward(params, spec, seq);
    double err = ts::max_gradient_error(
        params, res.grads,
        [&](const NetParams& p) { return seq2seq_backward(p, spec, seq).loss; });
    CAPTURE(bi);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("seq2seq backward matches finite differences with a fixed dropout plan") {
  LstmSpec spec = tiny_lstm_spec();
  spec.dropout_rate = 0.4;
  NetParams params = init_seq2seq(spec, 78);
  Mat seq = random_mat(4, 2, *std::make_unique<Rng>(18), 0.8);
  Rng mask_rng(19);
  LstmDropoutPlan plan = make_lstm_dropout_plan(spec, 4, mask_rng);

  auto res = seq2seq_backward(params, spec, seq, &plan);
  double err = ts::max_gradient_error(params, res.grads, [&](const NetParams& p) {
    return seq2seq_backward(p, spec, seq, &plan).loss;
  });
  CHECK(err <= 1e-4);
}

TEST_CASE("training a seq2seq on a repeating sine shrinks the loss at least 10x") {
  LstmSpec spec;
  spec.input_dim = 1;
  spec.hidden_units = 8;
  NetParams params = init_seq2seq(spec, 100);
  Mat seq(20, 1);
  for (int t = 0; t < 20; ++t) seq(t, 0) = std::sin(2.0 * std::numbers::pi * t / 10.0);

  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::rmsprop;
  cfg.learning_rate = 5e-3;
  OptimizerState state;
  const double initial = seq2seq_backward(params, spec, seq).loss;
  double last = initial;
  for (int epoch = 0; epoch < 200; ++epoch) {
    auto res = seq2seq_backward(params, spec, seq);
    optimize_step(params, res.grads, cfg, state);
    last = res.loss;
  }
  CHECK(last <= initial / 10.0);
}
