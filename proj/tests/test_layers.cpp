// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "ltnn/layers.hpp"
#include "oracles.hpp"

namespace ltnn {
namespace {

using testing::dense_masked_conv;
using testing::max_relative_error;
using testing::numeric_gradient;
using testing::random_matrix;
using testing::random_vector;
using testing::span_of;

std::vector<std::string> patterns(const std::vector<WindowShape>& shapes) {
  std::vector<std::string> out;
  for (const auto& s : shapes) out.push_back(s.pattern());
  return out;
}

// Every shape exercised by the model defaults, plus a few wider ones.
std::vector<WindowShape> all_test_shapes() {
  std::vector<WindowShape> shapes{WindowShape::plain(1), WindowShape::plain(2), WindowShape::plain(3),
                                  WindowShape::plain(4)};
  for (auto [i, j] : std::initializer_list<std::pair<Index, Index>>{{1, 3}, {1, 4}, {2, 4}, {1, 5}, {2, 5}, {3, 6}}) {
    for (auto& s : gapped_window_shapes(i, j)) shapes.push_back(s);
  }
  return shapes;
}

// ---------------------------------------------------------------------------
// Window shapes

TEST(GappedWindowShapes, WorkedCases) {
  EXPECT_EQ(patterns(gapped_window_shapes(1, 4)), (std::vector<std::string>{"OXOO", "OOXO"}));
  EXPECT_EQ(patterns(gapped_window_shapes(2, 4)), (std::vector<std::string>{"OXXO"}));
  EXPECT_EQ(patterns(gapped_window_shapes(1, 3)), (std::vector<std::string>{"OXO"}));
}

TEST(GappedWindowShapes, CountsAndInvariants) {
  for (Index j = 2; j <= 8; ++j) {
    for (Index i = 1; i < j; ++i) {
      const auto shapes = gapped_window_shapes(i, j);
      ASSERT_EQ(static_cast<Index>(shapes.size()), j - i - 1) << "i=" << i << " j=" << j;
      std::size_t expected_start = 1;  // 0-indexed position of k = 2
      for (const auto& s : shapes) {
        const std::string p = s.pattern();
        ASSERT_EQ(static_cast<Index>(p.size()), j);
        EXPECT_EQ(p.front(), 'O');
        EXPECT_EQ(p.back(), 'O');
        const auto first = p.find('X'), last = p.rfind('X');
        EXPECT_EQ(static_cast<Index>(last - first + 1), i) << p;
        EXPECT_EQ(std::count(p.begin(), p.end(), 'X'), i) << p;
        EXPECT_EQ(s.activated_count(), j - i);
        EXPECT_EQ(first, expected_start++) << p;
      }
    }
  }
}

TEST(GappedWindowShapes, PreconditionErrors) {
  EXPECT_THROW(gapped_window_shapes(0, 4), ArgumentError);
  EXPECT_THROW(gapped_window_shapes(4, 4), ArgumentError);
  EXPECT_THROW(gapped_window_shapes(5, 4), ArgumentError);
}

TEST(WindowShape, PlainHasNoGap) {
  const WindowShape w = WindowShape::plain(3);
  EXPECT_EQ(w.pattern(), "OOO");
  EXPECT_EQ(w.gap, 0);
  EXPECT_EQ(w.activated_offsets(), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(gapped_window_shapes(2, 5)[1].activated_offsets(), (std::vector<Index>{0, 1, 4}));
}

// ---------------------------------------------------------------------------
// Convolution

TEST(Conv1d, LengthArithmetic) {
  EXPECT_EQ(conv_output_length(100, WindowShape::plain(4)), 97);
  EXPECT_EQ(conv_output_length(100, gapped_window_shapes(2, 4)[0]), 97);
  RngStream rng(1);
  const ConvLayer layer = make_conv_layer(WindowShape::plain(4), 3, 2, rng);
  EXPECT_THROW(conv1d_forward(Matrix::Zero(3, 3), layer), ShapeError);
  EXPECT_THROW(conv1d_forward(Matrix::Zero(6, 4), layer), ShapeError);
  EXPECT_EQ(conv1d_forward(Matrix::Zero(4, 3), layer).rows(), 1);
}

TEST(Conv1d, KernelLayoutAndInit) {
  RngStream rng(2);
  const ConvLayer layer = make_conv_layer(gapped_window_shapes(1, 4)[0], 5, 7, rng);
  EXPECT_EQ(layer.kernel.rows(), 7);
  EXPECT_EQ(layer.kernel.cols(), 3 * 5);
  EXPECT_EQ(layer.bias, Vector::Zero(7));
  EXPECT_EQ(layer.channels(), 5);
  RngStream again(2);
  EXPECT_EQ(make_conv_layer(gapped_window_shapes(1, 4)[0], 5, 7, again).kernel, layer.kernel);
}

TEST(Conv1d, IdentityKernelShiftsChannelZero) {
  ConvLayer layer{WindowShape::plain(3), Matrix::Zero(1, 3 * 2), Vector::Zero(1)};
  layer.kernel(0, 0) = 1.0;  // offset 0, channel 0
  RngStream rng(3);
  const Matrix input = random_matrix(rng, 10, 2, 0.0, 1.0);
  const Matrix out = conv1d_forward(input, layer);
  ASSERT_EQ(out.rows(), 8);
  for (Index p = 0; p < 8; ++p) EXPECT_EQ(out(p, 0), input(p, 0));
}

TEST(Conv1d, GappedEqualsPlainWithZeroMiddleColumn) {
  RngStream rng(4);
  const WindowShape oxo = gapped_window_shapes(1, 3)[0];
  ConvLayer gapped{oxo, random_matrix(rng, 4, 2 * 3), random_vector(rng, 4)};
  ConvLayer plain{WindowShape::plain(3), Matrix::Zero(4, 3 * 3), gapped.bias};
  plain.kernel.leftCols(3) = gapped.kernel.leftCols(3);
  plain.kernel.rightCols(3) = gapped.kernel.rightCols(3);
  const Matrix input = random_matrix(rng, 12, 3);
  EXPECT_LE((conv1d_forward(input, gapped) - conv1d_forward(input, plain)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Conv1d, MaskedDenseOracle) {
  RngStream rng(5);
  for (const auto& shape : all_test_shapes()) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Index d = 1 + static_cast<Index>(rng.below(5)), filters = 1 + static_cast<Index>(rng.below(4));
      const Index length = shape.size + static_cast<Index>(rng.below(8));
      const ConvLayer layer{shape, random_matrix(rng, filters, shape.activated_count() * d),
                            random_vector(rng, filters)};
      const Matrix input = random_matrix(rng, length, d, -3, 3);
      const Matrix expected = dense_masked_conv(input, shape, layer.kernel, layer.bias);
      worst = std::max(worst, (conv1d_preactivation(input, layer) - expected).cwiseAbs().maxCoeff());
      const Matrix activated = expected.cwiseMax(0.0);
      worst = std::max(worst, (conv1d_forward(input, layer) - activated).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(worst, 1e-10) << shape.pattern();
  }
}

TEST(Conv1d, PadRowsContributeNothing) {
  RngStream rng(6);
  const ConvLayer layer = make_conv_layer(WindowShape::plain(2), 3, 4, rng);
  Matrix input = Matrix::Zero(5, 3);
  const Matrix out = conv1d_preactivation(input, layer);
  for (Index p = 0; p < out.rows(); ++p) EXPECT_EQ(out.row(p), layer.bias.transpose());
}

TEST(Conv1dBackward, ZeroUpstreamGivesZeroGrads) {
  RngStream rng(7);
  const ConvLayer layer = make_conv_layer(WindowShape::plain(3), 4, 5, rng);
  const Matrix input = random_matrix(rng, 8, 4);
  ConvCache cache;
  conv1d_forward(input, layer, &cache);
  const ConvGrads g = conv1d_backward(input, layer, cache, Matrix::Zero(6, 5));
  EXPECT_EQ(g.kernel, Matrix::Zero(5, 12));
  EXPECT_EQ(g.bias, Vector::Zero(5));
  EXPECT_EQ(g.input, Matrix::Zero(8, 4));
  EXPECT_THROW(conv1d_backward(input, layer, cache, Matrix::Zero(5, 5)), ShapeError);
}

TEST(Conv1dBackward, FiniteDifferenceEveryShape) {
  RngStream rng(8);
  for (const auto& shape : all_test_shapes()) {
    ConvLayer layer{shape, random_matrix(rng, 3, shape.activated_count() * 5), random_vector(rng, 3, -0.2, 0.2)};
    Matrix input = random_matrix(rng, 8, 5);
    ASSERT_TRUE(testing::move_off_kinks(input, layer, rng)) << shape.pattern();
    const Matrix weights = random_matrix(rng, conv_output_length(8, shape), 3);
    auto loss = [&] { return conv1d_forward(input, layer).cwiseProduct(weights).sum(); };

    ConvCache cache;
    conv1d_forward(input, layer, &cache);
    const ConvGrads g = conv1d_backward(input, layer, cache, weights);
    EXPECT_LE(max_relative_error(g.kernel, numeric_gradient(span_of(layer.kernel), loss)), testing::kFdTolerance)
        << shape.pattern();
    EXPECT_LE(max_relative_error(g.bias, numeric_gradient(span_of(layer.bias), loss)), testing::kFdTolerance)
        << shape.pattern();
    EXPECT_LE(max_relative_error(g.input, numeric_gradient(span_of(input), loss)), testing::kFdTolerance)
        << shape.pattern();
  }
}

TEST(Conv1dBackward, DeactivatedOffsetsReceiveNoGradient) {
  RngStream rng(9);
  // Single output position: rows under 'X' are touched only through the gap.
  const WindowShape oxxo = gapped_window_shapes(2, 4)[0];
  ConvLayer layer{oxxo, random_matrix(rng, 4, 2 * 3), Vector::Constant(4, 5.0)};
  const Matrix input = random_matrix(rng, 4, 3);
  ConvCache cache;
  conv1d_forward(input, layer, &cache);
  const ConvGrads g = conv1d_backward(input, layer, cache, Matrix::Ones(1, 4));
  EXPECT_EQ(g.input.row(1), RowVector::Zero(3));
  EXPECT_EQ(g.input.row(2), RowVector::Zero(3));
  EXPECT_GT(g.input.row(0).cwiseAbs().sum(), 0.0);
  EXPECT_GT(g.input.row(3).cwiseAbs().sum(), 0.0);
}

TEST(Conv1dBackward, ReluSubgradientIsZeroAtZero) {
  ConvLayer layer{WindowShape::plain(1), Matrix::Ones(1, 1), Vector::Zero(1)};
  Matrix input(3, 1);
  input << -1.0, 0.0, 2.0;
  ConvCache cache;
  conv1d_forward(input, layer, &cache);
  const ConvGrads g = conv1d_backward(input, layer, cache, Matrix::Ones(3, 1));
  EXPECT_EQ(g.input(0, 0), 0.0);
  EXPECT_EQ(g.input(1, 0), 0.0);
  EXPECT_EQ(g.input(2, 0), 1.0);
  EXPECT_EQ(g.bias(0), 1.0);
}

// ---------------------------------------------------------------------------
// Pooling

TEST(MaxPool, LengthArithmetic) {
  EXPECT_EQ(pool_output_length(97, 4, 4), 24);
  EXPECT_EQ(pool_output_length(99, 4, 4), 24);
  EXPECT_EQ(pool_output_length(72, 4, 4), 18);
  EXPECT_EQ(maxpool1d(Matrix::Zero(97, 2)).output.rows(), 24);
  EXPECT_THROW(maxpool1d(Matrix::Zero(3, 2)), ShapeError);
}

TEST(MaxPool, HandEvaluation) {
  Matrix x(8, 1);
  x << 1, 3, 2, 0, 5, 4, 4, 4;
  const PoolResult r = maxpool1d(x, 4, 4);
  ASSERT_EQ(r.output.rows(), 2);
  EXPECT_EQ(r.output(0, 0), 3);
  EXPECT_EQ(r.output(1, 0), 5);
  EXPECT_EQ(r.argmax(0, 0), 1);
  EXPECT_EQ(r.argmax(1, 0), 4);
}

TEST(MaxPool, ConstantInputTiesGoToWindowStart) {
  const PoolResult r = maxpool1d(Matrix::Constant(13, 3, 2.5), 4, 4);
  ASSERT_EQ(r.output.rows(), 3);
  EXPECT_EQ(r.output, Matrix::Constant(3, 3, 2.5));
  for (Index w = 0; w < 3; ++w) {
    for (Index f = 0; f < 3; ++f) EXPECT_EQ(r.argmax(w, f), 4 * w);
  }
}

TEST(MaxPool, BackwardScattersToArgmax) {
  RngStream rng(10);
  const Matrix x = random_matrix(rng, 19, 4);
  const PoolResult r = maxpool1d(x, 4, 4);
  const Matrix up = random_matrix(rng, r.output.rows(), 4);
  const Matrix g = maxpool1d_backward(r, up);
  ASSERT_EQ(g.rows(), 19);
  EXPECT_NEAR(g.sum(), up.sum(), 1e-12);
  for (Index t = 0; t < 19; ++t) {
    for (Index f = 0; f < 4; ++f) {
      bool is_argmax = false;
      for (Index w = 0; w < r.argmax.rows(); ++w) is_argmax |= r.argmax(w, f) == t;
      if (!is_argmax) EXPECT_EQ(g(t, f), 0.0);
    }
  }
  EXPECT_THROW(maxpool1d_backward(r, Matrix::Zero(2, 4)), ShapeError);
}

TEST(MaxPool, FiniteDifference) {
  RngStream rng(11);
  for (auto [pool, stride] : std::initializer_list<std::pair<Index, Index>>{{4, 4}, {3, 2}, {2, 3}}) {
    Matrix x = random_matrix(rng, 17, 3);
    const Matrix weights = random_matrix(rng, pool_output_length(17, pool, stride), 3);
    auto loss = [&] { return maxpool1d(x, pool, stride).output.cwiseProduct(weights).sum(); };
    const Matrix g = maxpool1d_backward(maxpool1d(x, pool, stride), weights);
    EXPECT_LE(max_relative_error(g, numeric_gradient(span_of(x), loss)), testing::kFdTolerance);
  }
}

TEST(GlobalMaxPool, Cases) {
  RowVector row(3);
  row << 0.5, -2, 7;
  const GlobalPoolResult one = global_maxpool(Matrix(row));
  EXPECT_EQ(one.output, row.transpose());

  Matrix col(3, 1);
  col << -3, -1, -2;
  EXPECT_EQ(global_maxpool(col).output(0), -1);
  EXPECT_EQ(global_maxpool(col).argmax(0), 1);

  RngStream rng(12);
  const Matrix x = random_matrix(rng, 7, 3);
  const GlobalPoolResult r = global_maxpool(x);
  for (Index f = 0; f < 3; ++f) {
    double best = -INFINITY;
    for (Index t = 0; t < 7; ++t) best = std::max(best, x(t, f));
    EXPECT_EQ(r.output(f), best);
  }
  EXPECT_THROW(global_maxpool(Matrix(0, 3)), ShapeError);
}

TEST(GlobalMaxPool, FiniteDifference) {
  RngStream rng(13);
  Matrix x = random_matrix(rng, 7, 3);
  const Vector weights = random_vector(rng, 3);
  auto loss = [&] { return global_maxpool(x).output.dot(weights); };
  const Matrix g = global_maxpool_backward(global_maxpool(x), weights);
  EXPECT_LE(max_relative_error(g, numeric_gradient(span_of(x), loss)), testing::kFdTolerance);
  EXPECT_NEAR(g.sum(), weights.sum(), 1e-12);
}

// ---------------------------------------------------------------------------
// GRU

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Step-by-step scalar evaluation of the recurrence.
Matrix gru_scalar_oracle(const Matrix& x, const GruLayer& g) {
  const Index steps = x.rows(), d = x.cols(), h = g.units();
  Matrix out(steps, h);
  std::vector<double> prev(static_cast<std::size_t>(h), 0.0), next(static_cast<std::size_t>(h));
  for (Index t = 0; t < steps; ++t) {
    std::vector<double> z(static_cast<std::size_t>(h)), r(static_cast<std::size_t>(h));
    for (Index k = 0; k < h; ++k) {
      double az = g.b_z(k), ar = g.b_r(k);
      for (Index i = 0; i < d; ++i) {
        az += x(t, i) * g.w_z(i, k);
        ar += x(t, i) * g.w_r(i, k);
      }
      for (Index m = 0; m < h; ++m) {
        az += prev[static_cast<std::size_t>(m)] * g.u_z(m, k);
        ar += prev[static_cast<std::size_t>(m)] * g.u_r(m, k);
      }
      z[static_cast<std::size_t>(k)] = sigmoid(az);
      r[static_cast<std::size_t>(k)] = sigmoid(ar);
    }
    for (Index k = 0; k < h; ++k) {
      double ah = g.b_h(k);
      for (Index i = 0; i < d; ++i) ah += x(t, i) * g.w_h(i, k);
      for (Index m = 0; m < h; ++m) ah += r[static_cast<std::size_t>(m)] * prev[static_cast<std::size_t>(m)] * g.u_h(m, k);
      const double cand = std::tanh(ah);
      const double zk = z[static_cast<std::size_t>(k)];
      next[static_cast<std::size_t>(k)] = (1.0 - zk) * prev[static_cast<std::size_t>(k)] + zk * cand;
    }
    prev = next;
    for (Index k = 0; k < h; ++k) out(t, k) = prev[static_cast<std::size_t>(k)];
  }
  return out;
}

GruLayer random_gru(RngStream& rng, Index d, Index h) {
  GruLayer g = make_gru_layer(d, h, rng);
  g.b_z = random_vector(rng, h, -0.5, 0.5);
  g.b_r = random_vector(rng, h, -0.5, 0.5);
  g.b_h = random_vector(rng, h, -0.5, 0.5);
  return g;
}

TEST(Gru, ZeroWeightsStayAtZero) {
  RngStream init(1);
  GruLayer g = make_gru_layer(3, 4, init);
  for (Matrix* m : {&g.w_z, &g.w_r, &g.w_h, &g.u_z, &g.u_r, &g.u_h}) m->setZero();
  RngStream rng(14);
  EXPECT_EQ(gru_forward(random_matrix(rng, 5, 3), g), Matrix::Zero(5, 4));
}

TEST(Gru, SaturatedUpdateGateScalarTrace) {
  GruLayer g{Matrix::Zero(1, 1), Matrix::Constant(1, 1, 0.3), Matrix::Constant(1, 1, 0.7),
             Matrix::Zero(1, 1), Matrix::Constant(1, 1, -0.4), Matrix::Constant(1, 1, 0.9),
             Vector::Constant(1, 40.0), Vector::Zero(1), Vector::Constant(1, 0.1)};
  Matrix x(1, 1);
  x << 0.8;
  // z = sigma(40) ~ 1, h_prev = 0  =>  h1 = tanh(x W_h + b_h)
  EXPECT_NEAR(gru_forward(x, g)(0, 0), std::tanh(0.8 * 0.7 + 0.1), 1e-12);
}

TEST(Gru, MatchesScalarLoopOracle) {
  RngStream rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const GruLayer g = random_gru(rng, 3, 2);
    const Matrix x = random_matrix(rng, 5, 3, -2, 2);
    EXPECT_LE((gru_forward(x, g) - gru_scalar_oracle(x, g)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(gru_forward(Matrix::Zero(5, 4), random_gru(rng, 3, 2)), ShapeError);
  EXPECT_THROW(gru_forward(Matrix::Zero(0, 3), random_gru(rng, 3, 2)), ShapeError);
}

TEST(GruBackward, ZeroUpstreamGivesZeroGrads) {
  RngStream rng(16);
  const GruLayer g = random_gru(rng, 4, 3);
  GruCache cache;
  gru_forward(random_matrix(rng, 6, 4), g, &cache);
  const GruGrads gr = gru_backward(cache, g, Matrix::Zero(6, 3));
  for (const Matrix* m : {&gr.w_z, &gr.w_r, &gr.w_h, &gr.u_z, &gr.u_r, &gr.u_h, &gr.input}) {
    EXPECT_EQ(m->cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(gr.b_z.cwiseAbs().maxCoeff() + gr.b_r.cwiseAbs().maxCoeff() + gr.b_h.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(gru_backward(cache, g, Matrix::Zero(5, 3)), ShapeError);
}

TEST(GruBackward, FiniteDifferenceAllParameters) {
  RngStream rng(17);
  GruLayer g = random_gru(rng, 4, 3);
  Matrix x = random_matrix(rng, 6, 4);
  const Matrix weights = random_matrix(rng, 6, 3);
  auto loss = [&] { return gru_forward(x, g).cwiseProduct(weights).sum(); };
  GruCache cache;
  gru_forward(x, g, &cache);
  const GruGrads gr = gru_backward(cache, g, weights);
  const double tol = testing::kFdTolerance;
  EXPECT_LE(max_relative_error(gr.w_z, numeric_gradient(span_of(g.w_z), loss)), tol);
  EXPECT_LE(max_relative_error(gr.w_r, numeric_gradient(span_of(g.w_r), loss)), tol);
  EXPECT_LE(max_relative_error(gr.w_h, numeric_gradient(span_of(g.w_h), loss)), tol);
  EXPECT_LE(max_relative_error(gr.u_z, numeric_gradient(span_of(g.u_z), loss)), tol);
  EXPECT_LE(max_relative_error(gr.u_r, numeric_gradient(span_of(g.u_r), loss)), tol);
  EXPECT_LE(max_relative_error(gr.u_h, numeric_gradient(span_of(g.u_h), loss)), tol);
  EXPECT_LE(max_relative_error(gr.b_z, numeric_gradient(span_of(g.b_z), loss)), tol);
  EXPECT_LE(max_relative_error(gr.b_r, numeric_gradient(span_of(g.b_r), loss)), tol);
  EXPECT_LE(max_relative_error(gr.b_h, numeric_gradient(span_of(g.b_h), loss)), tol);
  EXPECT_LE(max_relative_error(gr.input, numeric_gradient(span_of(x), loss)), tol);
}

TEST(GruBackward, Causality) {
  RngStream rng(18);
  const GruLayer g = random_gru(rng, 4, 3);
  const Matrix x = random_matrix(rng, 6, 4);
  const Index t = 2;
  Matrix up = Matrix::Zero(6, 3);
  up.row(t) = random_vector(rng, 3).transpose();
  GruCache cache;
  gru_forward(x, g, &cache);
  const GruGrads gr = gru_backward(cache, g, up);
  for (Index later = t + 1; later < 6; ++later) EXPECT_EQ(gr.input.row(later), RowVector::Zero(4));
  EXPECT_GT(gr.input.row(t).cwiseAbs().sum(), 0.0);

  // Perturbing later inputs leaves h_t unchanged.
  Matrix perturbed = x;
  perturbed.bottomRows(6 - t - 1) += random_matrix(rng, 6 - t - 1, 4);
  EXPECT_EQ(gru_forward(perturbed, g).topRows(t + 1), gru_forward(x, g).topRows(t + 1));
}

// ---------------------------------------------------------------------------
// Dropout

TEST(Dropout, EvalIsIdentity) {
  RngStream rng(19);
  const Matrix x = random_matrix(rng, 4, 5);
  EXPECT_EQ(dropout(x, 0.2, Mode::kEval, &rng), x);
  EXPECT_EQ(dropout(x, 0.0, Mode::kTrain, &rng), x);
  EXPECT_EQ(dropout(x, 0.0, Mode::kEval, nullptr), x);
}

TEST(Dropout, InvertedScalingStatistics) {
  RngStream rng(20);
  const Matrix ones = Matrix::Ones(1, 100);
  Matrix sum = Matrix::Zero(1, 100);
  long long zeros = 0;
  for (int copy = 0; copy < 10000; ++copy) {
    const Matrix y = dropout(ones, 0.2, Mode::kTrain, &rng);
    for (Index i = 0; i < 100; ++i) {
      ASSERT_TRUE(y(0, i) == 0.0 || std::abs(y(0, i) - 1.25) < 1e-15);
      zeros += y(0, i) == 0.0;
    }
    sum += y;
  }
  EXPECT_NEAR(sum.mean() / 10000.0, 1.0, 0.02);
  EXPECT_NEAR(static_cast<double>(zeros) / 1e6, 0.2, 0.01);
}

TEST(Dropout, BackwardReusesMaskAndErrors) {
  RngStream rng(21);
  const Matrix x = random_matrix(rng, 6, 6);
  DropoutCache cache;
  const Matrix y = dropout(x, 0.5, Mode::kTrain, &rng, &cache);
  const Matrix g = dropout_backward(cache, Matrix::Ones(6, 6));
  for (Index i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i] * g.data()[i]);
  EXPECT_THROW(dropout(x, 1.0, Mode::kTrain, &rng), ArgumentError);
  EXPECT_THROW(dropout(x, -0.1, Mode::kEval, &rng), ArgumentError);
  EXPECT_THROW(dropout(x, 0.2, Mode::kTrain, nullptr), ArgumentError);
}

// ---------------------------------------------------------------------------
// Dense

TEST(Dense, TrivialCases) {
  RngStream rng(22);
  const Vector x = random_vector(rng, 4);
  EXPECT_EQ(dense_forward(x, Matrix::Zero(4, 3), Vector::Zero(3)), Vector::Zero(3));
  EXPECT_EQ(dense_forward(x, Matrix::Identity(4, 4), Vector::Zero(4)), x);
  EXPECT_THROW(dense_forward(x, Matrix::Zero(3, 3), Vector::Zero(3)), ShapeError);
  EXPECT_THROW(dense_forward(x, Matrix::Zero(4, 3), Vector::Zero(2)), ShapeError);
}

TEST(Dense, FiniteDifference) {
  RngStream rng(23);
  DenseLayer layer = make_dense_layer(6, 3, rng);
  layer.bias = random_vector(rng, 3);
  Vector x = random_vector(rng, 6);
  const Vector weights = random_vector(rng, 3);
  auto loss = [&] { return dense_forward(x, layer.weights, layer.bias).dot(weights); };
  const DenseGrads g = dense_backward(x, layer.weights, weights);
  EXPECT_LE(max_relative_error(g.weights, numeric_gradient(span_of(layer.weights), loss)), testing::kFdTolerance);
  EXPECT_LE(max_relative_error(g.bias, numeric_gradient(span_of(layer.bias), loss)), testing::kFdTolerance);
  EXPECT_LE(max_relative_error(g.input, numeric_gradient(span_of(x), loss)), testing::kFdTolerance);
}

}  // namespace
}  // namespace ltnn
