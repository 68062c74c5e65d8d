#include <cmath>

#include "doctest.h"
#include "triplesum/error.hpp"
#include "triplesum/nn/optim.hpp"
#include "triplesum/nn/tape.hpp"

using namespace triplesum;
using namespace triplesum::nn;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("affine hand cases") {
  Tape tape;
  Parameter w("w", 2, 2), b("b", 1, 2);
  w.value = Matrix::Identity(2, 2);
  const Matrix x = mat({{0.3, -1.2}, {2.0, 5.0}});
  CHECK(tape.value(tape.affine(tape.constant(x), w, &b)).isApprox(x));

  w.value.setZero();
  b.value = mat({{7.0, -2.0}});
  const Matrix y = tape.value(tape.affine(tape.constant(x), w, &b));
  CHECK(y(0, 0) == 7.0);
  CHECK(y(1, 1) == -2.0);

  w.value = mat({{1, 2}, {3, 4}});
  const Matrix z = tape.value(tape.affine(tape.constant(mat({{1, 1}})), w));
  CHECK(z(0, 0) == 3.0);
  CHECK(z(0, 1) == 7.0);

  Parameter wide("wide", 2, 3);
  CHECK_THROWS_AS(tape.affine(tape.constant(x), wide), ShapeError);
}

TEST_CASE("activations and softmax") {
  Tape tape;
  const Var x = tape.constant(mat({{-3.0, 0.0, 3.0}}));
  const Matrix r = tape.value(tape.relu(x));
  CHECK(r(0, 0) == 0.0);
  CHECK(r(0, 2) == 3.0);
  CHECK(tape.value(tape.sigmoid(x))(0, 1) == 0.5);
  CHECK(tape.value(tape.tanh(x))(0, 1) == 0.0);

  const Matrix s = softmax_rows(Matrix::Zero(2, 5));
  for (Eigen::Index j = 0; j < 5; ++j) CHECK(s(1, j) == doctest::Approx(0.2).epsilon(1e-15));
  const Matrix big = softmax_rows(mat({{1000.0, -1000.0, 3.0, 999.5}}));
  CHECK(std::abs(big.sum() - 1.0) < 1e-12);
  const Matrix masked = softmax_rows(Matrix::Zero(1, 4), 2);
  CHECK(masked(0, 2) == 0.0);
  CHECK(masked(0, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("batch normalization") {
  BatchNorm bn("bn", 2);
  bn.shift.value = mat({{0.5, -0.25}});
  Tape tape;
  const Matrix constant = tape.value(tape.batch_norm(tape.constant(mat({{3, 1}, {3, 1}, {3, 1}})), bn, true));
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(constant(i, 0) == 0.5);
    CHECK(constant(i, 1) == -0.25);
  }

  // Standardized columns (mean 0, biased variance 1): the output is
  // x / sqrt(1 + eps), which is the input to within 1e-6 once eps is tiny.
  const Matrix x = mat({{1.0, -1.0}, {-1.0, 1.0}});
  BatchNorm plain("plain", 2);
  Tape t1;
  const Matrix y = t1.value(t1.batch_norm(t1.constant(x), plain, true));
  CHECK(y(0, 0) == doctest::Approx(1.0 / std::sqrt(1.0 + 1e-5)).epsilon(1e-14));
  plain.epsilon = 1e-12;
  Tape t2;
  CHECK((t2.value(t2.batch_norm(t2.constant(x), plain, true)) - x).cwiseAbs().maxCoeff() < 1e-6);

  // Running statistics move by momentum 0.9 towards the batch statistics.
  BatchNorm run("run", 1);
  Tape t3;
  t3.batch_norm(t3.constant(mat({{2.0}, {4.0}})), run, true);
  CHECK(run.running_mean(0, 0) == doctest::Approx(0.9 * 0.0 + 0.1 * 3.0));
  CHECK(run.running_var(0, 0) == doctest::Approx(0.9 * 1.0 + 0.1 * 1.0));

  // Inference with mean 0 and variance 1 is scale x + shift.
  BatchNorm inf("inf", 2);
  inf.scale.value = mat({{2.0, 3.0}});
  inf.shift.value = mat({{1.0, -1.0}});
  Tape t4;
  const Matrix z = t4.value(t4.batch_norm(t4.constant(mat({{0.5, 2.0}})), inf, false));
  CHECK(z(0, 0) == doctest::Approx(2.0 * 0.5 / std::sqrt(1.0 + 1e-5) + 1.0));
  CHECK(z(0, 1) == doctest::Approx(3.0 * 2.0 / std::sqrt(1.0 + 1e-5) - 1.0));

  Tape t5;
  CHECK_THROWS(t5.batch_norm(t5.constant(mat({{1.0, 2.0}})), inf, true));

  // Masked rows stay out of the statistics.
  BatchNorm masked("masked", 1);
  Tape t6;
  const unsigned char active[3] = {1, 1, 0};
  const Matrix m = t6.value(t6.batch_norm(t6.constant(mat({{1.0}, {3.0}, {100.0}})), masked, true, active));
  CHECK(m(0, 0) == doctest::Approx(-1.0 / std::sqrt(1.0 + 1e-5)));
  CHECK(m(1, 0) == doctest::Approx(1.0 / std::sqrt(1.0 + 1e-5)));
}

TEST_CASE("backward hand cases") {
  Parameter w("w", 2, 2), ones("ones", 1, 2), unused("unused", 2, 2);
  w.value = mat({{1, 2}, {3, 4}});
  ones.value.setOnes();
  Tape tape;
  const Var y = tape.affine(tape.constant(mat({{5.0, -7.0}})), w);
  const Var loss = tape.affine(y, ones);  // sum(W x)
  tape.backward(loss);
  // d sum_i sum_j W_ij x_j / d W_ij = x_j.
  CHECK(w.grad(0, 0) == 5.0);
  CHECK(w.grad(1, 0) == 5.0);
  CHECK(w.grad(0, 1) == -7.0);
  CHECK(w.grad(1, 1) == -7.0);
  CHECK(unused.grad.isZero());
  CHECK_THROWS(tape.backward(loss));
}

TEST_CASE("masked negative log-likelihood") {
  Tape tape;
  const Var logits = tape.constant(Matrix::Zero(2, 4));
  const int targets[2] = {1, 3};
  // Column 3 is masked: row 0 costs ln 3, row 1 (target 3) costs nothing.
  const Var loss = tape.masked_nll(logits, targets, 3, 0.5);
  CHECK(tape.value(loss)(0, 0) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("rmsprop") {
  Parameter p("p", 1, 1);
  p.value(0, 0) = 0.25;
  Parameter* params[1] = {&p};
  p.grad.setZero();
  rmsprop_step(params, 0.1, {0.95, 1e-8, 0.0});
  CHECK(p.value(0, 0) == 0.25);

  p.grad(0, 0) = 1.0;
  rmsprop_step(params, 0.1, {0.95, 1e-8, 0.0});
  CHECK(p.accumulator(0, 0) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(p.value(0, 0) == doctest::Approx(0.25 - 0.1 / std::sqrt(0.05 + 1e-8)).epsilon(1e-15));

  Parameter a("a", 1, 3), b("b", 1, 3);
  a.value = b.value = mat({{0.1, -0.2, 0.3}});
  a.grad = b.grad = mat({{1.0, 2.0, -3.0}});
  Parameter* both[2] = {&a, &b};
  rmsprop_step(both, 0.01);
  CHECK(a.value == b.value);
}

TEST_CASE("gradient clipping") {
  Parameter p("p", 1, 2);
  Parameter* params[1] = {&p};
  p.grad = mat({{3.0, 4.0}});
  CHECK(clip_gradients(params, 1.0) == doctest::Approx(0.2));
  CHECK(p.grad(0, 0) == doctest::Approx(0.6));
  CHECK(p.grad(0, 1) == doctest::Approx(0.8));
  p.grad = mat({{3.0, 4.0}});
  CHECK(clip_gradients(params, 5.0) == 1.0);
  CHECK(p.grad(0, 1) == 4.0);
  p.grad.setZero();
  CHECK(clip_gradients(params, 1.0) == 1.0);
}

TEST_CASE("uniform initialization") {
  Parameter a("a", 1000, 1000), b("b", 1000, 1000);
  Parameter* pa[1] = {&a};
  Parameter* pb[1] = {&b};
  init_uniform(pa, 7);
  init_uniform(pb, 7);
  CHECK(a.value == b.value);
  CHECK(a.value.minCoeff() >= -0.001);
  CHECK(a.value.maxCoeff() < 0.001);
  CHECK(std::abs(a.value.mean()) < 1e-4);
  init_uniform(pb, 8);
  CHECK(a.value != b.value);
}
