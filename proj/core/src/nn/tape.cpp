#include "triplesum/nn/tape.hpp"

#include <algorithm>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "triplesum/error.hpp"

namespace triplesum::nn {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": operands are " + shape(a) + " and " + shape(b));
}

}  // namespace

BatchNorm::BatchNorm(const std::string& name, Eigen::Index width, Eigen::Index slots)
    : scale(name + ".scale", 1, width),
      shift(name + ".shift", 1, width),
      running_mean(Matrix::Zero(std::max<Eigen::Index>(slots, 1), width)),
      running_var(Matrix::Ones(std::max<Eigen::Index>(slots, 1), width)) {
  scale.value.setOnes();
}

Var Tape::push(Matrix value, std::function<void(Tape&, int)> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), record_ ? std::move(back) : nullptr});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Matrix m) { return push(std::move(m), nullptr); }

Var Tape::lookup(const Parameter& table, std::span<const int> rows, const Parameter* bias) {
  const Eigen::Index width = table.value.cols();
  if (bias && (bias->value.rows() != 1 || bias->value.cols() != width))
    throw ShapeError("lookup: bias " + bias->name + " is " + shape(bias->value) + ", table " + table.name + " is " +
                     shape(table.value));
  Matrix out(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= table.value.rows())
      throw DataError("lookup: index " + std::to_string(rows[i]) + " outside " + table.name + " with " +
                      std::to_string(table.value.rows()) + " rows");
    out.row(static_cast<Eigen::Index>(i)) = table.value.row(rows[i]);
  }
  if (bias) out.rowwise() += bias->value.row(0);
  std::vector<int> idx(rows.begin(), rows.end());
  return push(std::move(out), [&table, bias, idx = std::move(idx)](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    for (std::size_t i = 0; i < idx.size(); ++i) table.grad.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    if (bias) bias->grad.row(0) += g.colwise().sum();
  });
}

Var Tape::affine(Var x, const Parameter& w, const Parameter* b) {
  const Matrix& xv = value(x);
  if (xv.cols() != w.value.cols())
    throw ShapeError("affine: input is " + shape(xv) + " but " + w.name + " is " + shape(w.value));
  if (b && (b->value.rows() != 1 || b->value.cols() != w.value.rows()))
    throw ShapeError("affine: bias " + b->name + " is " + shape(b->value) + " for " + w.name + " " + shape(w.value));
  Matrix out = xv * w.value.transpose();
  if (b) out.rowwise() += b->value.row(0);
  return push(std::move(out), [xi = x.id, &w, b](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    w.grad.noalias() += g.transpose() * t.nodes_[static_cast<std::size_t>(xi)].value;
    if (b) b->grad.row(0) += g.colwise().sum();
    t.grad_of(xi).noalias() += g * w.value;
  });
}

Var Tape::add(Var a, Var b) {
  require_same_shape("add", value(a), value(b));
  return push(value(a) + value(b), [ai = a.id, bi = b.id](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    t.grad_of(ai) += g;
    t.grad_of(bi) += g;
  });
}

Var Tape::sub(Var a, Var b) {
  require_same_shape("sub", value(a), value(b));
  return push(value(a) - value(b), [ai = a.id, bi = b.id](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    t.grad_of(ai) += g;
    t.grad_of(bi) -= g;
  });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape("mul", value(a), value(b));
  return push(value(a).cwiseProduct(value(b)), [ai = a.id, bi = b.id](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    t.grad_of(ai) += g.cwiseProduct(t.value(Var{bi}));
    t.grad_of(bi) += g.cwiseProduct(t.value(Var{ai}));
  });
}

Var Tape::one_minus(Var a) {
  Matrix out = (1.0 - value(a).array()).matrix();
  return push(std::move(out), [ai = a.id](Tape& t, int self) { t.grad_of(ai) -= t.grad_ref(self); });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (value(p).rows() != rows)
      throw ShapeError("concat_cols: operand of " + shape(value(p)) + " against " + std::to_string(rows) + " rows");
    cols += value(p).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
    ids.push_back(p.id);
  }
  return push(std::move(out), [ids = std::move(ids)](Tape& t, int self) {
    Eigen::Index off = 0;
    for (int id : ids) {
      const Eigen::Index w = t.value(Var{id}).cols();
      t.grad_of(id) += t.grad_ref(self).middleCols(off, w);
      off += w;
    }
  });
}

Var Tape::slice_cols(Var a, Eigen::Index start, Eigen::Index width) {
  const Matrix& av = value(a);
  if (start < 0 || width < 0 || start + width > av.cols())
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + ", " + std::to_string(start + width) +
                     ") of " + shape(av));
  Matrix out = av.middleCols(start, width);
  return push(std::move(out), [ai = a.id, start, width](Tape& t, int self) {
    t.grad_of(ai).middleCols(start, width) += t.grad_ref(self);
  });
}

Var Tape::relu(Var a) {
  Matrix out = value(a).cwiseMax(0.0);
  return push(std::move(out), [ai = a.id](Tape& t, int self) {
    const Matrix& x = t.value(Var{ai});
    t.grad_of(ai).array() += (x.array() > 0.0).select(t.grad_ref(self).array(), 0.0);
  });
}

Var Tape::sigmoid(Var a) {
  Matrix out = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  return push(std::move(out), [ai = a.id](Tape& t, int self) {
    const auto y = t.value(Var{self}).array();
    t.grad_of(ai).array() += t.grad_ref(self).array() * y * (1.0 - y);
  });
}

Var Tape::tanh(Var a) {
  Matrix out = value(a).array().tanh().matrix();
  return push(std::move(out), [ai = a.id](Tape& t, int self) {
    const auto y = t.value(Var{self}).array();
    t.grad_of(ai).array() += t.grad_ref(self).array() * (1.0 - y.square());
  });
}

Var Tape::batch_norm(Var x, const BatchNorm& bn, bool training, std::span<const unsigned char> active,
                     Eigen::Index slot) {
  const Matrix& xv = value(x);
  const Eigen::Index n = xv.cols();
  const Eigen::Index rows = xv.rows();
  if (bn.scale.value.cols() != n)
    throw ShapeError("batch_norm: input is " + shape(xv) + " but " + bn.scale.name + " is " + shape(bn.scale.value));
  if (!active.empty() && static_cast<Eigen::Index>(active.size()) != rows)
    throw ShapeError("batch_norm: mask of " + std::to_string(active.size()) + " rows for input " + shape(xv));
  const auto gamma = bn.scale.value.row(0).array();
  const auto beta = bn.shift.value.row(0).array();

  if (training && rows < 2)
    throw ShapeError("batch_norm: training mode needs at least 2 rows, got " + std::to_string(rows));
  Eigen::Index counted = rows;
  if (!active.empty()) {
    counted = std::count_if(active.begin(), active.end(), [](unsigned char a) { return a != 0; });
    if (counted < 2) {
      active = {};
      counted = rows;
    }
  }

  const Eigen::Index r = std::clamp<Eigen::Index>(slot, 0, bn.running_mean.rows() - 1);
  if (!training) {
    const RowVector inv = (bn.running_var.row(r).array() + bn.epsilon).rsqrt().matrix();
    Matrix xhat = (xv.rowwise() - bn.running_mean.row(r)).array().rowwise() * inv.array();
    Matrix out = (xhat.array().rowwise() * gamma).rowwise() + beta;
    return push(std::move(out), [xi = x.id, &bn, inv, xhat = std::move(xhat)](Tape& t, int self) {
      const Matrix& g = t.grad_ref(self);
      bn.scale.grad.row(0) += (g.array() * xhat.array()).colwise().sum().matrix();
      bn.shift.grad.row(0) += g.colwise().sum();
      t.grad_of(xi).array() += g.array().rowwise() * (bn.scale.value.row(0).array() * inv.array());
    });
  }

  // Column weights: 1 for rows in the statistics, 0 otherwise.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(rows);
  if (!active.empty())
    for (Eigen::Index i = 0; i < rows; ++i) w(i) = active[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const double b = static_cast<double>(counted);
  const RowVector mean = (w.transpose() * xv) / b;
  const Matrix centered = xv.rowwise() - mean;
  const RowVector var = (w.transpose() * centered.array().square().matrix()) / b;
  const RowVector inv = (var.array() + bn.epsilon).rsqrt().matrix();
  Matrix xhat = centered.array().rowwise() * inv.array();
  Matrix out = (xhat.array().rowwise() * gamma).rowwise() + beta;
  bn.running_mean.row(r) = bn.momentum * bn.running_mean.row(r) + (1.0 - bn.momentum) * mean;
  bn.running_var.row(r) = bn.momentum * bn.running_var.row(r) + (1.0 - bn.momentum) * var;
  return push(std::move(out), [xi = x.id, &bn, inv, b, w = std::move(w), xhat = std::move(xhat)](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    bn.scale.grad.row(0) += (g.array() * xhat.array()).colwise().sum().matrix();
    bn.shift.grad.row(0) += g.colwise().sum();
    const Matrix dxhat = g.array().rowwise() * bn.scale.value.row(0).array();
    const RowVector sum_d = dxhat.colwise().sum();
    const RowVector sum_dx = (dxhat.array() * xhat.array()).colwise().sum().matrix();
    // Rows outside the statistics only see their own scaling.
    Matrix stats = (xhat.array().rowwise() * sum_dx.array()).rowwise() + sum_d.array();
    stats.array().colwise() *= w.array();
    Matrix dx = b * dxhat - stats;
    dx.array().rowwise() *= (inv.array() / b);
    t.grad_of(xi) += dx;
  });
}

Var Tape::scatter_blocks(Var x, std::span<const int> out_row, std::span<const int> slot, Eigen::Index out_rows,
                         Eigen::Index slots) {
  const Matrix& xv = value(x);
  if (static_cast<Eigen::Index>(out_row.size()) != xv.rows() || out_row.size() != slot.size())
    throw ShapeError("scatter_blocks: " + std::to_string(out_row.size()) + " placements for input " + shape(xv));
  const Eigen::Index w = xv.cols();
  Matrix out = Matrix::Zero(out_rows, slots * w);
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const int r = out_row[static_cast<std::size_t>(i)];
    const int s = slot[static_cast<std::size_t>(i)];
    if (r < 0 || r >= out_rows || s < 0 || s >= slots)
      throw ShapeError("scatter_blocks: placement (" + std::to_string(r) + ", " + std::to_string(s) +
                       ") outside " + std::to_string(out_rows) + " rows x " + std::to_string(slots) + " slots");
    out.block(r, s * w, 1, w) = xv.row(i);
  }
  std::vector<int> rows(out_row.begin(), out_row.end()), slot_v(slot.begin(), slot.end());
  return push(std::move(out), [xi = x.id, w, rows = std::move(rows), slot_v = std::move(slot_v)](Tape& t, int self) {
    const Matrix& g = t.grad_ref(self);
    Matrix& gx = t.grad_of(xi);
    for (std::size_t i = 0; i < rows.size(); ++i)
      gx.row(static_cast<Eigen::Index>(i)) += g.block(rows[i], slot_v[i] * w, 1, w);
  });
}

Var Tape::masked_nll(Var logits, std::span<const int> targets, int masked, double weight) {
  const Matrix& lv = value(logits);
  if (static_cast<Eigen::Index>(targets.size()) != lv.rows())
    throw ShapeError("masked_nll: " + std::to_string(targets.size()) + " targets for logits " + shape(lv));
  Matrix logp = log_softmax_rows(lv, masked);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < lv.rows(); ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    if (y == masked) continue;
    if (y < 0 || y >= lv.cols()) throw DataError("masked_nll: target " + std::to_string(y) + " out of range");
    loss -= weight * logp(i, y);
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  std::vector<int> tg(targets.begin(), targets.end());
  return push(std::move(out), [li = logits.id, masked, weight, tg = std::move(tg), logp = std::move(logp)](Tape& t,
                                                                                                       int self) {
    const double g = t.grad_ref(self)(0, 0) * weight;
    Matrix& gl = t.grad_of(li);
    for (Eigen::Index i = 0; i < logp.rows(); ++i) {
      const int y = tg[static_cast<std::size_t>(i)];
      if (y == masked) continue;
      gl.row(i).array() += g * logp.row(i).array().exp();  // exp(-inf) = 0 at the masked column
      gl(i, y) -= g;
    }
  });
}

void Tape::backward(Var loss) {
  if (!record_) throw std::logic_error("backward on a tape that does not record");
  if (backward_done_) throw std::logic_error("backward already ran on this tape; record a new forward pass");
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) throw ShapeError("backward: loss is " + shape(lv) + ", expected 1x1");
  backward_done_ = true;
  grad_of(loss.id)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0 || !n.back) continue;
    auto back = std::move(n.back);  // each closure runs once
    back(*this, i);
  }
}

Matrix log_softmax_rows(const Matrix& logits, int masked) {
  Matrix out(logits.rows(), logits.cols());
  const double ninf = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = ninf;
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      if (j != masked) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      if (j != masked) z += std::exp(logits(i, j) - mx);
    const double lz = mx + std::log(z);
    for (Eigen::Index j = 0; j < logits.cols(); ++j) out(i, j) = j == masked ? ninf : logits(i, j) - lz;
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits, int masked) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      if (j != masked) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = j == masked ? 0.0 : std::exp(logits(i, j) - mx);
      z += out(i, j);
    }
    out.row(i) /= z;
  }
  return out;
}

}  // namespace triplesum::nn
