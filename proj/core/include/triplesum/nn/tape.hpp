#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace triplesum::nn {

// Rows index the batch.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct Parameter {
  std::string name;
  Matrix value;
  mutable Matrix grad;
  Matrix accumulator;  // RMSProp running mean of squared gradients

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        accumulator(Matrix::Zero(rows, cols)) {}

  void zero_grad() const { grad.setZero(value.rows(), value.cols()); }
};

// Running statistics hold one row per slot; recurrent layers use the time
// step as slot, and steps past the last row share it.
struct BatchNorm {
  Parameter scale;  // 1 x n
  Parameter shift;  // 1 x n
  mutable Matrix running_mean;  // slots x n
  mutable Matrix running_var;   // slots x n
  double momentum = 0.9;
  double epsilon = 1e-5;

  BatchNorm() = default;
  BatchNorm(const std::string& name, Eigen::Index width, Eigen::Index slots = 1);
};

// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

// Reverse-mode recorder. Every op evaluates eagerly and, when recording,
// remembers how to push gradients back to its inputs. Parameter gradients
// accumulate into Parameter::grad.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  const Matrix& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Matrix m);
  // Selected rows of `table`, plus `bias` broadcast when given.
  Var lookup(const Parameter& table, std::span<const int> rows, const Parameter* bias = nullptr);
  // x W^T (+ b). W is [out x in]; x is [batch x in].
  Var affine(Var x, const Parameter& w, const Parameter* b = nullptr);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var one_minus(Var a);
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, Eigen::Index start, Eigen::Index width);

  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);

  // Training mode normalizes with batch statistics (biased variance) and
  // folds them into the running statistics; needs at least 2 rows. With a
  // non-empty `active` mask only rows flagged non-zero enter the statistics,
  // unless fewer than 2 are flagged, in which case all rows do.
  Var batch_norm(Var x, const BatchNorm& bn, bool training, std::span<const unsigned char> active = {},
                 Eigen::Index slot = 0);

  // Output row slot_row[i] receives input row i in column block slot[i]
  // (width = input cols). Unfilled blocks stay zero.
  Var scatter_blocks(Var x, std::span<const int> out_row, std::span<const int> slot, Eigen::Index out_rows,
                     Eigen::Index slots);

  // Sum over rows of -log softmax(logits)[target] * weight. The `masked`
  // column is excluded from the softmax; rows whose target equals `masked`
  // contribute nothing. Result is 1 x 1.
  Var masked_nll(Var logits, std::span<const int> targets, int masked, double weight);

  // Requires a 1 x 1 loss. A second call on the same tape throws.
  void backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&, int)> back;
  };

  Var push(Matrix value, std::function<void(Tape&, int)> back);
  Matrix& grad_of(int id);
  const Matrix& grad_ref(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  bool record_;
  bool backward_done_ = false;
  std::vector<Node> nodes_;
};

// Row-wise log-softmax with column `masked` forced to -infinity.
Matrix log_softmax_rows(const Matrix& logits, int masked = -1);
// Row-wise softmax with column `masked` forced to 0.
Matrix softmax_rows(const Matrix& logits, int masked = -1);

}  // namespace triplesum::nn
