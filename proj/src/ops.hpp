#pragma once

#include <span>
#include <vector>

#include "tensor.hpp"

namespace abslab {
namespace ops {

// Elementwise; shapes must agree exactly.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor div(Tape& tape, const Tensor& a, const Tensor& b);

// y = k * x + c with constant k, c.
Tensor affine_const(Tape& tape, const Tensor& x, double k, double c);

// Scalar second operand (rank-0 tensor).
Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s);
Tensor div_by(Tape& tape, const Tensor& x, const Tensor& s);

// Matrix product (m x k) * (k x n) -> (m x n).
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// y = A x  (m x k, k) -> m
Tensor matvec(Tape& tape, const Tensor& a, const Tensor& x);
// y = A^T x  (m x k, m) -> k
Tensor matvec_t(Tape& tape, const Tensor& a, const Tensor& x);

Tensor dot(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sum(Tape& tape, const Tensor& x);

// Vector plumbing.
Tensor concat(Tape& tape, std::span<const Tensor> parts);
Tensor slice(Tape& tape, const Tensor& x, std::size_t offset, std::size_t len);
Tensor pick(Tape& tape, const Tensor& x, std::size_t index);
Tensor sum_select(Tape& tape, const Tensor& x, const std::vector<std::size_t>& indices);
Tensor stack_scalars(Tape& tape, std::span<const Tensor> scalars);
Tensor stack_rows(Tape& tape, std::span<const Tensor> rows);
// Gathers rows of a (v x d) table; adjoints scatter-add back into the table.
Tensor gather_rows(Tape& tape, const Tensor& table, const std::vector<int>& ids);
Tensor row(Tape& tape, const Tensor& table, std::size_t r);

// Nonlinearities.
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor relu(Tape& tape, const Tensor& x);
Tensor exp(Tape& tape, const Tensor& x);
// log(max(x, floor)); keeps losses finite under early-training saturation.
Tensor log_floor(Tape& tape, const Tensor& x, double floor = 1e-12);

// Max-subtracted softmax over a vector.
Tensor softmax(Tape& tape, const Tensor& x);

}  // namespace ops

// LSTM cell parameters with packed gate order [input; forget; output; candidate].
struct LstmParams {
  Tensor w_x;  // 4H x X
  Tensor w_h;  // 4H x H
  Tensor b;    // 4H
  std::size_t hidden() const { return b.size() / 4; }
};

struct LstmState {
  Tensor h;
  Tensor c;
};

// Standard LSTM gate equations; gradients flow to the input, previous state
// and all parameters. An optional mask replaces w_h (weight-dropped variant).
LstmState lstm_cell(Tape& tape, const Tensor& x, const LstmState& prev, const LstmParams& params);
LstmState lstm_cell_masked(Tape& tape, const Tensor& x, const LstmState& prev,
                           const LstmParams& params, const Tensor& w_h_mask);

}  // namespace abslab
