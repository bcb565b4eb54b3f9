#include "ops.hpp"

#include <algorithm>
#include <cmath>

namespace abslab {
namespace ops {
namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

bool track(const Tape& tape, const Tensor& a) {
  return tape.recording() && a.requires_grad();
}

bool track(const Tape& tape, const Tensor& a, const Tensor& b) {
  return tape.recording() && (a.requires_grad() || b.requires_grad());
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape(), track(tape, a, b));
  for (std::size_t i = 0; i < a.size(); ++i) out.value()[i] = a[i] + b[i];
  if (out.requires_grad()) {
    tape.record([a, b, out]() {
      const auto& g = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] += g[i];
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape(), track(tape, a, b));
  for (std::size_t i = 0; i < a.size(); ++i) out.value()[i] = a[i] * b[i];
  if (out.requires_grad()) {
    tape.record([a, b, out]() {
      const auto& g = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += b[i] * g[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) b.grad()[i] += a[i] * g[i];
    });
  }
  return out;
}

Tensor div(Tape& tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "div");
  Tensor out = Tensor::zeros(a.shape(), track(tape, a, b));
  for (std::size_t i = 0; i < a.size(); ++i) out.value()[i] = a[i] / b[i];
  if (out.requires_grad()) {
    tape.record([a, b, out]() {
      const auto& g = out.grad();
      if (a.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) a.grad()[i] += g[i] / b[i];
      if (b.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i)
          b.grad()[i] += -a[i] / (b[i] * b[i]) * g[i];
    });
  }
  return out;
}

Tensor affine_const(Tape& tape, const Tensor& x, double k, double c) {
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = k * x[i] + c;
  if (out.requires_grad()) {
    tape.record([x, out, k]() {
      for (std::size_t i = 0; i < x.size(); ++i) x.grad()[i] += k * out.grad()[i];
    });
  }
  return out;
}

Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s) {
  const double sv = s.scalar_value();
  Tensor out = Tensor::zeros(x.shape(), track(tape, x, s));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = x[i] * sv;
  if (out.requires_grad()) {
    tape.record([x, s, out, sv]() {
      const auto& g = out.grad();
      if (x.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] += sv * g[i];
      if (s.requires_grad()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += x[i] * g[i];
        s.grad()[0] += acc;
      }
    });
  }
  return out;
}

Tensor div_by(Tape& tape, const Tensor& x, const Tensor& s) {
  const double sv = s.scalar_value();
  Tensor out = Tensor::zeros(x.shape(), track(tape, x, s));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = x[i] / sv;
  if (out.requires_grad()) {
    tape.record([x, s, out, sv]() {
      const auto& g = out.grad();
      if (x.requires_grad())
        for (std::size_t i = 0; i < g.size(); ++i) x.grad()[i] += g[i] / sv;
      if (s.requires_grad()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += x[i] * g[i];
        s.grad()[0] += -acc / (sv * sv);
      }
    });
  }
  return out;
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::zeros({m, n}, track(tape, a, b));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.value()[i * k + p];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        out.value()[i * n + j] += av * b.value()[p * n + j];
    }
  if (out.requires_grad()) {
    tape.record([a, b, out, m, k, n]() {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * b.value()[p * n + j];
            a.grad()[i * k + p] += acc;
          }
      }
      if (b.requires_grad()) {
        for (std::size_t p = 0; p < k; ++p)
          for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += a.value()[i * k + p] * g[i * n + j];
            b.grad()[p * n + j] += acc;
          }
      }
    });
  }
  return out;
}

Tensor matvec(Tape& tape, const Tensor& a, const Tensor& x) {
  if (a.shape().size() != 2 || x.shape().size() != 1 || a.cols() != x.size()) {
    throw DimensionError("matvec: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(x.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols();
  Tensor out = Tensor::zeros({m}, track(tape, a, x));
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += a.value()[i * k + j] * x[j];
    out.value()[i] = acc;
  }
  if (out.requires_grad()) {
    tape.record([a, x, out, m, k]() {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < k; ++j) a.grad()[i * k + j] += g[i] * x[j];
      }
      if (x.requires_grad()) {
        for (std::size_t j = 0; j < k; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += a.value()[i * k + j] * g[i];
          x.grad()[j] += acc;
        }
      }
    });
  }
  return out;
}

Tensor matvec_t(Tape& tape, const Tensor& a, const Tensor& x) {
  if (a.shape().size() != 2 || x.shape().size() != 1 || a.rows() != x.size()) {
    throw DimensionError("matvec_t: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(x.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols();
  Tensor out = Tensor::zeros({k}, track(tape, a, x));
  for (std::size_t i = 0; i < m; ++i) {
    const double xv = x[i];
    if (xv == 0.0) continue;
    for (std::size_t j = 0; j < k; ++j) out.value()[j] += a.value()[i * k + j] * xv;
  }
  if (out.requires_grad()) {
    tape.record([a, x, out, m, k]() {
      const auto& g = out.grad();
      if (a.requires_grad()) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < k; ++j) a.grad()[i * k + j] += x[i] * g[j];
      }
      if (x.requires_grad()) {
        for (std::size_t i = 0; i < m; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < k; ++j) acc += a.value()[i * k + j] * g[j];
          x.grad()[i] += acc;
        }
      }
    });
  }
  return out;
}

Tensor dot(Tape& tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  Tensor out = Tensor::zeros({}, track(tape, a, b));
  out.value()[0] = acc;
  if (out.requires_grad()) {
    tape.record([a, b, out]() {
      const double g = out.grad()[0];
      if (a.requires_grad())
        for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += b[i] * g;
      if (b.requires_grad())
        for (std::size_t i = 0; i < b.size(); ++i) b.grad()[i] += a[i] * g;
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
  Tensor out = Tensor::zeros({}, track(tape, x));
  out.value()[0] = acc;
  if (out.requires_grad()) {
    tape.record([x, out]() {
      const double g = out.grad()[0];
      for (std::size_t i = 0; i < x.size(); ++i) x.grad()[i] += g;
    });
  }
  return out;
}

Tensor concat(Tape& tape, std::span<const Tensor> parts) {
  std::size_t total = 0;
  bool needs = false;
  for (const Tensor& p : parts) {
    if (p.shape().size() != 1) throw DimensionError("concat: expects vectors");
    total += p.size();
    needs = needs || p.requires_grad();
  }
  Tensor out = Tensor::zeros({total}, tape.recording() && needs);
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    std::copy(p.value().begin(), p.value().end(), out.value().begin() + off);
    off += p.size();
  }
  if (out.requires_grad()) {
    std::vector<Tensor> held(parts.begin(), parts.end());
    tape.record([held, out]() {
      std::size_t off2 = 0;
      for (const Tensor& p : held) {
        if (p.requires_grad())
          for (std::size_t i = 0; i < p.size(); ++i) p.grad()[i] += out.grad()[off2 + i];
        off2 += p.size();
      }
    });
  }
  return out;
}

Tensor slice(Tape& tape, const Tensor& x, std::size_t offset, std::size_t len) {
  if (x.shape().size() != 1 || offset + len > x.size()) {
    throw DimensionError("slice: [" + std::to_string(offset) + ", " +
                         std::to_string(offset + len) + ") out of range for " +
                         shape_str(x.shape()));
  }
  Tensor out = Tensor::zeros({len}, track(tape, x));
  for (std::size_t i = 0; i < len; ++i) out.value()[i] = x[offset + i];
  if (out.requires_grad()) {
    tape.record([x, out, offset, len]() {
      for (std::size_t i = 0; i < len; ++i) x.grad()[offset + i] += out.grad()[i];
    });
  }
  return out;
}

Tensor pick(Tape& tape, const Tensor& x, std::size_t index) {
  if (index >= x.size()) {
    throw DimensionError("pick: index " + std::to_string(index) + " out of range for " +
                         shape_str(x.shape()));
  }
  Tensor out = Tensor::zeros({}, track(tape, x));
  out.value()[0] = x[index];
  if (out.requires_grad()) {
    tape.record([x, out, index]() { x.grad()[index] += out.grad()[0]; });
  }
  return out;
}

Tensor sum_select(Tape& tape, const Tensor& x, const std::vector<std::size_t>& indices) {
  double acc = 0.0;
  for (std::size_t i : indices) {
    if (i >= x.size()) throw DimensionError("sum_select: index out of range");
    acc += x[i];
  }
  Tensor out = Tensor::zeros({}, track(tape, x));
  out.value()[0] = acc;
  if (out.requires_grad()) {
    tape.record([x, out, indices]() {
      for (std::size_t i : indices) x.grad()[i] += out.grad()[0];
    });
  }
  return out;
}

Tensor stack_scalars(Tape& tape, std::span<const Tensor> scalars) {
  bool needs = false;
  for (const Tensor& s : scalars) {
    if (s.size() != 1) throw DimensionError("stack_scalars: expects scalars");
    needs = needs || s.requires_grad();
  }
  Tensor out = Tensor::zeros({scalars.size()}, tape.recording() && needs);
  for (std::size_t i = 0; i < scalars.size(); ++i) out.value()[i] = scalars[i][0];
  if (out.requires_grad()) {
    std::vector<Tensor> held(scalars.begin(), scalars.end());
    tape.record([held, out]() {
      for (std::size_t i = 0; i < held.size(); ++i)
        if (held[i].requires_grad()) held[i].grad()[0] += out.grad()[i];
    });
  }
  return out;
}

Tensor stack_rows(Tape& tape, std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: empty input");
  const std::size_t d = rows[0].size();
  bool needs = false;
  for (const Tensor& r : rows) {
    if (r.shape().size() != 1 || r.size() != d)
      throw DimensionError("stack_rows: rows must be equal-length vectors");
    needs = needs || r.requires_grad();
  }
  Tensor out = Tensor::zeros({rows.size(), d}, tape.recording() && needs);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].value().begin(), rows[i].value().end(), out.value().begin() + i * d);
  if (out.requires_grad()) {
    std::vector<Tensor> held(rows.begin(), rows.end());
    tape.record([held, out, d]() {
      for (std::size_t i = 0; i < held.size(); ++i)
        if (held[i].requires_grad())
          for (std::size_t j = 0; j < d; ++j) held[i].grad()[j] += out.grad()[i * d + j];
    });
  }
  return out;
}

Tensor gather_rows(Tape& tape, const Tensor& table, const std::vector<int>& ids) {
  if (table.shape().size() != 2) throw DimensionError("gather_rows: table must be a matrix");
  const std::size_t d = table.cols();
  Tensor out = Tensor::zeros({ids.size(), d}, track(tape, table));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows())
      throw DimensionError("gather_rows: id " + std::to_string(id) + " out of range");
    for (std::size_t j = 0; j < d; ++j)
      out.value()[i * d + j] = table.value()[static_cast<std::size_t>(id) * d + j];
  }
  if (out.requires_grad()) {
    tape.record([table, out, ids, d]() {
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
          table.grad()[static_cast<std::size_t>(ids[i]) * d + j] += out.grad()[i * d + j];
    });
  }
  return out;
}

Tensor row(Tape& tape, const Tensor& table, std::size_t r) {
  if (table.shape().size() != 2 || r >= table.rows())
    throw DimensionError("row: index " + std::to_string(r) + " out of range for " +
                         shape_str(table.shape()));
  const std::size_t d = table.cols();
  Tensor out = Tensor::zeros({d}, track(tape, table));
  for (std::size_t j = 0; j < d; ++j) out.value()[j] = table.value()[r * d + j];
  if (out.requires_grad()) {
    tape.record([table, out, r, d]() {
      for (std::size_t j = 0; j < d; ++j) table.grad()[r * d + j] += out.grad()[j];
    });
  }
  return out;
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor sigmoid(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = stable_sigmoid(x[i]);
  if (out.requires_grad()) {
    tape.record([x, out]() {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = out[i];
        x.grad()[i] += y * (1.0 - y) * out.grad()[i];
      }
    });
  }
  return out;
}

Tensor tanh(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = std::tanh(x[i]);
  if (out.requires_grad()) {
    tape.record([x, out]() {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = out[i];
        x.grad()[i] += (1.0 - y * y) * out.grad()[i];
      }
    });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = x[i] > 0.0 ? x[i] : 0.0;
  if (out.requires_grad()) {
    tape.record([x, out]() {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) x.grad()[i] += out.grad()[i];
    });
  }
  return out;
}

Tensor exp(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = std::exp(x[i]);
  if (out.requires_grad()) {
    tape.record([x, out]() {
      for (std::size_t i = 0; i < x.size(); ++i) x.grad()[i] += out[i] * out.grad()[i];
    });
  }
  return out;
}

Tensor log_floor(Tape& tape, const Tensor& x, double floor) {
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = std::log(std::max(x[i], floor));
  if (out.requires_grad()) {
    tape.record([x, out, floor]() {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] >= floor) x.grad()[i] += out.grad()[i] / x[i];
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& x) {
  if (x.shape().size() != 1 || x.size() == 0)
    throw DimensionError("softmax: expects a non-empty vector, got " + shape_str(x.shape()));
  double mx = x[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw NumericError("softmax: non-finite input");
    mx = std::max(mx, x[i]);
  }
  Tensor out = Tensor::zeros(x.shape(), track(tape, x));
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.value()[i] = std::exp(x[i] - mx);
    total += out.value()[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] /= total;
  if (out.requires_grad()) {
    tape.record([x, out]() {
      double inner = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) inner += out[i] * out.grad()[i];
      for (std::size_t i = 0; i < x.size(); ++i)
        x.grad()[i] += out[i] * (out.grad()[i] - inner);
    });
  }
  return out;
}

}  // namespace ops

namespace {

using ops::add;
using ops::matvec;
using ops::mul;
using ops::slice;

LstmState lstm_cell_impl(Tape& tape, const Tensor& x, const LstmState& prev,
                         const LstmParams& params, const Tensor* w_h_mask) {
  const std::size_t hidden = params.hidden();
  if (params.w_x.rows() != 4 * hidden || params.w_h.rows() != 4 * hidden ||
      params.w_h.cols() != hidden || params.w_x.cols() != x.size() ||
      prev.h.size() != hidden || prev.c.size() != hidden) {
    throw DimensionError("lstm_cell: inconsistent dimensions, x " + shape_str(x.shape()) +
                         ", h " + shape_str(prev.h.shape()) + ", w_x " +
                         shape_str(params.w_x.shape()) + ", w_h " +
                         shape_str(params.w_h.shape()));
  }
  Tensor w_h = params.w_h;
  if (w_h_mask != nullptr) w_h = mul(tape, params.w_h, *w_h_mask);
  Tensor pre = add(tape, add(tape, matvec(tape, params.w_x, x), matvec(tape, w_h, prev.h)),
                   params.b);
  Tensor gate_i = ops::sigmoid(tape, slice(tape, pre, 0, hidden));
  Tensor gate_f = ops::sigmoid(tape, slice(tape, pre, hidden, hidden));
  Tensor gate_o = ops::sigmoid(tape, slice(tape, pre, 2 * hidden, hidden));
  Tensor cand = ops::tanh(tape, slice(tape, pre, 3 * hidden, hidden));
  Tensor c = add(tape, mul(tape, gate_f, prev.c), mul(tape, gate_i, cand));
  Tensor h = mul(tape, gate_o, ops::tanh(tape, c));
  return {h, c};
}

}  // namespace

LstmState lstm_cell(Tape& tape, const Tensor& x, const LstmState& prev,
                    const LstmParams& params) {
  return lstm_cell_impl(tape, x, prev, params, nullptr);
}

LstmState lstm_cell_masked(Tape& tape, const Tensor& x, const LstmState& prev,
                           const LstmParams& params, const Tensor& w_h_mask) {
  return lstm_cell_impl(tape, x, prev, params, &w_h_mask);
}

}  // namespace abslab
