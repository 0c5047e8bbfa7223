#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <memory>
#include <utility>
#include <vector>

#include "lade/array.hpp"
#include "lade/blas.hpp"
#include "lade/errors.hpp"

namespace lade {

using ArrayPtr = std::shared_ptr<const DenseArray>;

// A value in the graph. `node < 0` means the value is not tracked (a constant,
// or any value produced while the tape is not recording).
struct Var {
  ArrayPtr value;
  int node = -1;

  const DenseArray& v() const {
    if (!value) throw ParameterError("Var: empty value");
    return *value;
  }
};

enum class OpKind : std::uint8_t {
  Leaf,
  Affine,
  CausalConv1d,
  LeakyRelu,
  Tanh,
  Sigmoid,
  Exp,
  Log,
  Identity,
  LogSoftmax,
  LogSumExp,
  Add,
  Sub,
  Mul,
  Div,
  Scale,
  AddScalar,
  ExpandLast,
  SumAll,
  RowwiseMul,
  SliceLast2,
  SwapLast2,
};

namespace detail {

// y = x * w + b with x [B x I], w [I x O], b [O].
inline DenseArray affine_fwd(const DenseArray& x, const DenseArray& w, const DenseArray& b) {
  require_rank(x, 2, "affine: input");
  require_rank(w, 2, "affine: weight");
  require_rank(b, 1, "affine: bias");
  const std::size_t B = x.dim(0), I = x.dim(1), O = w.dim(1);
  if (w.dim(0) != I || b.dim(0) != O)
    throw DimensionError("affine: got input " + shape_str(x.shape()) + ", weight " +
                         shape_str(w.shape()) + ", bias " + shape_str(b.shape()));
  DenseArray y({B, O});
  gemm_rm(false, false, B, O, I, 1.0, x.ptr(), I, w.ptr(), O, 0.0, y.ptr(), O);
  for (std::size_t r = 0; r < B; ++r) {
    double* row = y.ptr() + r * O;
    for (std::size_t o = 0; o < O; ++o) row[o] += b[o];
  }
  return y;
}

// Gathers the left-padded dilated input window into a [C*w x B*L] matrix so the
// convolution becomes one matrix product. Column (b*L + t), row (c*w + j) holds
// x[b, c, t - (w-1-j)*dilation], or 0 when that index is negative: filter tap
// w-1 reads the current position, tap 0 the oldest. Output position t therefore
// depends on input positions <= t only.
inline DenseArray im2col_causal(const DenseArray& x, std::size_t w, std::size_t dilation) {
  const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
  DenseArray cols({C * w, B * L});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t back = (w - 1 - j) * dilation;
      double* dst = cols.ptr() + (c * w + j) * (B * L);
      for (std::size_t b = 0; b < B; ++b) {
        const double* src = x.ptr() + (b * C + c) * L;
        double* d = dst + b * L;
        for (std::size_t t = 0; t < L; ++t) d[t] = (t >= back) ? src[t - back] : 0.0;
      }
    }
  }
  return cols;
}

inline DenseArray conv1d_fwd(const DenseArray& x, const DenseArray& f, const DenseArray& b,
                             std::size_t dilation) {
  require_rank(x, 3, "causal_conv1d: input");
  require_rank(f, 3, "causal_conv1d: filter");
  require_rank(b, 1, "causal_conv1d: bias");
  if (dilation == 0) throw ParameterError("causal_conv1d: dilation must be >= 1");
  const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
  const std::size_t Co = f.dim(0), w = f.dim(2);
  if (f.dim(1) != C || b.dim(0) != Co)
    throw DimensionError("causal_conv1d: got input " + shape_str(x.shape()) + ", filter " +
                         shape_str(f.shape()) + ", bias " + shape_str(b.shape()));
  if (w == 0) throw ParameterError("causal_conv1d: filter width must be >= 1");
  DenseArray cols = im2col_causal(x, w, dilation);
  DenseArray ymat({Co, B * L});
  gemm_rm(false, false, Co, B * L, C * w, 1.0, f.ptr(), C * w, cols.ptr(), B * L, 0.0, ymat.ptr(),
          B * L);
  DenseArray y({B, Co, L});
  for (std::size_t o = 0; o < Co; ++o) {
    const double* src = ymat.ptr() + o * (B * L);
    for (std::size_t bn = 0; bn < B; ++bn) {
      double* dst = y.ptr() + (bn * Co + o) * L;
      const double* s = src + bn * L;
      const double bias = b[o];
      for (std::size_t t = 0; t < L; ++t) dst[t] = s[t] + bias;
    }
  }
  return y;
}

inline void conv1d_bwd(const DenseArray& x, const DenseArray& f, std::size_t dilation,
                       const DenseArray& dy, DenseArray* dx, DenseArray* df, DenseArray* db) {
  const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
  const std::size_t Co = f.dim(0), w = f.dim(2);
  DenseArray dymat({Co, B * L});
  for (std::size_t o = 0; o < Co; ++o) {
    double* dst = dymat.ptr() + o * (B * L);
    for (std::size_t bn = 0; bn < B; ++bn) {
      const double* src = dy.ptr() + (bn * Co + o) * L;
      std::memcpy(dst + bn * L, src, L * sizeof(double));
    }
  }
  if (db) {
    for (std::size_t o = 0; o < Co; ++o) {
      const double* row = dymat.ptr() + o * (B * L);
      double acc = 0.0;
      for (std::size_t i = 0; i < B * L; ++i) acc += row[i];
      (*db)[o] += acc;
    }
  }
  if (df) {
    DenseArray cols = im2col_causal(x, w, dilation);
    gemm_rm(false, true, Co, C * w, B * L, 1.0, dymat.ptr(), B * L, cols.ptr(), B * L, 1.0,
            df->ptr(), C * w);
  }
  if (dx) {
    DenseArray dcols({C * w, B * L});
    gemm_rm(true, false, C * w, B * L, Co, 1.0, f.ptr(), C * w, dymat.ptr(), B * L, 0.0,
            dcols.ptr(), B * L);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t back = (w - 1 - j) * dilation;
        const double* src = dcols.ptr() + (c * w + j) * (B * L);
        for (std::size_t bn = 0; bn < B; ++bn) {
          double* dst = dx->ptr() + (bn * C + c) * L;
          const double* s = src + bn * L;
          for (std::size_t t = back; t < L; ++t) dst[t - back] += s[t];
        }
      }
    }
  }
}

inline DenseArray log_softmax_fwd(const DenseArray& x) {
  if (x.rank() == 0) throw DimensionError("log_softmax: rank-0 input");
  const std::size_t R = x.rows_flat(), K = x.last_dim();
  DenseArray y(x.shape());
  for (std::size_t r = 0; r < R; ++r) {
    const double* in = x.ptr() + r * K;
    double* out = y.ptr() + r * K;
    double mx = in[0];
    for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, in[k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(in[k] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t k = 0; k < K; ++k) out[k] = in[k] - lse;
  }
  return y;
}

inline DenseArray logsumexp_fwd(const DenseArray& x) {
  if (x.rank() == 0) throw DimensionError("logsumexp: rank-0 input");
  const std::size_t R = x.rows_flat(), K = x.last_dim();
  Shape out_shape(x.shape().begin(), x.shape().end() - 1);
  if (out_shape.empty()) out_shape = {1};
  DenseArray y(out_shape);
  for (std::size_t r = 0; r < R; ++r) {
    const double* in = x.ptr() + r * K;
    double mx = in[0];
    for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, in[k]);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(in[k] - mx);
    y[r] = mx + std::log(sum);
  }
  return y;
}

}  // namespace detail

// Define-by-run reverse-mode tape. Build a fresh graph per step; `backward`
// seeds the scalar loss with 1 and accumulates adjoints in reverse creation
// order (inputs always precede consumers, so that order is topological).
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  void set_debug_checks(bool on) { debug_checks_ = on; }
  std::size_t node_count() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    grads_.clear();
    has_grad_.clear();
  }

  Var leaf(DenseArray v) { return record(OpKind::Leaf, std::move(v), {}, {}, {}); }

  static Var constant(DenseArray v) {
    return Var{std::make_shared<const DenseArray>(std::move(v)), -1};
  }

  Var affine(const Var& x, const Var& w, const Var& b) {
    return record(OpKind::Affine, detail::affine_fwd(x.v(), w.v(), b.v()), x, w, b);
  }

  // Dilated causal 1-d convolution: x [B x C x L], f [C' x C x w], b [C'].
  // Left zero padding of (w-1)*dilation keeps position t blind to inputs > t.
  Var causal_conv1d(const Var& x, const Var& f, const Var& b, std::size_t dilation) {
    Var out = record(OpKind::CausalConv1d, detail::conv1d_fwd(x.v(), f.v(), b.v(), dilation), x, f,
                     b);
    if (out.node >= 0) nodes_[out.node].p0 = dilation;
    return out;
  }

  Var leaky_relu(const Var& x, double slope = 0.2) {
    DenseArray y(x.v().shape());
    const DenseArray& in = x.v();
    for (std::size_t i = 0; i < in.size(); ++i) y[i] = in[i] > 0.0 ? in[i] : slope * in[i];
    Var out = record(OpKind::LeakyRelu, std::move(y), x, {}, {});
    if (out.node >= 0) nodes_[out.node].a = slope;
    return out;
  }

  Var tanh_op(const Var& x) { return pointwise(OpKind::Tanh, x, [](double v) { return std::tanh(v); }); }
  Var sigmoid(const Var& x) {
    return pointwise(OpKind::Sigmoid, x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  Var exp_op(const Var& x) { return pointwise(OpKind::Exp, x, [](double v) { return std::exp(v); }); }
  Var log_op(const Var& x) { return pointwise(OpKind::Log, x, [](double v) { return std::log(v); }); }
  Var identity(const Var& x) { return pointwise(OpKind::Identity, x, [](double v) { return v; }); }

  // Normalizes along the last axis; leading axes are independent rows.
  Var log_softmax(const Var& x) {
    return record(OpKind::LogSoftmax, detail::log_softmax_fwd(x.v()), x, {}, {});
  }

  // Reduces the last axis; a rank-1 input yields shape [1].
  Var logsumexp(const Var& x) {
    return record(OpKind::LogSumExp, detail::logsumexp_fwd(x.v()), x, {}, {});
  }

  Var add(const Var& a, const Var& b) { return binary(OpKind::Add, a, b); }
  Var sub(const Var& a, const Var& b) { return binary(OpKind::Sub, a, b); }
  Var mul(const Var& a, const Var& b) { return binary(OpKind::Mul, a, b); }
  Var div(const Var& a, const Var& b) { return binary(OpKind::Div, a, b); }

  Var scale(const Var& x, double s) {
    DenseArray y(x.v().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.v()[i] * s;
    Var out = record(OpKind::Scale, std::move(y), x, {}, {});
    if (out.node >= 0) nodes_[out.node].a = s;
    return out;
  }

  Var add_scalar(const Var& x, double s) {
    DenseArray y(x.v().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.v()[i] + s;
    Var out = record(OpKind::AddScalar, std::move(y), x, {}, {});
    if (out.node >= 0) nodes_[out.node].a = s;
    return out;
  }

  // [d0 x ... x dn] -> [d0 x ... x dn x k], repeating each element k times.
  Var expand_last(const Var& x, std::size_t k) {
    if (k == 0) throw ParameterError("expand_last: k must be >= 1");
    Shape s = x.v().shape();
    s.push_back(k);
    DenseArray y(s);
    for (std::size_t i = 0; i < x.v().size(); ++i) {
      const double v = x.v()[i];
      double* dst = y.ptr() + i * k;
      for (std::size_t j = 0; j < k; ++j) dst[j] = v;
    }
    Var out = record(OpKind::ExpandLast, std::move(y), x, {}, {});
    if (out.node >= 0) nodes_[out.node].p0 = k;
    return out;
  }

  Var sum_all(const Var& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.v().size(); ++i) acc += x.v()[i];
    return record(OpKind::SumAll, DenseArray({1}, {acc}), x, {}, {});
  }

  // x [B x D] scaled per column by m [D].
  Var rowwise_mul(const Var& x, const Var& m) {
    require_rank(x.v(), 2, "rowwise_mul: input");
    require_rank(m.v(), 1, "rowwise_mul: mask");
    const std::size_t B = x.v().dim(0), D = x.v().dim(1);
    if (m.v().dim(0) != D)
      throw DimensionError("rowwise_mul: mask length " + std::to_string(m.v().dim(0)) +
                           " vs row width " + std::to_string(D));
    DenseArray y({B, D});
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t d = 0; d < D; ++d) y(r, d) = x.v()(r, d) * m.v()[d];
    return record(OpKind::RowwiseMul, std::move(y), x, m, {});
  }

  // Channel slice: x [B x C x L] -> [B x (c1-c0) x L].
  Var slice_channels(const Var& x, std::size_t c0, std::size_t c1) {
    require_rank(x.v(), 3, "slice_channels: input");
    const std::size_t B = x.v().dim(0), C = x.v().dim(1), L = x.v().dim(2);
    if (c0 >= c1 || c1 > C) throw ParameterError("slice_channels: bad range");
    DenseArray y({B, c1 - c0, L});
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = c0; c < c1; ++c)
        std::memcpy(y.ptr() + (b * (c1 - c0) + (c - c0)) * L, x.v().ptr() + (b * C + c) * L,
                    L * sizeof(double));
    Var out = record(OpKind::SliceLast2, std::move(y), x, {}, {});
    if (out.node >= 0) {
      nodes_[out.node].p0 = c0;
      nodes_[out.node].p1 = c1;
    }
    return out;
  }

  // [B x C x L] -> [B x L x C].
  Var swap_last2(const Var& x) {
    require_rank(x.v(), 3, "swap_last2: input");
    const std::size_t B = x.v().dim(0), C = x.v().dim(1), L = x.v().dim(2);
    DenseArray y({B, L, C});
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < L; ++t) y(b, t, c) = x.v()(b, c, t);
    return record(OpKind::SwapLast2, std::move(y), x, {}, {});
  }

  // Reverse sweep from a scalar loss node. Adjoint buffers are freshly zeroed
  // here, so repeated backward calls on the same tape do not mix.
  void backward(const Var& loss) {
    if (loss.node < 0) throw ParameterError("backward: loss is not a recorded node");
    if (loss.v().size() != 1) throw DimensionError("backward: loss must be scalar");
    grads_.assign(nodes_.size(), DenseArray());
    has_grad_.assign(nodes_.size(), 0);
    grad_buf(loss.node, loss.v().shape())[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (!has_grad_[i]) continue;
      propagate(static_cast<int>(i));
    }
  }

  // Accumulated adjoint of a node after backward; zeros if the loss never
  // reached it (an unused parameter has an exactly-zero gradient).
  const DenseArray& grad(const Var& v) {
    if (v.node < 0) throw ParameterError("grad: not a recorded node");
    if (static_cast<std::size_t>(v.node) >= nodes_.size())
      throw ParameterError("grad: node id out of range");
    if (has_grad_.size() != nodes_.size() || !has_grad_[v.node])
      return grad_buf(v.node, nodes_[v.node].out->shape());
    return grads_[v.node];
  }

 private:
  struct Node {
    OpKind kind;
    std::array<Var, 3> in;
    ArrayPtr out;
    double a = 0.0;
    std::size_t p0 = 0;
    std::size_t p1 = 0;
  };

  template <typename F>
  Var pointwise(OpKind kind, const Var& x, F&& f) {
    DenseArray y(x.v().shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x.v()[i]);
    return record(kind, std::move(y), x, {}, {});
  }

  Var binary(OpKind kind, const Var& a, const Var& b) {
    if (!a.v().same_shape(b.v()))
      throw DimensionError("elementwise op: shape mismatch " + shape_str(a.v().shape()) + " vs " +
                           shape_str(b.v().shape()));
    DenseArray y(a.v().shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
      switch (kind) {
        case OpKind::Add: y[i] = a.v()[i] + b.v()[i]; break;
        case OpKind::Sub: y[i] = a.v()[i] - b.v()[i]; break;
        case OpKind::Mul: y[i] = a.v()[i] * b.v()[i]; break;
        default: y[i] = a.v()[i] / b.v()[i]; break;
      }
    }
    return record(kind, std::move(y), a, b, {});
  }

  Var record(OpKind kind, DenseArray out, const Var& i0, const Var& i1, const Var& i2) {
    if (debug_checks_) require_finite(out, "tape op output");
    auto out_ptr = std::make_shared<const DenseArray>(std::move(out));
    if (!recording_) return Var{out_ptr, -1};
    Node n;
    n.kind = kind;
    n.in = {i0, i1, i2};
    n.out = out_ptr;
    nodes_.push_back(std::move(n));
    return Var{out_ptr, static_cast<int>(nodes_.size() - 1)};
  }

  DenseArray& grad_buf(int id, const Shape& shape) {
    if (grads_.size() != nodes_.size()) {
      grads_.assign(nodes_.size(), DenseArray());
      has_grad_.assign(nodes_.size(), 0);
    }
    if (!has_grad_[id]) {
      grads_[id] = DenseArray(shape);
      has_grad_[id] = 1;
    }
    return grads_[id];
  }

  DenseArray* input_grad(const Var& in) {
    if (in.node < 0) return nullptr;
    return &grad_buf(in.node, in.v().shape());
  }

  void propagate(int id) {
    Node& n = nodes_[id];
    const DenseArray& dy = grads_[id];
    switch (n.kind) {
      case OpKind::Leaf:
        break;
      case OpKind::Affine: {
        const DenseArray& x = n.in[0].v();
        const DenseArray& w = n.in[1].v();
        const std::size_t B = x.dim(0), I = x.dim(1), O = w.dim(1);
        if (DenseArray* dx = input_grad(n.in[0]))
          gemm_rm(false, true, B, I, O, 1.0, dy.ptr(), O, w.ptr(), O, 1.0, dx->ptr(), I);
        if (DenseArray* dw = input_grad(n.in[1]))
          gemm_rm(true, false, I, O, B, 1.0, x.ptr(), I, dy.ptr(), O, 1.0, dw->ptr(), O);
        if (DenseArray* db = input_grad(n.in[2]))
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t o = 0; o < O; ++o) (*db)[o] += dy(r, o);
        break;
      }
      case OpKind::CausalConv1d:
        detail::conv1d_bwd(n.in[0].v(), n.in[1].v(), n.p0, dy, input_grad(n.in[0]),
                           input_grad(n.in[1]), input_grad(n.in[2]));
        break;
      case OpKind::LeakyRelu: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const DenseArray& x = n.in[0].v();
          for (std::size_t i = 0; i < dy.size(); ++i)
            (*dx)[i] += dy[i] * (x[i] > 0.0 ? 1.0 : n.a);
        }
        break;
      }
      case OpKind::Tanh: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) {
            const double t = (*n.out)[i];
            (*dx)[i] += dy[i] * (1.0 - t * t);
          }
        break;
      }
      case OpKind::Sigmoid: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) {
            const double s = (*n.out)[i];
            (*dx)[i] += dy[i] * s * (1.0 - s);
          }
        break;
      }
      case OpKind::Exp: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] += dy[i] * (*n.out)[i];
        break;
      }
      case OpKind::Log: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] += dy[i] / n.in[0].v()[i];
        break;
      }
      case OpKind::Identity: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] += dy[i];
        break;
      }
      case OpKind::LogSoftmax: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const std::size_t R = n.out->rows_flat(), K = n.out->last_dim();
          for (std::size_t r = 0; r < R; ++r) {
            const double* y = n.out->ptr() + r * K;
            const double* g = dy.ptr() + r * K;
            double* d = dx->ptr() + r * K;
            double gsum = 0.0;
            for (std::size_t k = 0; k < K; ++k) gsum += g[k];
            for (std::size_t k = 0; k < K; ++k) d[k] += g[k] - std::exp(y[k]) * gsum;
          }
        }
        break;
      }
      case OpKind::LogSumExp: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const std::size_t K = n.in[0].v().last_dim();
          const std::size_t R = n.in[0].v().rows_flat();
          for (std::size_t r = 0; r < R; ++r) {
            const double* x = n.in[0].v().ptr() + r * K;
            const double lse = (*n.out)[r];
            const double g = dy[r];
            double* d = dx->ptr() + r * K;
            for (std::size_t k = 0; k < K; ++k) d[k] += g * std::exp(x[k] - lse);
          }
        }
        break;
      }
      case OpKind::Add: {
        if (DenseArray* da = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i];
        if (DenseArray* db = input_grad(n.in[1]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*db)[i] += dy[i];
        break;
      }
      case OpKind::Sub: {
        if (DenseArray* da = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i];
        if (DenseArray* db = input_grad(n.in[1]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*db)[i] -= dy[i];
        break;
      }
      case OpKind::Mul: {
        if (DenseArray* da = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] * n.in[1].v()[i];
        if (DenseArray* db = input_grad(n.in[1]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*db)[i] += dy[i] * n.in[0].v()[i];
        break;
      }
      case OpKind::Div: {
        if (DenseArray* da = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] / n.in[1].v()[i];
        if (DenseArray* db = input_grad(n.in[1]))
          for (std::size_t i = 0; i < dy.size(); ++i) {
            const double bv = n.in[1].v()[i];
            (*db)[i] -= dy[i] * n.in[0].v()[i] / (bv * bv);
          }
        break;
      }
      case OpKind::Scale: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] += dy[i] * n.a;
        break;
      }
      case OpKind::AddScalar: {
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[i] += dy[i];
        break;
      }
      case OpKind::ExpandLast: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const std::size_t k = n.p0;
          for (std::size_t i = 0; i < dx->size(); ++i) {
            const double* g = dy.ptr() + i * k;
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += g[j];
            (*dx)[i] += acc;
          }
        }
        break;
      }
      case OpKind::SumAll: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const double g = dy[0];
          for (std::size_t i = 0; i < dx->size(); ++i) (*dx)[i] += g;
        }
        break;
      }
      case OpKind::RowwiseMul: {
        const DenseArray& x = n.in[0].v();
        const DenseArray& m = n.in[1].v();
        const std::size_t B = x.dim(0), D = x.dim(1);
        if (DenseArray* dx = input_grad(n.in[0]))
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t d = 0; d < D; ++d) (*dx)(r, d) += dy(r, d) * m[d];
        if (DenseArray* dm = input_grad(n.in[1]))
          for (std::size_t r = 0; r < B; ++r)
            for (std::size_t d = 0; d < D; ++d) (*dm)[d] += dy(r, d) * x(r, d);
        break;
      }
      case OpKind::SliceLast2: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const std::size_t B = n.in[0].v().dim(0), C = n.in[0].v().dim(1),
                            L = n.in[0].v().dim(2);
          const std::size_t c0 = n.p0, c1 = n.p1;
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = c0; c < c1; ++c) {
              double* d = dx->ptr() + (b * C + c) * L;
              const double* g = dy.ptr() + (b * (c1 - c0) + (c - c0)) * L;
              for (std::size_t t = 0; t < L; ++t) d[t] += g[t];
            }
        }
        break;
      }
      case OpKind::SwapLast2: {
        if (DenseArray* dx = input_grad(n.in[0])) {
          const std::size_t B = n.in[0].v().dim(0), C = n.in[0].v().dim(1),
                            L = n.in[0].v().dim(2);
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c)
              for (std::size_t t = 0; t < L; ++t) (*dx)(b, c, t) += dy(b, t, c);
        }
        break;
      }
    }
  }

  bool recording_;
  bool debug_checks_ = false;
  std::vector<Node> nodes_;
  std::vector<DenseArray> grads_;
  std::vector<char> has_grad_;
};

}  // namespace lade
