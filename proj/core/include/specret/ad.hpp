#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "specret/common.hpp"

namespace specret::ad {

template <class S>
using Mx = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

/// Handle to a node on a Tape.
struct NodeId {
  int v = -1;
  bool valid() const { return v >= 0; }
};

/// Reverse-mode tape over dense matrices.
///
/// Forward calls append nodes; backward() replays the recorded adjoint
/// closures in reverse order. Matrices are the unit of recording, so a full
/// model evaluation stays at a few hundred nodes. The tape is single-use:
/// build, run backward once, discard.
template <class S>
class Tape {
 public:
  // ----- node creation -----

  /// Differentiable leaf holding its own value (inputs under test).
  NodeId leaf(Mx<S> value) { return push(std::move(value), nullptr, true, {}); }

  /// Differentiable leaf borrowing a parameter matrix owned by the caller.
  /// The pointee must outlive the tape.
  NodeId leaf_ref(const Mx<S>* value) {
    return push(Mx<S>(), value, true, {});
  }

  /// Non-differentiable data (inputs, targets, precomputed curves).
  NodeId constant(Mx<S> value) { return push(std::move(value), nullptr, false, {}); }

  /// Non-differentiable leaf borrowing caller-owned storage (value-only
  /// evaluation of parameters). The pointee must outlive the tape.
  NodeId constant_ref(const Mx<S>* value) { return push(Mx<S>(), value, false, {}); }

  NodeId constant_scalar(S v) {
    Mx<S> m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
  }

  // ----- access -----

  const Mx<S>& val(NodeId id) const {
    const Node& n = node(id);
    return n.ref != nullptr ? *n.ref : n.value;
  }

  S scalar(NodeId id) const {
    const Mx<S>& v = val(id);
    if (v.rows() != 1 || v.cols() != 1) throw ShapeError("Tape::scalar: node is not 1x1");
    return v(0, 0);
  }

  /// Gradient of the last backward() seed with respect to node `id`.
  const Mx<S>& grad_of(NodeId id) {
    Node& n = node(id);
    ensure_grad(n);
    return n.grad;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  // ----- binary ops -----

  NodeId matmul(NodeId a, NodeId b) {
    const Mx<S>& av = val(a);
    const Mx<S>& bv = val(b);
    if (av.cols() != bv.rows()) throw ShapeError("Tape::matmul: inner dimensions differ");
    NodeId out = push(av * bv, nullptr, needs(a) || needs(b), {});
    record(out, [this, a, b, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(a)) acc(a, g * val(b).transpose());
      if (needs(b)) acc(b, val(a).transpose() * g);
    });
    return out;
  }

  /// y = A x with a fixed matrix A (no gradient into A).
  NodeId matmul_const(Mx<S> a, NodeId x) {
    const Mx<S>& xv = val(x);
    if (a.cols() != xv.rows()) throw ShapeError("Tape::matmul_const: inner dimensions differ");
    NodeId out = push(a * xv, nullptr, needs(x), {});
    record(out, [this, a = std::move(a), x, out]() {
      if (needs(x)) acc(x, a.transpose() * node(out).grad);
    });
    return out;
  }

  NodeId add(NodeId a, NodeId b) {
    check_same_shape(a, b, "add");
    NodeId out = push(val(a) + val(b), nullptr, needs(a) || needs(b), {});
    record(out, [this, a, b, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(a)) acc(a, g);
      if (needs(b)) acc(b, g);
    });
    return out;
  }

  /// x + b with b a column vector added to every column of x (bias add).
  NodeId add_col_broadcast(NodeId x, NodeId b) {
    const Mx<S>& xv = val(x);
    const Mx<S>& bv = val(b);
    if (bv.cols() != 1 || bv.rows() != xv.rows())
      throw ShapeError("Tape::add_col_broadcast: bias must be rows(x) x 1");
    NodeId out = push(xv.colwise() + bv.col(0), nullptr, needs(x) || needs(b), {});
    record(out, [this, x, b, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(x)) acc(x, g);
      if (needs(b)) acc(b, g.rowwise().sum());
    });
    return out;
  }

  NodeId sub(NodeId a, NodeId b) {
    check_same_shape(a, b, "sub");
    NodeId out = push(val(a) - val(b), nullptr, needs(a) || needs(b), {});
    record(out, [this, a, b, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(a)) acc(a, g);
      if (needs(b)) acc(b, -g);
    });
    return out;
  }

  NodeId cmul(NodeId a, NodeId b) {
    check_same_shape(a, b, "cmul");
    NodeId out = push(val(a).cwiseProduct(val(b)), nullptr, needs(a) || needs(b), {});
    record(out, [this, a, b, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(a)) acc(a, g.cwiseProduct(val(b)));
      if (needs(b)) acc(b, g.cwiseProduct(val(a)));
    });
    return out;
  }

  NodeId cdiv(NodeId a, NodeId b) {
    check_same_shape(a, b, "cdiv");
    NodeId out = push(val(a).cwiseQuotient(val(b)), nullptr, needs(a) || needs(b), {});
    record(out, [this, a, b, out]() {
      const Mx<S>& g = node(out).grad;
      const Mx<S>& bv = val(b);
      if (needs(a)) acc(a, g.cwiseQuotient(bv));
      if (needs(b)) acc(b, -g.cwiseProduct(val(out)).cwiseQuotient(bv));
    });
    return out;
  }

  NodeId scale(NodeId a, S c) {
    NodeId out = push(val(a) * c, nullptr, needs(a), {});
    record(out, [this, a, c, out]() {
      if (needs(a)) acc(a, node(out).grad * c);
    });
    return out;
  }

  NodeId add_const(NodeId a, S c) {
    NodeId out = push(val(a).array() + c, nullptr, needs(a), {});
    record(out, [this, a, out]() {
      if (needs(a)) acc(a, node(out).grad);
    });
    return out;
  }

  /// y = s * x with a 1x1 node s (broadcast scalar multiply).
  NodeId mul_scalar_node(NodeId x, NodeId s) {
    const S sv = scalar(s);
    NodeId out = push(val(x) * sv, nullptr, needs(x) || needs(s), {});
    record(out, [this, x, s, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(x)) acc(x, g * scalar(s));
      if (needs(s)) acc_scalar(s, g.cwiseProduct(val(x)).sum());
    });
    return out;
  }

  /// y = x + s (broadcast scalar add).
  NodeId add_scalar_node(NodeId x, NodeId s) {
    const S sv = scalar(s);
    NodeId out = push(val(x).array() + sv, nullptr, needs(x) || needs(s), {});
    record(out, [this, x, s, out]() {
      const Mx<S>& g = node(out).grad;
      if (needs(x)) acc(x, g);
      if (needs(s)) acc_scalar(s, g.sum());
    });
    return out;
  }

  // ----- elementwise nonlinearities -----

  NodeId sigmoid(NodeId x) {
    Mx<S> y = val(x).unaryExpr([](S v) { return sigmoid_scalar(v); });
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      const Mx<S>& yv = val(out);
      acc(x, node(out).grad.cwiseProduct(
                 (yv.array() * (S(1) - yv.array())).matrix()));
    });
    return out;
  }

  NodeId tanh_(NodeId x) {
    Mx<S> y = val(x).array().tanh();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      const Mx<S>& yv = val(out);
      acc(x, node(out).grad.cwiseProduct((S(1) - yv.array().square()).matrix()));
    });
    return out;
  }

  /// y = c * tanh(x); the bounded log-scale head of coupling layers.
  NodeId tanh_scaled(NodeId x, S c) {
    Mx<S> y = val(x).array().tanh() * c;
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, c, out]() {
      if (!needs(x)) return;
      const auto t = val(out).array() / c;
      acc(x, node(out).grad.cwiseProduct((c * (S(1) - t.square())).matrix()));
    });
    return out;
  }

  /// y = x * sigmoid(x).
  NodeId swish(NodeId x) {
    Mx<S> y = val(x).unaryExpr([](S v) { return v * sigmoid_scalar(v); });
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      const Mx<S>& xv = val(x);
      Mx<S> d = xv.unaryExpr([](S v) {
        const S s = sigmoid_scalar(v);
        return s * (S(1) + v * (S(1) - s));
      });
      acc(x, node(out).grad.cwiseProduct(d));
    });
    return out;
  }

  /// Overflow-safe softplus, log(1 + exp(x)).
  NodeId softplus(NodeId x) {
    Mx<S> y = val(x).unaryExpr([](S v) { return softplus_scalar(v); });
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      Mx<S> d = val(x).unaryExpr([](S v) { return sigmoid_scalar(v); });
      acc(x, node(out).grad.cwiseProduct(d));
    });
    return out;
  }

  NodeId exp_(NodeId x) {
    Mx<S> y = val(x).array().exp();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (needs(x)) acc(x, node(out).grad.cwiseProduct(val(out)));
    });
    return out;
  }

  NodeId log_(NodeId x) {
    Mx<S> y = val(x).array().log();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (needs(x)) acc(x, node(out).grad.cwiseQuotient(val(x)));
    });
    return out;
  }

  NodeId sqrt_(NodeId x) {
    Mx<S> y = val(x).array().sqrt();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      acc(x, (node(out).grad.array() / (S(2) * val(out).array())).matrix());
    });
    return out;
  }

  NodeId square(NodeId x) {
    Mx<S> y = val(x).array().square();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (needs(x)) acc(x, (node(out).grad.array() * S(2) * val(x).array()).matrix());
    });
    return out;
  }

  /// Smooth clamp into (0, 1): identity on [d, 1-d] with C1 rational
  /// corners (d = 1.4e-6), matching specret::softclamp on [0, 1].
  NodeId softclamp01(NodeId x) {
    Mx<S> y = val(x).unaryExpr([](S v) { return clamp01_value(v); });
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      Mx<S> d = val(x).unaryExpr([](S v) { return clamp01_deriv(v); });
      acc(x, node(out).grad.cwiseProduct(d));
    });
    return out;
  }

  // ----- reductions -----

  NodeId sum(NodeId x) {
    Mx<S> y(1, 1);
    y(0, 0) = val(x).sum();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      const S g = node(out).grad(0, 0);
      acc(x, Mx<S>::Constant(val(x).rows(), val(x).cols(), g));
    });
    return out;
  }

  NodeId mean_all(NodeId x) {
    const auto n = static_cast<S>(val(x).size());
    return scale(sum(x), S(1) / n);
  }

  NodeId sum_sq(NodeId x) {
    Mx<S> y(1, 1);
    y(0, 0) = val(x).squaredNorm();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      acc(x, (S(2) * node(out).grad(0, 0)) * val(x));
    });
    return out;
  }

  NodeId dot(NodeId a, NodeId b) {
    check_same_shape(a, b, "dot");
    Mx<S> y(1, 1);
    y(0, 0) = val(a).cwiseProduct(val(b)).sum();
    NodeId out = push(std::move(y), nullptr, needs(a) || needs(b), {});
    record(out, [this, a, b, out]() {
      const S g = node(out).grad(0, 0);
      if (needs(a)) acc(a, g * val(b));
      if (needs(b)) acc(b, g * val(a));
    });
    return out;
  }

  /// sqrt(sum of squares + guard); the guard keeps the gradient finite at 0.
  NodeId norm2(NodeId x, S guard = S(1e-30)) {
    return sqrt_(add_const(sum_sq(x), guard));
  }

  // ----- structure ops -----

  NodeId concat_rows(const std::vector<NodeId>& parts) {
    require(!parts.empty(), "Tape::concat_rows: no parts");
    Eigen::Index rows = 0;
    const Eigen::Index cols = val(parts[0]).cols();
    bool any_grad = false;
    for (NodeId p : parts) {
      if (val(p).cols() != cols) throw ShapeError("Tape::concat_rows: column mismatch");
      rows += val(p).rows();
      any_grad = any_grad || needs(p);
    }
    Mx<S> y(rows, cols);
    Eigen::Index at = 0;
    for (NodeId p : parts) {
      y.middleRows(at, val(p).rows()) = val(p);
      at += val(p).rows();
    }
    NodeId out = push(std::move(y), nullptr, any_grad, {});
    record(out, [this, parts, out]() {
      const Mx<S>& g = node(out).grad;
      Eigen::Index at = 0;
      for (NodeId p : parts) {
        const Eigen::Index r = val(p).rows();
        if (needs(p)) acc(p, g.middleRows(at, r));
        at += r;
      }
    });
    return out;
  }

  NodeId slice_rows(NodeId x, Eigen::Index start, Eigen::Index len) {
    const Mx<S>& xv = val(x);
    require(start >= 0 && len >= 0 && start + len <= xv.rows(),
            "Tape::slice_rows: range out of bounds");
    NodeId out = push(xv.middleRows(start, len), nullptr, needs(x), {});
    record(out, [this, x, start, len, out]() {
      if (!needs(x)) return;
      Mx<S> g = Mx<S>::Zero(val(x).rows(), val(x).cols());
      g.middleRows(start, len) = node(out).grad;
      acc(x, std::move(g));
    });
    return out;
  }

  NodeId transpose(NodeId x) {
    NodeId out = push(val(x).transpose(), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (needs(x)) acc(x, node(out).grad.transpose());
    });
    return out;
  }

  NodeId softmax_rows(NodeId x) {
    Mx<S> y = val(x);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const S m = y.row(i).maxCoeff();
      y.row(i) = (y.row(i).array() - m).exp();
      y.row(i) /= y.row(i).sum();
    }
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out]() {
      if (!needs(x)) return;
      const Mx<S>& yv = val(out);
      const Mx<S>& g = node(out).grad;
      Mx<S> dx(yv.rows(), yv.cols());
      for (Eigen::Index i = 0; i < yv.rows(); ++i) {
        const S inner = g.row(i).cwiseProduct(yv.row(i)).sum();
        dx.row(i) = yv.row(i).array() * (g.row(i).array() - inner);
      }
      acc(x, std::move(dx));
    });
    return out;
  }

  /// Column mean with canonical (sorted) per-row summation, so the value is
  /// bit-identical under any permutation of the columns.
  NodeId mean_cols_canonical(NodeId x) {
    const Mx<S>& xv = val(x);
    const Eigen::Index cols = xv.cols();
    require(cols >= 1, "Tape::mean_cols_canonical: empty");
    Mx<S> y(xv.rows(), 1);
    std::vector<S> buf(static_cast<std::size_t>(cols));
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) buf[static_cast<std::size_t>(j)] = xv(i, j);
      std::sort(buf.begin(), buf.end());
      S s = 0;
      for (S v : buf) s += v;
      y(i, 0) = s / static_cast<S>(cols);
    }
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out, cols]() {
      if (!needs(x)) return;
      acc(x, (node(out).grad / static_cast<S>(cols)).replicate(1, cols));
    });
    return out;
  }

  NodeId mean_cols(NodeId x) {
    const Eigen::Index cols = val(x).cols();
    require(cols >= 1, "Tape::mean_cols: empty");
    Mx<S> y = val(x).rowwise().mean();
    NodeId out = push(std::move(y), nullptr, needs(x), {});
    record(out, [this, x, out, cols]() {
      if (!needs(x)) return;
      acc(x, (node(out).grad / static_cast<S>(cols)).replicate(1, cols));
    });
    return out;
  }

  // ----- backward -----

  /// Seeds d(seed)/d(seed) = 1 and accumulates adjoints into every
  /// differentiable ancestor. May be called once per tape.
  void backward(NodeId seed) {
    Node& s = node(seed);
    const Mx<S>& sv = val(seed);
    if (sv.rows() != 1 || sv.cols() != 1) {
      throw ShapeError("Tape::backward: seed must be a scalar node");
    }
    if (ran_backward_) throw DomainError("Tape::backward: tape already consumed");
    ran_backward_ = true;
    ensure_grad(s);
    s.grad(0, 0) = S(1);
    for (int i = seed.v; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.back && n.grad.size() > 0) n.back();
    }
  }

 private:
  struct Node {
    Mx<S> value;
    const Mx<S>* ref = nullptr;
    Mx<S> grad;
    bool needs_grad = false;
    std::function<void()> back;
  };

  std::vector<Node> nodes_;
  bool ran_backward_ = false;

  Node& node(NodeId id) {
    require(id.valid() && id.v < size(), "Tape: invalid node id");
    return nodes_[static_cast<std::size_t>(id.v)];
  }
  const Node& node(NodeId id) const {
    require(id.valid() && id.v < size(), "Tape: invalid node id");
    return nodes_[static_cast<std::size_t>(id.v)];
  }

  bool needs(NodeId id) const { return node(id).needs_grad; }

  void check_same_shape(NodeId a, NodeId b, const char* op) const {
    if (val(a).rows() != val(b).rows() || val(a).cols() != val(b).cols()) {
      throw ShapeError(std::string("Tape::") + op + ": shape mismatch");
    }
  }

  NodeId push(Mx<S> value, const Mx<S>* ref, bool needs_grad, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.ref = ref;
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return NodeId{static_cast<int>(nodes_.size()) - 1};
  }

  void record(NodeId id, std::function<void()> back) { node(id).back = std::move(back); }

  void ensure_grad(Node& n) {
    if (n.grad.size() == 0) {
      const Mx<S>& v = n.ref != nullptr ? *n.ref : n.value;
      n.grad = Mx<S>::Zero(v.rows(), v.cols());
    }
  }

  template <class Expr>
  void acc(NodeId id, const Expr& g) {
    Node& n = node(id);
    ensure_grad(n);
    n.grad += g;
  }

  void acc_scalar(NodeId id, S g) {
    Node& n = node(id);
    ensure_grad(n);
    n.grad(0, 0) += g;
  }

  static S sigmoid_scalar(S v) {
    if (v >= S(0)) {
      const S e = std::exp(-v);
      return S(1) / (S(1) + e);
    }
    const S e = std::exp(v);
    return e / (S(1) + e);
  }

  static S softplus_scalar(S v) {
    if (v > S(0)) return v + std::log1p(std::exp(-v));
    return std::log1p(std::exp(v));
  }

  static S clamp01_value(S t) {
    constexpr S d = S(1.4e-6);
    if (t >= d && t <= S(1) - d) return t;
    if (t < d) return d * d / (S(2) * d - t);
    return S(1) - d * d / (t - S(1) + S(2) * d);
  }

  static S clamp01_deriv(S t) {
    constexpr S d = S(1.4e-6);
    if (t >= d && t <= S(1) - d) return S(1);
    if (t < d) {
      const S u = S(2) * d - t;
      return d * d / (u * u);
    }
    const S u = t - S(1) + S(2) * d;
    return d * d / (u * u);
  }
};

}  // namespace specret::ad
