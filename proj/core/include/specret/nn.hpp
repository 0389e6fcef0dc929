#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "specret/ad.hpp"
#include "specret/common.hpp"
#include "specret/param_store.hpp"

namespace specret {

enum class Activation { kSigmoid, kSwish, kTanh, kLinear };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

/// Dense stack: n_layers affine maps with `activation` between them (never
/// after the last). With residual=true the input is added back through a
/// learned bias-free projection.
struct MlpConfig {
  int in_dim = 0;
  int out_dim = 0;
  int hidden_dim = 0;
  int n_layers = 1;
  Activation activation = Activation::kLinear;
  bool residual = false;

  void validate() const;
  /// Input/output width of linear layer `l` (0-based).
  int layer_in(int l) const;
  int layer_out(int l) const;
};

/// Spectral convolution + residual MLP + linear projection:
/// Q(x) = p(x) + m(U(x)), with U a truncated Fourier-domain linear map.
struct FnoBlockConfig {
  int in_len = 0;
  int out_len = 0;
  int n_modes = 0;
  MlpConfig mlp;

  void validate() const;
};

/// Single-head scaled dot-product cross-attention; rows are tokens.
struct AttentionConfig {
  int query_dim = 0;
  int key_dim = 0;
  int model_dim = 0;
  bool aggregate_mean = false;

  void validate() const;
};

/// Working-precision copy of a ParamStore. Cast once per step; evaluation
/// borrows tensors by reference, so the bank must outlive any tape using it.
template <class S>
struct ParamBank {
  std::vector<std::string> names;
  std::unordered_map<std::string, ad::Mx<S>> values;

  static ParamBank from_store(const ParamStore& store) {
    ParamBank bank;
    bank.names = store.names();
    for (const auto& name : bank.names) {
      bank.values.emplace(name, store.get(name).cast<S>());
    }
    return bank;
  }

  const ad::Mx<S>& at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw DomainError("ParamBank: unknown parameter " + name);
    return it->second;
  }

  ad::Mx<S>& at(const std::string& name) {
    auto it = values.find(name);
    if (it == values.end()) throw DomainError("ParamBank: unknown parameter " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return values.count(name) != 0; }

  /// Casts every tensor back into the canonical f64 store (names must exist).
  void write_back(ParamStore& store) const {
    for (const auto& name : names) {
      store.mutable_get(name) = values.at(name).template cast<double>();
    }
  }
};

template <class S>
using GradMap = std::map<std::string, ad::Mx<S>>;

/// Evaluation context: a tape plus a parameter bank. Parameters bind lazily
/// to tape leaves (one node per name, so gradients accumulate across reuse).
/// With trainable=false parameters bind as constants (value-only evaluation).
template <class S>
struct Ctx {
  ad::Tape<S>& tape;
  const ParamBank<S>& bank;
  bool trainable = true;
  std::map<std::string, ad::NodeId> bound;

  Ctx(ad::Tape<S>& t, const ParamBank<S>& b, bool train = true)
      : tape(t), bank(b), trainable(train) {}

  ad::NodeId param(const std::string& name) {
    auto it = bound.find(name);
    if (it != bound.end()) return it->second;
    const ad::Mx<S>* ptr = &bank.at(name);
    const ad::NodeId id = trainable ? tape.leaf_ref(ptr) : tape.constant_ref(ptr);
    bound.emplace(name, id);
    return id;
  }

  /// Gradients for every parameter in the bank; zero matrices for parameters
  /// the loss never touched. Call after tape.backward().
  GradMap<S> collect_grads() {
    GradMap<S> out;
    for (const auto& name : bank.names) {
      auto it = bound.find(name);
      if (it == bound.end()) {
        const ad::Mx<S>& v = bank.at(name);
        out.emplace(name, ad::Mx<S>::Zero(v.rows(), v.cols()));
      } else {
        out.emplace(name, tape.grad_of(it->second));
      }
    }
    return out;
  }
};

template <class S>
ad::NodeId activate(ad::Tape<S>& tape, ad::NodeId x, Activation a) {
  switch (a) {
    case Activation::kSigmoid: return tape.sigmoid(x);
    case Activation::kSwish: return tape.swish(x);
    case Activation::kTanh: return tape.tanh_(x);
    case Activation::kLinear: return x;
  }
  throw DomainError("activate: unknown activation");
}

// ----- initialization (canonical f64, deterministic per name) -----

/// Kaiming-uniform weights (±sqrt(6/fan_in)), zero biases; every tensor gets
/// its own stream derived from (seed, name).
void init_mlp(ParamStore& store, const std::string& prefix, const MlpConfig& cfg,
              std::uint64_t seed);

/// All-zero weights and biases (identity/dead-branch test configurations and
/// near-identity flow starts).
void init_mlp_zero(ParamStore& store, const std::string& prefix, const MlpConfig& cfg);

/// Fourier map R ~ N(0, 1/n_modes) (stored as real/imaginary parts), Kaiming
/// projection, and the inner MLP under "<prefix>/m".
void init_fno_block(ParamStore& store, const std::string& prefix, const FnoBlockConfig& cfg,
                    std::uint64_t seed);

/// Bias-free Wq/Wk/Wv with Kaiming-uniform entries.
void init_attention(ParamStore& store, const std::string& prefix, const AttentionConfig& cfg,
                    std::uint64_t seed);

// ----- constant DFT matrices for the spectral convolution -----

/// Real-DFT analysis/synthesis matrices restricted to the first n_modes
/// coefficients: fwd_cos(k,j)=cos(2πkj/n), fwd_sin(k,j)=−sin(2πkj/n);
/// synthesis applies weights 1 (DC and Nyquist) or 2 (interior) over n.
template <class S>
struct DftMatrices {
  ad::Mx<S> fwd_cos, fwd_sin, inv_cos, inv_sin;
};

template <class S>
DftMatrices<S> real_dft_matrices(int n, int n_modes) {
  require(n >= 1, "real_dft_matrices: n must be positive");
  require(n_modes >= 1 && n_modes <= n / 2 + 1, "real_dft_matrices: n_modes out of range");
  DftMatrices<S> d;
  d.fwd_cos.resize(n_modes, n);
  d.fwd_sin.resize(n_modes, n);
  d.inv_cos.resize(n, n_modes);
  d.inv_sin.resize(n, n_modes);
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (int k = 0; k < n_modes; ++k) {
    const bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
    const double w = interior ? 2.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      const double ang = two_pi * static_cast<double>(k) * static_cast<double>(j) /
                         static_cast<double>(n);
      const double c = std::cos(ang);
      const double s = std::sin(ang);
      d.fwd_cos(k, j) = static_cast<S>(c);
      d.fwd_sin(k, j) = static_cast<S>(-s);
      d.inv_cos(j, k) = static_cast<S>(w * c / n);
      d.inv_sin(j, k) = static_cast<S>(-w * s / n);
    }
  }
  return d;
}

// ----- forward passes (tape) -----

/// x: in_dim × n_cols (columns are independent samples).
template <class S>
ad::NodeId mlp_forward(Ctx<S>& ctx, const std::string& prefix, const MlpConfig& cfg,
                       ad::NodeId x) {
  cfg.validate();
  if (ctx.tape.val(x).rows() != cfg.in_dim)
    throw ShapeError("mlp_forward: input rows != in_dim for " + prefix);
  ad::NodeId h = x;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string tag = std::to_string(l);
    h = ctx.tape.add_col_broadcast(ctx.tape.matmul(ctx.param(prefix + "/W" + tag), h),
                                   ctx.param(prefix + "/b" + tag));
    if (l + 1 < cfg.n_layers) h = activate(ctx.tape, h, cfg.activation);
  }
  if (cfg.residual) {
    h = ctx.tape.add(h, ctx.tape.matmul(ctx.param(prefix + "/P"), x));
  }
  return h;
}

/// x: in_len × n_cols. Truncated real-DFT, learned complex mode map, inverse.
template <class S>
ad::NodeId spectral_conv(Ctx<S>& ctx, const std::string& prefix, const FnoBlockConfig& cfg,
                         ad::NodeId x) {
  cfg.validate();
  if (ctx.tape.val(x).rows() != cfg.in_len)
    throw ShapeError("spectral_conv: input rows != in_len for " + prefix);
  const DftMatrices<S> d = real_dft_matrices<S>(cfg.in_len, cfg.n_modes);
  ad::Tape<S>& t = ctx.tape;
  const ad::NodeId re = t.matmul_const(d.fwd_cos, x);
  const ad::NodeId im = t.matmul_const(d.fwd_sin, x);
  const ad::NodeId rre = ctx.param(prefix + "/Rre");
  const ad::NodeId rim = ctx.param(prefix + "/Rim");
  const ad::NodeId re2 = t.sub(t.matmul(rre, re), t.matmul(rim, im));
  const ad::NodeId im2 = t.add(t.matmul(rre, im), t.matmul(rim, re));
  return t.add(t.matmul_const(d.inv_cos, re2), t.matmul_const(d.inv_sin, im2));
}

/// Q(x) = p(x) + m(U(x)); no activation of its own.
template <class S>
ad::NodeId fno_block(Ctx<S>& ctx, const std::string& prefix, const FnoBlockConfig& cfg,
                     ad::NodeId x) {
  ad::Tape<S>& t = ctx.tape;
  const ad::NodeId u = spectral_conv(ctx, prefix, cfg, x);
  const ad::NodeId mu = mlp_forward(ctx, prefix + "/m", cfg.mlp, u);
  const ad::NodeId px = t.add_col_broadcast(t.matmul(ctx.param(prefix + "/p/W"), x),
                                            ctx.param(prefix + "/p/b"));
  return t.add(px, mu);
}

/// queries: q×query_dim, keys_values: k×key_dim (rows are tokens). Returns
/// q×model_dim, or 1×model_dim with aggregate_mean.
template <class S>
ad::NodeId cross_attention(Ctx<S>& ctx, const std::string& prefix, const AttentionConfig& cfg,
                           ad::NodeId queries, ad::NodeId keys_values) {
  cfg.validate();
  ad::Tape<S>& t = ctx.tape;
  const auto& qv = t.val(queries);
  const auto& kv = t.val(keys_values);
  if (kv.rows() < 1) throw DomainError("cross_attention: empty key set");
  if (qv.cols() != cfg.query_dim) throw ShapeError("cross_attention: query width mismatch");
  if (kv.cols() != cfg.key_dim) throw ShapeError("cross_attention: key width mismatch");

  const ad::NodeId qp = t.matmul(queries, t.transpose(ctx.param(prefix + "/Wq")));
  const ad::NodeId kp = t.matmul(keys_values, t.transpose(ctx.param(prefix + "/Wk")));
  const ad::NodeId vp = t.matmul(keys_values, t.transpose(ctx.param(prefix + "/Wv")));
  const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(cfg.model_dim)));
  const ad::NodeId scores = t.scale(t.matmul(qp, t.transpose(kp)), inv_sqrt);
  ad::NodeId out = t.matmul(t.softmax_rows(scores), vp);
  if (cfg.aggregate_mean) {
    out = t.transpose(t.mean_cols(t.transpose(out)));
  }
  return out;
}

/// Builds the loss on a fresh tape, checks finiteness, runs backward, and
/// returns (loss value, gradients for every bank parameter).
template <class S, class F>
std::pair<S, GradMap<S>> value_and_grads(const ParamBank<S>& bank, F&& build) {
  ad::Tape<S> tape;
  Ctx<S> ctx(tape, bank);
  const ad::NodeId loss = build(ctx);
  const S value = tape.scalar(loss);
  if (!std::isfinite(static_cast<double>(value))) {
    std::string bad;
    for (const auto& name : bank.names) {
      if (!bank.at(name).allFinite()) {
        bad += (bad.empty() ? "" : ", ") + name;
      }
    }
    throw NumericError("loss is non-finite" +
                       (bad.empty() ? std::string(" (all parameters finite; check inputs)")
                                    : "; non-finite parameters: " + bad));
  }
  tape.backward(loss);
  return {value, ctx.collect_grads()};
}

}  // namespace specret
