#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "specret/nn.hpp"

namespace specret {

/// Stack of affine coupling layers with alternating parity. Each layer keeps
/// one half of the coordinates fixed and maps the other half through
/// z_b' = z_b ⊙ exp(s(z_a)) + t(z_a); the scale output is tanh-bounded so the
/// inverse stays numerically stable.
struct FlowConfig {
  int d_z = 0;
  int n_layers = 4;
  int hidden_dim = 64;
  double s_clamp = 2.0;

  void validate() const;
  int half() const { return d_z / 2; }
  MlpConfig net_config() const;
};

/// Scale/translation nets under "<prefix>/k<layer>/s" and ".../t". Hidden
/// layers get Kaiming-uniform weights; with final_layer_zero (the default)
/// the last layer starts at zero, so the flow begins as the identity while
/// every layer still receives gradient.
void init_flow(ParamStore& store, const std::string& prefix, const FlowConfig& cfg,
               std::uint64_t seed, bool final_layer_zero = true);

/// All parameters zero (identity-flow test configuration).
void init_flow_zero(ParamStore& store, const std::string& prefix, const FlowConfig& cfg);

template <class S>
struct FlowNodes {
  ad::NodeId z_k;          // d_z x 1
  ad::NodeId sum_log_det;  // 1 x 1
};

namespace detail {

/// Row-selection matrix picking even (parity 0) or odd (parity 1) indices.
template <class S>
ad::Mx<S> parity_selector(int d_z, int parity) {
  const int rows = parity == 0 ? (d_z + 1) / 2 : d_z / 2;
  ad::Mx<S> sel = ad::Mx<S>::Zero(rows, d_z);
  for (int i = 0; i < rows; ++i) sel(i, 2 * i + parity) = S(1);
  return sel;
}

}  // namespace detail

/// Differentiable forward pass; sum_log_det is the sum of every scale output
/// (the log-determinant of the block-triangular Jacobian).
template <class S>
FlowNodes<S> flow_forward_nodes(Ctx<S>& ctx, const std::string& prefix, const FlowConfig& cfg,
                                ad::NodeId z0) {
  cfg.validate();
  ad::Tape<S>& t = ctx.tape;
  if (t.val(z0).rows() != cfg.d_z || t.val(z0).cols() != 1)
    throw ShapeError("flow_forward: z0 must be d_z x 1");

  const MlpConfig net = cfg.net_config();
  ad::NodeId z = z0;
  ad::NodeId sld = t.constant_scalar(S(0));
  for (int k = 0; k < cfg.n_layers; ++k) {
    const int pa = k % 2;
    const ad::Mx<S> sel_a = detail::parity_selector<S>(cfg.d_z, pa);
    const ad::Mx<S> sel_b = detail::parity_selector<S>(cfg.d_z, 1 - pa);
    const ad::NodeId za = t.matmul_const(sel_a, z);
    const ad::NodeId zb = t.matmul_const(sel_b, z);
    const std::string layer = prefix + "/k" + std::to_string(k);
    const ad::NodeId s =
        t.tanh_scaled(mlp_forward(ctx, layer + "/s", net, za), static_cast<S>(cfg.s_clamp));
    const ad::NodeId tr = mlp_forward(ctx, layer + "/t", net, za);
    const ad::NodeId zb2 = t.add(t.cmul(zb, t.exp_(s)), tr);
    z = t.add(t.matmul_const(sel_a.transpose(), za), t.matmul_const(sel_b.transpose(), zb2));
    sld = t.add(sld, t.sum(s));
  }
  return {z, sld};
}

/// Value-only forward: (z_K, sum_log_det).
template <class S>
std::pair<ad::Mx<S>, S> flow_forward(const ParamBank<S>& bank, const std::string& prefix,
                                     const FlowConfig& cfg, const ad::Mx<S>& z0) {
  ad::Tape<S> tape;
  Ctx<S> ctx(tape, bank, false);
  const FlowNodes<S> out = flow_forward_nodes(ctx, prefix, cfg, tape.constant(z0));
  return {tape.val(out.z_k), tape.scalar(out.sum_log_det)};
}

/// Exact inverse: peels the coupling layers in reverse order.
template <class S>
ad::Mx<S> flow_inverse(const ParamBank<S>& bank, const std::string& prefix,
                       const FlowConfig& cfg, const ad::Mx<S>& z_k) {
  cfg.validate();
  if (z_k.rows() != cfg.d_z || z_k.cols() != 1)
    throw ShapeError("flow_inverse: z_k must be d_z x 1");

  const MlpConfig net = cfg.net_config();
  ad::Mx<S> z = z_k;
  for (int k = cfg.n_layers - 1; k >= 0; --k) {
    const int pa = k % 2;
    const ad::Mx<S> sel_a = detail::parity_selector<S>(cfg.d_z, pa);
    const ad::Mx<S> sel_b = detail::parity_selector<S>(cfg.d_z, 1 - pa);
    const ad::Mx<S> za = sel_a * z;
    const ad::Mx<S> zb = sel_b * z;

    ad::Tape<S> tape;
    Ctx<S> ctx(tape, bank, false);
    const std::string layer = prefix + "/k" + std::to_string(k);
    const ad::NodeId zan = tape.constant(za);
    const ad::Mx<S> s_raw = tape.val(mlp_forward(ctx, layer + "/s", net, zan));
    const ad::Mx<S> tr = tape.val(mlp_forward(ctx, layer + "/t", net, zan));
    const S clamp = static_cast<S>(cfg.s_clamp);
    ad::Mx<S> zb0(zb.rows(), 1);
    for (Eigen::Index i = 0; i < zb.rows(); ++i) {
      const S s = clamp * std::tanh(s_raw(i, 0));
      zb0(i, 0) = (zb(i, 0) - tr(i, 0)) * std::exp(-s);
    }
    z = sel_a.transpose() * za + sel_b.transpose() * zb0;
  }
  return z;
}

/// Change-of-variables correction for the pushed-forward density.
inline double transformed_log_density(double q0_logp, double sum_log_det) {
  return q0_logp - sum_log_det;
}

}  // namespace specret
