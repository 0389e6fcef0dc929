#include "specret/flow.hpp"

namespace specret {

void FlowConfig::validate() const {
  require(d_z > 0, "FlowConfig: d_z must be positive");
  require(d_z % 2 == 0, "FlowConfig: d_z must be even");
  require(n_layers >= 0, "FlowConfig: n_layers must be >= 0");
  require(n_layers == 0 || hidden_dim > 0, "FlowConfig: hidden_dim must be positive");
  require(s_clamp > 0.0, "FlowConfig: s_clamp must be positive");
}

MlpConfig FlowConfig::net_config() const {
  return MlpConfig{half(), half(), hidden_dim, 3, Activation::kSwish, false};
}

void init_flow(ParamStore& store, const std::string& prefix, const FlowConfig& cfg,
               std::uint64_t seed, bool final_layer_zero) {
  cfg.validate();
  const MlpConfig net = cfg.net_config();
  for (int k = 0; k < cfg.n_layers; ++k) {
    for (const char* side : {"s", "t"}) {
      const std::string base = prefix + "/k" + std::to_string(k) + "/" + side;
      init_mlp(store, base, net, seed);
      if (final_layer_zero) {
        store.mutable_get(base + "/W" + std::to_string(net.n_layers - 1)).setZero();
      }
    }
  }
}

void init_flow_zero(ParamStore& store, const std::string& prefix, const FlowConfig& cfg) {
  cfg.validate();
  const MlpConfig net = cfg.net_config();
  for (int k = 0; k < cfg.n_layers; ++k) {
    for (const char* side : {"s", "t"}) {
      init_mlp_zero(store, prefix + "/k" + std::to_string(k) + "/" + side, net);
    }
  }
}

}  // namespace specret
