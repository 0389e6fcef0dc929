#include "specret/nn.hpp"

#include "specret/rng.hpp"

namespace specret {

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "swish") return Activation::kSwish;
  if (name == "tanh") return Activation::kTanh;
  if (name == "linear") return Activation::kLinear;
  throw DomainError("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSwish: return "swish";
    case Activation::kTanh: return "tanh";
    case Activation::kLinear: return "linear";
  }
  throw DomainError("unknown activation enum value");
}

void MlpConfig::validate() const {
  require(n_layers >= 1, "MlpConfig: n_layers must be >= 1");
  require(in_dim > 0 && out_dim > 0, "MlpConfig: dims must be positive");
  require(n_layers == 1 || hidden_dim > 0, "MlpConfig: hidden_dim must be positive");
}

int MlpConfig::layer_in(int l) const { return l == 0 ? in_dim : hidden_dim; }

int MlpConfig::layer_out(int l) const { return l == n_layers - 1 ? out_dim : hidden_dim; }

void FnoBlockConfig::validate() const {
  require(in_len > 0 && out_len > 0, "FnoBlockConfig: lengths must be positive");
  require(n_modes >= 1 && n_modes <= in_len / 2 + 1, "FnoBlockConfig: n_modes out of range");
  mlp.validate();
  require(mlp.in_dim == in_len && mlp.out_dim == out_len,
          "FnoBlockConfig: inner MLP dims must match block lengths");
}

void AttentionConfig::validate() const {
  require(query_dim > 0 && key_dim > 0 && model_dim > 0,
          "AttentionConfig: dims must be positive");
}

namespace {

Mat kaiming_uniform(int rows, int cols, std::uint64_t seed, const std::string& name) {
  Rng rng(derive_seed(seed, {fnv1a64(name)}));
  const double bound = std::sqrt(6.0 / static_cast<double>(cols));
  Mat w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
  return w;
}

Mat gaussian(int rows, int cols, double sdev, std::uint64_t seed, const std::string& name) {
  Rng rng(derive_seed(seed, {fnv1a64(name)}));
  Mat w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = sdev * rng.normal();
  return w;
}

}  // namespace

void init_mlp(ParamStore& store, const std::string& prefix, const MlpConfig& cfg,
              std::uint64_t seed) {
  cfg.validate();
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string w = prefix + "/W" + std::to_string(l);
    const std::string b = prefix + "/b" + std::to_string(l);
    store.add(w, kaiming_uniform(cfg.layer_out(l), cfg.layer_in(l), seed, w));
    store.add(b, Mat::Zero(cfg.layer_out(l), 1));
  }
  if (cfg.residual) {
    const std::string p = prefix + "/P";
    store.add(p, kaiming_uniform(cfg.out_dim, cfg.in_dim, seed, p));
  }
}

void init_mlp_zero(ParamStore& store, const std::string& prefix, const MlpConfig& cfg) {
  cfg.validate();
  for (int l = 0; l < cfg.n_layers; ++l) {
    store.add(prefix + "/W" + std::to_string(l), Mat::Zero(cfg.layer_out(l), cfg.layer_in(l)));
    store.add(prefix + "/b" + std::to_string(l), Mat::Zero(cfg.layer_out(l), 1));
  }
  if (cfg.residual) {
    store.add(prefix + "/P", Mat::Zero(cfg.out_dim, cfg.in_dim));
  }
}

void init_fno_block(ParamStore& store, const std::string& prefix, const FnoBlockConfig& cfg,
                    std::uint64_t seed) {
  cfg.validate();
  const double sdev = 1.0 / std::sqrt(static_cast<double>(cfg.n_modes));
  const std::string rre = prefix + "/Rre";
  const std::string rim = prefix + "/Rim";
  store.add(rre, gaussian(cfg.n_modes, cfg.n_modes, sdev, seed, rre));
  store.add(rim, gaussian(cfg.n_modes, cfg.n_modes, sdev, seed, rim));
  const std::string pw = prefix + "/p/W";
  store.add(pw, kaiming_uniform(cfg.out_len, cfg.in_len, seed, pw));
  store.add(prefix + "/p/b", Mat::Zero(cfg.out_len, 1));
  init_mlp(store, prefix + "/m", cfg.mlp, seed);
}

void init_attention(ParamStore& store, const std::string& prefix, const AttentionConfig& cfg,
                    std::uint64_t seed) {
  cfg.validate();
  const std::string wq = prefix + "/Wq";
  const std::string wk = prefix + "/Wk";
  const std::string wv = prefix + "/Wv";
  store.add(wq, kaiming_uniform(cfg.model_dim, cfg.query_dim, seed, wq));
  store.add(wk, kaiming_uniform(cfg.model_dim, cfg.key_dim, seed, wk));
  store.add(wv, kaiming_uniform(cfg.model_dim, cfg.key_dim, seed, wv));
}

}  // namespace specret
