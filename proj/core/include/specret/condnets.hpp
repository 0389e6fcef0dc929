#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specret/dataset.hpp"
#include "specret/nn.hpp"
#include "specret/sampling.hpp"

namespace specret {

/// Deep-set atmosphere estimator: a per-pixel encoder E (r -> d_prop) whose
/// outputs are mean-aggregated and mixed by m (d_prop -> d_prop), plus four
/// decoder heads (d_prop -> r) for tau, L_u, L_d, and B. All MLPs share the
/// hidden width and activation.
struct PropNetConfig {
  int r = 0;
  int d_prop = 12;
  int hidden = 128;
  int enc_layers = 2;   // per-pixel pre-aggregate encoder: r -> hidden -> d_prop
  int mix_layers = 5;   // post-aggregate mixer on the pooled encoding
  int head_layers = 5;  // each decoder head: d_prop -> r
  /// Adds a learned input projection skip to the mixer and decoder heads.
  bool residual = false;
  Activation activation = Activation::kTanh;

  void validate() const;
  MlpConfig encoder_config() const;  // r -> d_prop
  MlpConfig mix_config() const;      // d_prop -> d_prop
  MlpConfig head_config() const;     // d_prop -> r
};

/// Background autoencoder: encoder (r -> d_bg), decoder (d_bg -> r).
struct BgNetConfig {
  int r = 0;
  int d_bg = 12;
  int hidden = 128;
  int n_layers = 5;
  Activation activation = Activation::kTanh;

  void validate() const;
  MlpConfig encoder_config() const;
  MlpConfig decoder_config() const;
};

/// Radiance heads work in scaled units: the head emits softplus(x), and
/// radiance = softplus(x) * rad_scale. rad_scale is 1 at construction and is
/// set to the mean training radiance by the trainer (kept in checkpoints),
/// so head pre-activations stay O(1) regardless of the radiance unit.
struct PropNetModel {
  PropNetConfig config;
  WavelengthGrid grid;
  ParamStore params;
  double rad_scale = 1.0;
};

struct BgNetModel {
  BgNetConfig config;
  WavelengthGrid grid;
  ParamStore params;
  double rad_scale = 1.0;
};

PropNetModel init_propnet(const PropNetConfig& cfg, const WavelengthGrid& grid,
                          std::uint64_t seed);
BgNetModel init_bgnet(const BgNetConfig& cfg, const WavelengthGrid& grid, std::uint64_t seed);

/// Scene-level conditioning estimate: decoded atmosphere and background plus
/// the latent codes, concatenated as c = c_prop (+) c_bg.
struct SceneEstimate {
  AtmosphereParams atm_hat;
  RadianceSpectrum bg_hat;
  Vec c_prop;
  Vec c_bg;
  Vec c;
};

// ----- tape paths (shared by training and value evaluation) -----

/// pixels_cols: r x J radiance columns already divided by rad_scale.
/// Aggregation uses the canonical column mean, so the encoding is bit-exact
/// under any permutation of the set.
template <class S>
ad::NodeId propnet_encode_nodes(Ctx<S>& ctx, const PropNetConfig& cfg,
                                const std::string& prefix, ad::NodeId pixels_cols) {
  const ad::NodeId per_pixel = mlp_forward(ctx, prefix + "/enc", cfg.encoder_config(),
                                           pixels_cols);
  const ad::NodeId pooled = ctx.tape.mean_cols_canonical(per_pixel);
  return mlp_forward(ctx, prefix + "/m", cfg.mix_config(), pooled);
}

/// Decoded curves as tape nodes; radiance curves are in scaled units
/// (multiply by rad_scale to get microflicks).
struct PropCurveNodes {
  ad::NodeId tau;
  ad::NodeId up_scaled;
  ad::NodeId down_scaled;
  ad::NodeId bb_scaled;
};

template <class S>
PropCurveNodes propnet_decode_nodes(Ctx<S>& ctx, const PropNetConfig& cfg,
                                    const std::string& prefix, ad::NodeId c_prop) {
  auto& t = ctx.tape;
  const MlpConfig head = cfg.head_config();
  return PropCurveNodes{
      t.sigmoid(mlp_forward(ctx, prefix + "/tau", head, c_prop)),
      t.softplus(mlp_forward(ctx, prefix + "/up", head, c_prop)),
      t.softplus(mlp_forward(ctx, prefix + "/down", head, c_prop)),
      t.softplus(mlp_forward(ctx, prefix + "/bb", head, c_prop)),
  };
}

/// (c_bg, reconstruction in scaled units) for one background column
/// (r x 1, already divided by rad_scale).
template <class S>
std::pair<ad::NodeId, ad::NodeId> bgnet_nodes(Ctx<S>& ctx, const BgNetConfig& cfg,
                                              const std::string& prefix,
                                              ad::NodeId bg_scaled) {
  const ad::NodeId c = mlp_forward(ctx, prefix + "/enc", cfg.encoder_config(), bg_scaled);
  const ad::NodeId recon =
      ctx.tape.softplus(mlp_forward(ctx, prefix + "/dec", cfg.decoder_config(), c));
  return {c, recon};
}

// ----- value paths -----

/// Permutation-invariant set encoding c_prop = m((1/J) sum E(L_j)).
Vec propnet_encode(const PropNetModel& model, const PixelSet& set);

/// Decodes a latent code into a full atmosphere; tau is sigmoid-squashed into
/// [0,1], the radiance heads are softplus-squashed (>= 0) and scaled by
/// rad_scale. temperature_K is derived from the decoded blackbody curve.
AtmosphereParams propnet_decode(const PropNetModel& model, const Vec& c_prop);

/// Autoencodes a background mean; returns (c_bg, reconstruction).
std::pair<Vec, RadianceSpectrum> bgnet_forward(const BgNetModel& model,
                                               const RadianceSpectrum& bg_mean);

/// Training objective on one pixel set:
///   (1 - beta) * [curve MSE summed over tau, L_u, L_d, B]
///   + beta * [MSE of the flat-emitter propagation f_p(0.5, A, 1)]
/// with all radiance quantities measured in scaled units (tau is unitless).
double propnet_loss(const PropNetModel& model, const PixelSet& set,
                    const AtmosphereParams& atm_true, double beta);

/// Scaled-units background reconstruction MSE.
double bgnet_loss(const BgNetModel& model, const RadianceSpectrum& bg_mean);

/// Samples one seeded pixel set (200 pixels, or all pixels for smaller
/// cubes), encodes/decodes both networks against the cube's outlier-removed
/// background mean, and assembles the conditioning estimate.
SceneEstimate estimate_scene(const PropNetModel& propnet, const BgNetModel& bgnet,
                             const HsiCube& cube, std::uint64_t seed);

// ----- training -----

struct AuxTrainConfig {
  int epochs = 40;
  double lr_propnet = 9e-4;
  double lr_bgnet = 1e-3;
  int sets_per_cube = 16;
  int set_size = 200;
  /// Sets whose mean gradient feeds one Adam step; 0 means full batch.
  /// (The background autoencoder always trains full-batch.)
  int batch_size = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-epoch mean losses; val_loss is empty when no validation scenes are
/// given, otherwise one entry per epoch.
struct AuxTrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

/// Adam training on seeded pixel sets drawn from the training scenes, with
/// the propagation weight beta ramping linearly 0 -> 1 over the epochs.
/// Sets rad_scale to the mean training radiance before the first step.
AuxTrainReport train_propnet(PropNetModel& model, const std::vector<SceneRecord>& train,
                             const std::vector<SceneRecord>& val, const AuxTrainConfig& cfg);

/// Adam training of the background autoencoder on each cube's
/// outlier-removed mean plus the means of seeded pixel sets (extra volume at
/// small cube counts). Validation loss is measured on the held-out cubes'
/// outlier-removed means.
AuxTrainReport train_bgnet(BgNetModel& model, const std::vector<SceneRecord>& train,
                           const std::vector<SceneRecord>& val, const AuxTrainConfig& cfg);

// ----- checkpoints -----

void save_propnet(const std::string& path, const PropNetModel& model);
PropNetModel load_propnet(const std::string& path);
void save_bgnet(const std::string& path, const BgNetModel& model);
BgNetModel load_bgnet(const std::string& path);

}  // namespace specret
