#include "specret/condnets.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>

#include "specret/adam.hpp"
#include "specret/forward_model.hpp"
#include "specret/planck.hpp"
#include "specret/rng.hpp"

namespace specret {
namespace {

constexpr std::uint64_t kPropSetTag = 0xa5e7;
constexpr std::uint64_t kPropOrderTag = 0xa0de;
constexpr std::uint64_t kBgSetTag = 0xb95e;
constexpr std::uint64_t kEstimateTag = 0xe571;

const char* kPropPrefix = "prop";
const char* kBgPrefix = "bg";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MlpConfig make_mlp(int in, int out, int hidden, int layers, Activation act) {
  MlpConfig cfg;
  cfg.in_dim = in;
  cfg.out_dim = out;
  cfg.hidden_dim = hidden;
  cfg.n_layers = layers;
  cfg.activation = act;
  cfg.residual = false;
  return cfg;
}

/// Mean radiance over the training cubes, the unit the scaled heads work in.
double mean_train_radiance(const std::vector<SceneRecord>& train) {
  double total = 0.0;
  double count = 0.0;
  for (const auto& rec : train) {
    total += rec.cube.flat().sum();
    count += static_cast<double>(rec.cube.flat().size());
  }
  require(count > 0, "aux training: empty cube set");
  const double scale = total / count;
  require(scale > 0, "aux training: mean radiance must be positive");
  return scale;
}

ad::NodeId build_propnet_loss(Ctx<double>& ctx, const PropNetConfig& cfg,
                              const Mat& pixels_scaled, const AtmosphereParams& atm,
                              double beta, double rad_scale) {
  auto& t = ctx.tape;
  const ad::NodeId x = t.constant(pixels_scaled);
  const ad::NodeId c = propnet_encode_nodes(ctx, cfg, kPropPrefix, x);
  const PropCurveNodes curves = propnet_decode_nodes(ctx, cfg, kPropPrefix, c);

  auto mse_to = [&](ad::NodeId node, const Vec& truth) {
    return t.mean_all(t.square(t.sub(node, t.constant(truth))));
  };
  const ad::NodeId curve_mse =
      t.add(t.add(mse_to(curves.tau, atm.tau), mse_to(curves.up_scaled, atm.upwelling / rad_scale)),
            t.add(mse_to(curves.down_scaled, atm.downwelling / rad_scale),
                  mse_to(curves.bb_scaled, atm.blackbody / rad_scale)));

  // Flat-emitter propagation, alpha = 1, no background:
  //   f = tau (0.5 B + 0.5 L_d) + L_u, linear in the radiance curves, so the
  // scaled-units form uses the scaled heads directly.
  const ad::NodeId f_hat =
      t.add(t.cmul(curves.tau,
                   t.scale(t.add(curves.bb_scaled, curves.down_scaled), 0.5)),
            curves.up_scaled);
  const EmissivitySpectrum flat_eps(atm.grid, Vec::Constant(atm.size(), 0.5));
  const Vec f_true = target_radiance(flat_eps, atm).values / rad_scale;
  const ad::NodeId prop_mse = mse_to(f_hat, f_true);

  return t.add(t.scale(curve_mse, 1.0 - beta), t.scale(prop_mse, beta));
}

ad::NodeId build_bgnet_loss(Ctx<double>& ctx, const BgNetConfig& cfg, const Mat& bg_scaled) {
  auto& t = ctx.tape;
  const ad::NodeId x = t.constant(bg_scaled);
  const auto [c, recon] = bgnet_nodes(ctx, cfg, kBgPrefix, x);
  (void)c;
  return t.mean_all(t.square(t.sub(recon, x)));
}

template <class F>
double eval_value(const ParamBank<double>& bank, F&& build) {
  ad::Tape<double> tape;
  Ctx<double> ctx(tape, bank, false);
  return tape.val(build(ctx))(0, 0);
}

const std::string& meta_get(const std::map<std::string, std::string>& meta,
                            const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end())
    throw ValidationError("checkpoint metadata missing key '" + key + "'");
  return it->second;
}

void require_same_layout(const ParamStore& got, const ParamStore& want,
                         const std::string& what) {
  if (got.names() != want.names())
    throw ValidationError(what + ": checkpoint parameter names do not match the model layout");
  for (const auto& name : want.names()) {
    const Mat& a = got.get(name);
    const Mat& b = want.get(name);
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw ValidationError(what + ": checkpoint tensor '" + name + "' has the wrong shape");
  }
}

}  // namespace

void PropNetConfig::validate() const {
  require(r > 0, "propnet: r must be positive");
  require(d_prop > 0, "propnet: d_prop must be positive");
  require(hidden > 0, "propnet: hidden must be positive");
  require(enc_layers >= 1, "propnet: enc_layers must be >= 1");
  require(mix_layers >= 1, "propnet: mix_layers must be >= 1");
  require(head_layers >= 1, "propnet: head_layers must be >= 1");
}

MlpConfig PropNetConfig::encoder_config() const {
  return make_mlp(r, d_prop, hidden, enc_layers, activation);
}
MlpConfig PropNetConfig::mix_config() const {
  MlpConfig cfg = make_mlp(d_prop, d_prop, hidden, mix_layers, activation);
  cfg.residual = residual;
  return cfg;
}
MlpConfig PropNetConfig::head_config() const {
  MlpConfig cfg = make_mlp(d_prop, r, hidden, head_layers, activation);
  cfg.residual = residual;
  return cfg;
}

void BgNetConfig::validate() const {
  require(r > 0, "bgnet: r must be positive");
  require(d_bg > 0, "bgnet: d_bg must be positive");
  require(hidden > 0, "bgnet: hidden must be positive");
  require(n_layers >= 1, "bgnet: n_layers must be >= 1");
}

MlpConfig BgNetConfig::encoder_config() const {
  return make_mlp(r, d_bg, hidden, n_layers, activation);
}
MlpConfig BgNetConfig::decoder_config() const {
  return make_mlp(d_bg, r, hidden, n_layers, activation);
}

PropNetModel init_propnet(const PropNetConfig& cfg, const WavelengthGrid& grid,
                          std::uint64_t seed) {
  cfg.validate();
  require(grid.size() == cfg.r, "propnet: grid size must equal r");
  PropNetModel model{cfg, grid, ParamStore{}, 1.0};
  model.params.seed = seed;
  const std::string p(kPropPrefix);
  init_mlp(model.params, p + "/enc", cfg.encoder_config(), seed);
  init_mlp(model.params, p + "/m", cfg.mix_config(), seed);
  init_mlp(model.params, p + "/tau", cfg.head_config(), seed);
  init_mlp(model.params, p + "/up", cfg.head_config(), seed);
  init_mlp(model.params, p + "/down", cfg.head_config(), seed);
  init_mlp(model.params, p + "/bb", cfg.head_config(), seed);
  return model;
}

BgNetModel init_bgnet(const BgNetConfig& cfg, const WavelengthGrid& grid, std::uint64_t seed) {
  cfg.validate();
  require(grid.size() == cfg.r, "bgnet: grid size must equal r");
  BgNetModel model{cfg, grid, ParamStore{}, 1.0};
  model.params.seed = seed;
  const std::string p(kBgPrefix);
  init_mlp(model.params, p + "/enc", cfg.encoder_config(), seed);
  init_mlp(model.params, p + "/dec", cfg.decoder_config(), seed);
  return model;
}

Vec propnet_encode(const PropNetModel& model, const PixelSet& set) {
  require(set.spectra.rows() > 0, "propnet_encode: empty pixel set");
  require(static_cast<int>(set.spectra.cols()) == model.config.r,
          "propnet_encode: pixel rows do not match the model band count");
  const auto bank = ParamBank<double>::from_store(model.params);
  ad::Tape<double> tape;
  Ctx<double> ctx(tape, bank, false);
  const Mat cols = set.spectra.transpose() / model.rad_scale;
  const ad::NodeId c = propnet_encode_nodes(ctx, model.config, kPropPrefix, tape.constant(cols));
  return tape.val(c).col(0);
}

AtmosphereParams propnet_decode(const PropNetModel& model, const Vec& c_prop) {
  require(static_cast<int>(c_prop.size()) == model.config.d_prop,
          "propnet_decode: code length does not match d_prop");
  const auto bank = ParamBank<double>::from_store(model.params);
  ad::Tape<double> tape;
  Ctx<double> ctx(tape, bank, false);
  const PropCurveNodes curves =
      propnet_decode_nodes(ctx, model.config, kPropPrefix, tape.constant(Mat(c_prop)));
  const Vec tau = tape.val(curves.tau).col(0);
  const Vec up = tape.val(curves.up_scaled).col(0) * model.rad_scale;
  const Vec down = tape.val(curves.down_scaled).col(0) * model.rad_scale;
  const Vec bb = tape.val(curves.bb_scaled).col(0) * model.rad_scale;
  const double temperature = fit_planck_temperature(model.grid, bb);
  return AtmosphereParams(model.grid, tau, up, down, bb, temperature);
}

std::pair<Vec, RadianceSpectrum> bgnet_forward(const BgNetModel& model,
                                               const RadianceSpectrum& bg_mean) {
  require_same_grid(model.grid, bg_mean.grid, "bgnet_forward");
  const auto bank = ParamBank<double>::from_store(model.params);
  ad::Tape<double> tape;
  Ctx<double> ctx(tape, bank, false);
  const Vec scaled = bg_mean.values / model.rad_scale;
  const auto [c, recon] = bgnet_nodes(ctx, model.config, kBgPrefix, tape.constant(Mat(scaled)));
  return {tape.val(c).col(0),
          RadianceSpectrum(model.grid, tape.val(recon).col(0) * model.rad_scale)};
}

double propnet_loss(const PropNetModel& model, const PixelSet& set,
                    const AtmosphereParams& atm_true, double beta) {
  require(beta >= 0.0 && beta <= 1.0, "propnet_loss: beta must lie in [0, 1]");
  require(set.spectra.rows() > 0, "propnet_loss: empty pixel set");
  require(static_cast<int>(set.spectra.cols()) == model.config.r,
          "propnet_loss: pixel rows do not match the model band count");
  require_same_grid(model.grid, atm_true.grid, "propnet_loss");
  const auto bank = ParamBank<double>::from_store(model.params);
  const Mat cols = set.spectra.transpose() / model.rad_scale;
  return eval_value(bank, [&](Ctx<double>& ctx) {
    return build_propnet_loss(ctx, model.config, cols, atm_true, beta, model.rad_scale);
  });
}

double bgnet_loss(const BgNetModel& model, const RadianceSpectrum& bg_mean) {
  require_same_grid(model.grid, bg_mean.grid, "bgnet_loss");
  const auto bank = ParamBank<double>::from_store(model.params);
  const Mat scaled = bg_mean.values / model.rad_scale;
  return eval_value(bank, [&](Ctx<double>& ctx) {
    return build_bgnet_loss(ctx, model.config, scaled);
  });
}

SceneEstimate estimate_scene(const PropNetModel& propnet, const BgNetModel& bgnet,
                             const HsiCube& cube, std::uint64_t seed) {
  require_same_grid(propnet.grid, cube.grid(), "estimate_scene (propnet)");
  require_same_grid(bgnet.grid, cube.grid(), "estimate_scene (bgnet)");
  const Mat flat = flatten(cube);
  const int set_size = std::min(200, cube.n_pixels());
  const auto sets =
      sample_pixel_sets(flat, set_size, 1, derive_seed(seed, {kEstimateTag}), cube.id);
  const Vec c_prop = propnet_encode(propnet, sets[0]);
  AtmosphereParams atm_hat = propnet_decode(propnet, c_prop);

  const WhiteningModel wm = fit_whitening(flat, 0.2);
  auto [c_bg, bg_hat] = bgnet_forward(bgnet, RadianceSpectrum(cube.grid(), wm.mean));

  Vec c(c_prop.size() + c_bg.size());
  c << c_prop, c_bg;
  return SceneEstimate{std::move(atm_hat), std::move(bg_hat), c_prop, std::move(c_bg),
                       std::move(c)};
}

void AuxTrainConfig::validate() const {
  require(epochs >= 1, "aux training: epochs must be >= 1");
  require(lr_propnet > 0 && lr_bgnet > 0, "aux training: learning rates must be positive");
  require(sets_per_cube >= 1, "aux training: sets_per_cube must be >= 1");
  require(set_size >= 1, "aux training: set_size must be >= 1");
  require(batch_size >= 0, "aux training: batch_size must be >= 0");
}

AuxTrainReport train_propnet(PropNetModel& model, const std::vector<SceneRecord>& train,
                             const std::vector<SceneRecord>& val, const AuxTrainConfig& cfg) {
  cfg.validate();
  require(!train.empty(), "train_propnet: no training scenes");
  model.rad_scale = mean_train_radiance(train);

  struct SetExample {
    Mat cols_scaled;
    const AtmosphereParams* atm;
  };
  auto collect = [&](const std::vector<SceneRecord>& recs, std::uint64_t tag) {
    std::vector<SetExample> out;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      require_same_grid(model.grid, recs[i].cube.grid(), "train_propnet");
      const Mat& flat = recs[i].cube.flat();
      const int ss = std::min<int>(cfg.set_size, static_cast<int>(flat.rows()));
      const auto sets = sample_pixel_sets(flat, ss, cfg.sets_per_cube,
                                          derive_seed(cfg.seed, {tag, i}), recs[i].cube.id);
      for (const auto& s : sets) {
        out.push_back(SetExample{s.spectra.transpose() / model.rad_scale,
                                 &recs[i].atmosphere});
      }
    }
    return out;
  };
  const auto train_sets = collect(train, kPropSetTag);
  const auto val_sets = collect(val, kPropSetTag + 1);

  auto bank = ParamBank<double>::from_store(model.params);
  AdamState<double> state;
  AuxTrainReport report;
  const std::size_t n_sets = train_sets.size();
  const std::size_t bsz =
      cfg.batch_size == 0 ? n_sets : std::min<std::size_t>(cfg.batch_size, n_sets);
  std::vector<std::size_t> order(n_sets);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int e = 0; e < cfg.epochs; ++e) {
    const double beta =
        cfg.epochs > 1 ? static_cast<double>(e) / static_cast<double>(cfg.epochs - 1) : 0.0;
    // Seeded per-epoch reshuffle so mini-batch composition varies; with full
    // batch it only permutes the accumulation order.
    Rng shuffle_rng(derive_seed(cfg.seed, {kPropOrderTag, static_cast<std::uint64_t>(e)}));
    for (std::size_t i = n_sets; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
    }
    double acc = 0.0;
    for (std::size_t start = 0; start < n_sets; start += bsz) {
      const std::size_t count = std::min(bsz, n_sets - start);
      const double inv = 1.0 / static_cast<double>(count);
      GradMap<double> batch_grads;
      for (std::size_t k = 0; k < count; ++k) {
        const auto& ex = train_sets[order[start + k]];
        const auto [value, grads] = value_and_grads(bank, [&](Ctx<double>& ctx) {
          return build_propnet_loss(ctx, model.config, ex.cols_scaled, *ex.atm, beta,
                                    model.rad_scale);
        });
        acc += value;
        for (const auto& [name, g] : grads) {
          auto it = batch_grads.find(name);
          if (it == batch_grads.end()) {
            batch_grads.emplace(name, inv * g);
          } else {
            it->second += inv * g;
          }
        }
      }
      adam_step(bank, batch_grads, state, cfg.lr_propnet);
    }
    report.train_loss.push_back(acc / static_cast<double>(train_sets.size()));
    if (!val_sets.empty()) {
      double vacc = 0.0;
      for (const auto& ex : val_sets) {
        vacc += eval_value(bank, [&](Ctx<double>& ctx) {
          return build_propnet_loss(ctx, model.config, ex.cols_scaled, *ex.atm, beta,
                                    model.rad_scale);
        });
      }
      report.val_loss.push_back(vacc / static_cast<double>(val_sets.size()));
    }
  }
  bank.write_back(model.params);
  return report;
}

AuxTrainReport train_bgnet(BgNetModel& model, const std::vector<SceneRecord>& train,
                           const std::vector<SceneRecord>& val, const AuxTrainConfig& cfg) {
  cfg.validate();
  require(!train.empty(), "train_bgnet: no training scenes");
  model.rad_scale = mean_train_radiance(train);

  // One outlier-removed cube mean per scene plus per-set means for volume,
  // assembled into a single batch matrix so each epoch is one full-batch step.
  std::vector<Vec> train_vecs;
  for (std::size_t i = 0; i < train.size(); ++i) {
    require_same_grid(model.grid, train[i].cube.grid(), "train_bgnet");
    const Mat& flat = train[i].cube.flat();
    train_vecs.push_back(train[i].whitening.mean / model.rad_scale);
    const int ss = std::min<int>(cfg.set_size, static_cast<int>(flat.rows()));
    const auto sets = sample_pixel_sets(flat, ss, cfg.sets_per_cube,
                                        derive_seed(cfg.seed, {kBgSetTag, i}),
                                        train[i].cube.id);
    for (const auto& s : sets) {
      train_vecs.push_back(s.spectra.colwise().mean().transpose() / model.rad_scale);
    }
  }
  Mat train_batch(model.config.r, static_cast<int>(train_vecs.size()));
  for (std::size_t i = 0; i < train_vecs.size(); ++i) {
    train_batch.col(static_cast<int>(i)) = train_vecs[i];
  }
  Mat val_batch(model.config.r, static_cast<int>(val.size()));
  for (std::size_t i = 0; i < val.size(); ++i) {
    require_same_grid(model.grid, val[i].cube.grid(), "train_bgnet");
    val_batch.col(static_cast<int>(i)) = val[i].whitening.mean / model.rad_scale;
  }

  auto bank = ParamBank<double>::from_store(model.params);
  AdamState<double> state;
  AuxTrainReport report;
  for (int e = 0; e < cfg.epochs; ++e) {
    const auto [value, grads] = value_and_grads(bank, [&](Ctx<double>& ctx) {
      return build_bgnet_loss(ctx, model.config, train_batch);
    });
    adam_step(bank, grads, state, cfg.lr_bgnet);
    report.train_loss.push_back(value);
    if (val_batch.cols() > 0) {
      report.val_loss.push_back(eval_value(bank, [&](Ctx<double>& ctx) {
        return build_bgnet_loss(ctx, model.config, val_batch);
      }));
    }
  }
  bank.write_back(model.params);
  return report;
}

void save_propnet(const std::string& path, const PropNetModel& model) {
  std::map<std::string, std::string> meta;
  meta["model"] = "propnet";
  meta["r"] = std::to_string(model.config.r);
  meta["d_prop"] = std::to_string(model.config.d_prop);
  meta["hidden"] = std::to_string(model.config.hidden);
  meta["enc_layers"] = std::to_string(model.config.enc_layers);
  meta["mix_layers"] = std::to_string(model.config.mix_layers);
  meta["head_layers"] = std::to_string(model.config.head_layers);
  meta["residual"] = model.config.residual ? "1" : "0";
  meta["activation"] = activation_name(model.config.activation);
  meta["rad_scale"] = format_double(model.rad_scale);
  meta["lambda_min"] = format_double(model.grid.lambda_min());
  meta["lambda_max"] = format_double(model.grid.lambda_max());
  meta["n_bands"] = std::to_string(model.grid.size());
  save_checkpoint(path, model.params, meta);
}

PropNetModel load_propnet(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  const auto& meta = ck.metadata;
  if (meta_get(meta, "model") != "propnet")
    throw ValidationError("load_propnet: '" + path + "' is not a propnet checkpoint");
  PropNetConfig cfg;
  cfg.r = std::stoi(meta_get(meta, "r"));
  cfg.d_prop = std::stoi(meta_get(meta, "d_prop"));
  cfg.hidden = std::stoi(meta_get(meta, "hidden"));
  cfg.enc_layers = std::stoi(meta_get(meta, "enc_layers"));
  cfg.mix_layers = std::stoi(meta_get(meta, "mix_layers"));
  cfg.head_layers = std::stoi(meta_get(meta, "head_layers"));
  cfg.residual = meta_get(meta, "residual") == "1";
  cfg.activation = parse_activation(meta_get(meta, "activation"));
  const WavelengthGrid grid(std::stod(meta_get(meta, "lambda_min")),
                            std::stod(meta_get(meta, "lambda_max")),
                            std::stoi(meta_get(meta, "n_bands")));
  PropNetModel model = init_propnet(cfg, grid, ck.params.seed);
  require_same_layout(ck.params, model.params, "load_propnet");
  model.params = std::move(ck.params);
  model.rad_scale = std::stod(meta_get(meta, "rad_scale"));
  return model;
}

void save_bgnet(const std::string& path, const BgNetModel& model) {
  std::map<std::string, std::string> meta;
  meta["model"] = "bgnet";
  meta["r"] = std::to_string(model.config.r);
  meta["d_bg"] = std::to_string(model.config.d_bg);
  meta["hidden"] = std::to_string(model.config.hidden);
  meta["n_layers"] = std::to_string(model.config.n_layers);
  meta["activation"] = activation_name(model.config.activation);
  meta["rad_scale"] = format_double(model.rad_scale);
  meta["lambda_min"] = format_double(model.grid.lambda_min());
  meta["lambda_max"] = format_double(model.grid.lambda_max());
  meta["n_bands"] = std::to_string(model.grid.size());
  save_checkpoint(path, model.params, meta);
}

BgNetModel load_bgnet(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  const auto& meta = ck.metadata;
  if (meta_get(meta, "model") != "bgnet")
    throw ValidationError("load_bgnet: '" + path + "' is not a bgnet checkpoint");
  BgNetConfig cfg;
  cfg.r = std::stoi(meta_get(meta, "r"));
  cfg.d_bg = std::stoi(meta_get(meta, "d_bg"));
  cfg.hidden = std::stoi(meta_get(meta, "hidden"));
  cfg.n_layers = std::stoi(meta_get(meta, "n_layers"));
  cfg.activation = parse_activation(meta_get(meta, "activation"));
  const WavelengthGrid grid(std::stod(meta_get(meta, "lambda_min")),
                            std::stod(meta_get(meta, "lambda_max")),
                            std::stoi(meta_get(meta, "n_bands")));
  BgNetModel model = init_bgnet(cfg, grid, ck.params.seed);
  require_same_layout(ck.params, model.params, "load_bgnet");
  model.params = std::move(ck.params);
  model.rad_scale = std::stod(meta_get(meta, "rad_scale"));
  return model;
}

}  // namespace specret
