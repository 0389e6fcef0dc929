#pragma once

#include <cmath>
#include <map>
#include <string>

#include "specret/nn.hpp"
#include "specret/param_store.hpp"

namespace specret {

/// First/second-moment accumulators plus the step counter.
template <class S>
struct AdamState {
  int t = 0;
  std::map<std::string, ad::Mx<S>> m, v;
};

/// One Adam step with decoupled L2 weight decay. Iterates parameters in bank
/// order, so updates are deterministic. Missing moment tensors start at zero.
template <class S>
void adam_step(ParamBank<S>& params, const GradMap<S>& grads, AdamState<S>& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
               double weight_decay = 0.0) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, state.t);
  const double bc2 = 1.0 - std::pow(beta2, state.t);
  for (const auto& name : params.names) {
    ad::Mx<S>& p = params.at(name);
    const auto git = grads.find(name);
    if (git == grads.end()) throw DomainError("adam_step: missing gradient for " + name);
    const ad::Mx<S>& g = git->second;
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw ShapeError("adam_step: gradient shape mismatch for " + name);
    if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient for " + name);

    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.size() == 0) m = ad::Mx<S>::Zero(p.rows(), p.cols());
    if (v.size() == 0) v = ad::Mx<S>::Zero(p.rows(), p.cols());

    m = static_cast<S>(beta1) * m + static_cast<S>(1.0 - beta1) * g;
    v = (static_cast<S>(beta2) * v.array() +
         static_cast<S>(1.0 - beta2) * g.array().square())
            .matrix();
    if (weight_decay != 0.0) p -= static_cast<S>(lr * weight_decay) * p;
    const auto m_hat = m.array() / static_cast<S>(bc1);
    const auto v_hat = v.array() / static_cast<S>(bc2);
    p.array() -= static_cast<S>(lr) * m_hat / (v_hat.sqrt() + static_cast<S>(eps));
  }
}

/// Serializes the optimizer state as tensors under "optimizer/" (the step
/// counter rides along as a 1x1 tensor). Values are stored in f64, which is
/// lossless for both working precisions.
template <class S>
void adam_state_to_store(const AdamState<S>& state, ParamStore& out) {
  Mat t(1, 1);
  t(0, 0) = static_cast<double>(state.t);
  out.add("optimizer/t", t);
  for (const auto& [name, m] : state.m) {
    out.add("optimizer/m/" + name, m.template cast<double>());
  }
  for (const auto& [name, v] : state.v) {
    out.add("optimizer/v/" + name, v.template cast<double>());
  }
}

template <class S>
AdamState<S> adam_state_from_store(const ParamStore& store) {
  AdamState<S> state;
  if (store.has("optimizer/t")) {
    state.t = static_cast<int>(store.get("optimizer/t")(0, 0));
  }
  const ParamStore opt = store.sub_store("optimizer");
  for (const auto& name : opt.names()) {
    if (name.rfind("m/", 0) == 0) {
      state.m[name.substr(2)] = opt.get(name).cast<S>();
    } else if (name.rfind("v/", 0) == 0) {
      state.v[name.substr(2)] = opt.get(name).cast<S>();
    }
  }
  return state;
}

}  // namespace specret
