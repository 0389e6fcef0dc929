#pragma once

#include <functional>
#include <string>

#include "specret/nn.hpp"
#include "specret/param_store.hpp"

namespace specret {

/// Outcome of an analytic-vs-finite-difference sweep over every parameter.
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_row = 0;
  int worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double tol = 0.0;
  bool pass = false;

  std::string describe() const;
};

/// Deliberate corruption of one analytic gradient entry, for verifying that
/// the checker actually detects broken adjoints.
struct FaultInjection {
  std::string param;
  int row = 0;
  int col = 0;
  double delta = 1e-2;
};

/// Central finite differences (step h) against the supplied analytic
/// gradients; relative error per entry is |a-n| / max(1, |a|, |n|).
/// `loss` must be a pure function of the parameter values.
GradCheckReport finite_diff_check(const std::function<double(const ParamStore&)>& loss,
                                  const ParamStore& params, const GradMap<double>& analytic,
                                  double h = 1e-5, double tol = 1e-5,
                                  const FaultInjection* fault = nullptr);

}  // namespace specret
