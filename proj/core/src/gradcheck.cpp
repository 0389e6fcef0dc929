#include "specret/gradcheck.hpp"

#include <cmath>
#include <sstream>

namespace specret {

std::string GradCheckReport::describe() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << " max rel err " << max_rel_err << " (tol " << tol << ")";
  if (!worst_param.empty()) {
    out << " at " << worst_param << "[" << worst_row << "," << worst_col << "]"
        << " analytic " << analytic << " numeric " << numeric;
  }
  return out.str();
}

GradCheckReport finite_diff_check(const std::function<double(const ParamStore&)>& loss,
                                  const ParamStore& params, const GradMap<double>& analytic,
                                  double h, double tol, const FaultInjection* fault) {
  require(h > 0.0, "finite_diff_check: h must be positive");
  GradCheckReport report;
  report.tol = tol;

  ParamStore work;
  work.seed = params.seed;
  for (const auto& name : params.names()) work.add(name, params.get(name));

  for (const auto& name : params.names()) {
    const auto it = analytic.find(name);
    if (it == analytic.end())
      throw DomainError("finite_diff_check: missing analytic gradient for " + name);
    const Mat& grad = it->second;
    Mat& value = work.mutable_get(name);
    if (grad.rows() != value.rows() || grad.cols() != value.cols())
      throw ShapeError("finite_diff_check: gradient shape mismatch for " + name);

    for (Eigen::Index i = 0; i < value.rows(); ++i) {
      for (Eigen::Index j = 0; j < value.cols(); ++j) {
        const double saved = value(i, j);
        value(i, j) = saved + h;
        const double up = loss(work);
        value(i, j) = saved - h;
        const double down = loss(work);
        value(i, j) = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
          std::ostringstream msg;
          msg << "finite_diff_check: non-finite loss probing " << name << "[" << i << "," << j
              << "]";
          throw NumericError(msg.str());
        }
        const double numeric = (up - down) / (2.0 * h);
        double a = grad(i, j);
        if (fault != nullptr && fault->param == name && fault->row == i && fault->col == j) {
          a += fault->delta;
        }
        const double rel =
            std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_param = name;
          report.worst_row = static_cast<int>(i);
          report.worst_col = static_cast<int>(j);
          report.analytic = a;
          report.numeric = numeric;
        }
      }
    }
  }
  report.pass = report.max_rel_err < tol;
  return report;
}

}  // namespace specret
