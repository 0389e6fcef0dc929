#include "specret/whitening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specret {

namespace {

struct MeanCov {
  Vec mean;
  Mat cov;
};

MeanCov mean_cov(const Mat& x) {
  const auto n = x.rows();
  MeanCov out;
  out.mean = x.colwise().mean();
  if (n < 2) {
    // A single row carries no spread; the eigenvalue floor takes over.
    out.cov = Mat::Zero(x.cols(), x.cols());
    return out;
  }
  const Mat centered = x.rowwise() - out.mean.transpose();
  out.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return out;
}

}  // namespace

WhiteningModel fit_whitening(const Mat& pixels, double outlier_fraction) {
  const auto n = pixels.rows();
  const auto r = pixels.cols();
  require(r >= 1, "fit_whitening: no bands");
  require(std::isfinite(outlier_fraction) && outlier_fraction >= 0.0 && outlier_fraction < 1.0,
          "fit_whitening: outlier_fraction must lie in [0, 1)");
  require_finite(pixels, "fit_whitening: pixels");

  const auto n_drop =
      static_cast<Eigen::Index>(std::ceil(outlier_fraction * static_cast<double>(n)));
  const auto n_keep = n - n_drop;
  // Rank deficiency is tolerated: the eigenvalue floor below keeps the
  // transform finite even when inliers cannot span all bands.
  require(n_keep >= 1, "fit_whitening: no inlier pixels left after outlier removal");

  WhiteningModel model;
  model.outlier_fraction = outlier_fraction;
  model.inlier.assign(static_cast<std::size_t>(n), 1);

  if (n_drop > 0) {
    // Provisional statistics over everything; a ridge keeps the scoring
    // metric usable even when the provisional covariance is singular.
    const MeanCov pass1 = mean_cov(pixels);
    Mat scored = pass1.cov;
    const double ridge =
        1e-12 * (scored.trace() / static_cast<double>(r)) + 1e-30;
    scored.diagonal().array() += ridge;
    Eigen::LDLT<Mat> ldlt(scored);
    if (ldlt.info() != Eigen::Success) {
      throw NumericError("fit_whitening: provisional covariance factorization failed");
    }
    Vec dist(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec diff = pixels.row(i).transpose() - pass1.mean;
      dist[i] = diff.dot(ldlt.solve(diff));
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    // Most distant first; index order breaks ties so the mask is reproducible.
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (dist[a] != dist[b]) return dist[a] > dist[b];
      return a < b;
    });
    for (Eigen::Index k = 0; k < n_drop; ++k) {
      model.inlier[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 0;
    }
  }

  Mat kept(n_keep, r);
  Eigen::Index w = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (model.inlier[static_cast<std::size_t>(i)]) kept.row(w++) = pixels.row(i);
  }
  const MeanCov pass2 = mean_cov(kept);
  model.mean = pass2.mean;
  model.covariance = pass2.cov;

  Eigen::SelfAdjointEigenSolver<Mat> eig(pass2.cov);
  if (eig.info() != Eigen::Success) {
    throw NumericError("fit_whitening: eigendecomposition failed");
  }
  Vec lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  const double floor = 1e-10 * std::max(lambda_max, 1.0);
  model.eigen_floor = floor;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], floor);
  model.eigenvalues = lambda;
  const Mat& v = eig.eigenvectors();
  model.transform = v * lambda.array().rsqrt().matrix().asDiagonal() * v.transpose();
  return model;
}

Vec whiten(const Vec& radiance, const WhiteningModel& model) {
  if (radiance.size() != model.mean.size()) throw ShapeError("whiten: band count mismatch");
  return model.transform * (radiance - model.mean);
}

Mat whiten_rows(const Mat& pixels, const WhiteningModel& model) {
  if (pixels.cols() != model.mean.size()) throw ShapeError("whiten_rows: band count mismatch");
  return (pixels.rowwise() - model.mean.transpose()) * model.transform;
}

}  // namespace specret
