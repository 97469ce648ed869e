#include "hec/detectors/gaussian.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <string>

#include "hec/types.hpp"

namespace hec::detectors {

double logpd(const GaussianErrorModel& model, const Vec& error) {
  if (error.size() != model.mu.size()) {
    throw ShapeError("error vector has dimension " + std::to_string(error.size()) +
                     ", model expects " + std::to_string(model.mu.size()));
  }
  const Eigen::MatrixXd sigma_cm = model.sigma;
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma_cm);
  const Vec diff = error - model.mu;
  const Vec solved = llt.solve(diff);
  double log_det = 0.0;
  const auto& l = llt.matrixL();
  for (int i = 0; i < model.sigma.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  const double d = static_cast<double>(model.mu.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det + diff.dot(solved));
}

GaussianErrorModel fit_gaussian(const Mat& errors, double initial_ridge) {
  if (errors.rows() == 0) throw DataError("cannot fit an error model on zero points");
  if (initial_ridge < 0.0) throw ConfigError("ridge must be >= 0");

  GaussianErrorModel model;
  const double n = static_cast<double>(errors.rows());
  model.mu = errors.colwise().mean().transpose();
  Mat centered = errors.rowwise() - model.mu.transpose();
  Mat cov = (centered.transpose() * centered) / n;  // population covariance

  const int d = static_cast<int>(cov.rows());
  double ridge = initial_ridge;
  while (true) {
    Mat conditioned = cov + ridge * Mat::Identity(d, d);
    const Eigen::MatrixXd cond_cm = conditioned;
    const Eigen::LLT<Eigen::MatrixXd> llt(cond_cm);
    if (conditioned.allFinite() && llt.info() == Eigen::Success) {
      model.sigma = std::move(conditioned);
      model.ridge = ridge;
      break;
    }
    if (ridge == 0.0) {
      ridge = 1e-6;
    } else {
      ridge *= 10.0;
    }
    if (ridge > 1e-2) {
      throw NumericError("covariance is singular even at ridge 1e-2");
    }
  }

  model.threshold_logpd = 0.0;
  for (int r = 0; r < errors.rows(); ++r) {
    const double lp = logpd(model, errors.row(r).transpose());
    if (r == 0 || lp < model.threshold_logpd) model.threshold_logpd = lp;
  }
  return model;
}

}  // namespace hec::detectors
