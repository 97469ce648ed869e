#pragma once

#include "hec/tensor.hpp"

namespace hec::detectors {

// Gaussian model over per-point reconstruction errors. sigma is stored
// already conditioned (ridge added to the diagonal), so scoring never fails.
struct GaussianErrorModel {
  Vec mu;
  Mat sigma;
  double threshold_logpd = 0.0;  // minimum log density seen on normal training points
  double ridge = 0.0;

  int dim() const { return static_cast<int>(mu.size()); }
};

// log N(e; mu, sigma) = -0.5 * (d*ln(2pi) + ln det(sigma) + (e-mu)' sigma^-1 (e-mu))
double logpd(const GaussianErrorModel& model, const Vec& error);

// Population mean/covariance over pooled error rows, with automatic ridge
// escalation (x10 up to 1e-2) if the Cholesky factorization fails.
GaussianErrorModel fit_gaussian(const Mat& errors, double initial_ridge = 1e-6);

}  // namespace hec::detectors
