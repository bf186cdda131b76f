#pragma once

#include <functional>
#include <optional>

#include "hessmc/common.hpp"
#include "hessmc/rng.hpp"

namespace hessmc {

struct RunParams {
  long n_paths = 10000;
  int steps = 256;
  int workers = 1;
  int r_nodes = 64;
  SeedSpec seed;
};

// Sum and sum-of-squares of a per-path payload vector over path indices
// [0, n_paths). Reduction is a fixed pairwise tree over 512-path blocks, so
// the result is bit-identical for any worker count and scheduling.
struct Accumulated {
  Eigen::ArrayXd sum;
  Eigen::ArrayXd sumsq;
  long n = 0;

  double mean(int c) const { return sum(c) / static_cast<double>(n); }
  // Standard error of the mean of component c.
  double se(int c) const {
    const double m = mean(c);
    const double var = std::max(0.0, sumsq(c) / static_cast<double>(n) - m * m);
    return std::sqrt(var / static_cast<double>(n));
  }
  // Sample covariance of components a and b given their raw product in c_ab.
  double cov(int a, int b, int c_ab) const {
    return sum(c_ab) / static_cast<double>(n) - mean(a) * mean(b);
  }
};

Accumulated mc_accumulate(long n_paths, int workers, int payload_dim,
                          const std::function<void(long path, double* payload)>& fn);

// Delta-method standard error for the ratio mean(num)/mean(den).
double ratio_se(const Accumulated& acc, int c_num, int c_den, int c_cross);

// A scalar-, vector- or matrix-shaped Monte Carlo estimate.
struct McEstimate {
  MatrixXd value;
  MatrixXd se;
  long n_paths = 0;
  SeedSpec seed;
  // ratio estimators: numerator/denominator means and the delta-method detail
  std::optional<double> den_mean;
  std::optional<double> den_se;

  double scalar() const { return value(0, 0); }
  double scalar_se() const { return se(0, 0); }
};

}  // namespace hessmc
