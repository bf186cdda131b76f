#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessmc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Stack-allocated small vectors/matrices for per-step work. Ambient dimension
// is at most n+1 and n <= 7 is enforced at configuration time.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 8, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 8, 8>;
// n x (n*n) storage for the second-transport tensor: column j*n+i holds the
// frame coordinates of W2(e_i, e_j).
using PairMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 8, 64>;

class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Pairwise (cascade) summation with a fixed reduction tree. The tree depends
// only on the index range, so results are reproducible for any scheduling of
// the producers.
inline double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double sqr(double x) { return x * x; }

}  // namespace hessmc
