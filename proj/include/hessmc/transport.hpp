#pragma once

#include <vector>

#include "hessmc/paths.hpp"

namespace hessmc {

// Walks a path once and integrates the damped parallel translation W (matrix
// exponential steps, exact for the rank-one structure of G) and the second
// transport W2 (Euler-Maruyama) for all direction pairs at once. The
// Theta^h-sourced component of W2 is kept separately: the recursion is linear
// in the source, so any sign/scale convention is available from one sweep.
class TransportIntegrator {
 public:
  struct Options {
    bool evolve_w2 = true;
    double theta_scale = 1.0;  // coefficient on the Theta^h source in W2()
  };

  TransportIntegrator(const ModelManifold& M, const WeightSpec& h, const PathRecord& path);
  TransportIntegrator(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                      Options opt);

  int n() const { return n_; }
  int steps() const { return path_->steps(); }
  int k() const { return k_; }
  bool at_end() const { return k_ >= path_->steps(); }
  double t() const { return path_->t[k_]; }
  double dt() const { return path_->dt[k_]; }
  bool step_has_noise() const { return k_ < path_->n_noise; }

  const Mat& W() const { return A_; }
  // W2 tensor at t_k: column j*n+i holds the frame coordinates of
  // W2(e_i, e_j) under the configured theta_scale.
  PairMat W2() const;
  PairMat W2(double theta_scale) const;
  const PairMat& w2_base() const { return a2_base_; }
  const PairMat& w2_theta() const { return a2_theta_; }
  // h-martingale increment of the current step (valid before advance()).
  const Vec& ito_inc() const { return dM_[k_]; }
  // Accumulated int_0^{t_k} lambda_max(-Ric + 2 Hess h) ds.
  double bound_log() const { return bound_log_; }
  // Phi^h trapezoid over [0, t_k].
  double phi_int() const { return phi_int_; }

  void advance();

 private:
  const ModelManifold* M_;
  const WeightSpec* h_;
  const PathRecord* path_;
  Options opt_;
  int n_ = 0;
  int k_ = 0;
  Mat A_;
  PairMat a2_base_;   // curvature-sourced + homogeneous part
  PairMat a2_theta_;  // Theta^h-sourced part
  std::vector<Vec> dM_;
  double bound_log_ = 0;
  double phi_int_ = 0;
  double phi_prev_ = 0;
  bool track_phi_ = false;

 public:
  void enable_phi_tracking();
};

// Full trace of W along the path (frame coordinates A_k plus the running
// pathwise damped bound) and optionally of W2 for one direction pair.
struct TransportTrace {
  int n = 0;
  std::vector<Mat> W;          // size N+1, W[0] = I
  std::vector<double> bound_log;  // size N+1
  std::vector<Vec> W2;         // size N+1 when requested, frame coords
};

TransportTrace evolve_W(const ModelManifold& M, const WeightSpec& h, const PathRecord& path);
TransportTrace evolve_W2(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                         const Vec& v1, const Vec& v2, double sign_convention = 1.0);

// Left-endpoint Ito sum over grid times in [a, b): sum <dM_k, weight_k>.
// weight_k is given in frame coordinates at t_k; the pinned step contributes
// nothing (its increment is zero).
double ito_integral(const ModelManifold& M, const WeightSpec& h, const PathRecord& path, double a,
                    double b, const std::vector<Vec>& weight);

}  // namespace hessmc
