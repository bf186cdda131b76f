#include "hessmc/transport.hpp"

#include <cmath>

namespace hessmc {

TransportIntegrator::TransportIntegrator(const ModelManifold& M, const WeightSpec& h,
                                         const PathRecord& path)
    : TransportIntegrator(M, h, path, Options{}) {}

TransportIntegrator::TransportIntegrator(const ModelManifold& M, const WeightSpec& h,
                                         const PathRecord& path, Options opt)
    : M_(&M), h_(&h), path_(&path), opt_(opt), n_(path.n) {
  A_ = Mat::Identity(n_, n_);
  if (opt_.evolve_w2) {
    a2_base_ = PairMat::Zero(n_, n_ * n_);
    a2_theta_ = PairMat::Zero(n_, n_ * n_);
  }
  ito_increments(M, h, path, dM_);
}

void TransportIntegrator::enable_phi_tracking() {
  track_phi_ = true;
  phi_prev_ = sc_potential_h(*M_, *h_, path_->x[0]);
}

PairMat TransportIntegrator::W2() const { return W2(opt_.theta_scale); }

PairMat TransportIntegrator::W2(double theta_scale) const {
  return a2_base_ + theta_scale * a2_theta_;
}

void TransportIntegrator::advance() {
  const int k = k_;
  const double delta = path_->dt[k];
  const StepGeom g = step_geom(*M_, *h_, path_->x[k], path_->frame[k]);
  const Vec& dM = dM_[k];

  if (opt_.evolve_w2) {
    // Euler-Maruyama at the left endpoint, W evaluated at t_k.
    // Homogeneous part: a2 += dt * G a2 with G = g_tan I + (g_rad - g_tan) q q^T.
    auto drift_apply = [&](PairMat& a2) {
      if (g.has_q && g.g_rad != g.g_tan) {
        a2 += delta * (g.g_tan * a2 + (g.g_rad - g.g_tan) * g.q * (g.q.transpose() * a2)).eval();
      } else {
        a2 *= 1.0 + delta * g.g_tan;
      }
    };
    drift_apply(a2_base_);
    const bool theta_active = g.theta_fd || g.etap != 0.0;
    if (theta_active) drift_apply(a2_theta_);
    for (int j = 0; j < n_; ++j) {
      const Vec Wv2 = A_.col(j);
      for (int i = 0; i < n_; ++i) {
        const Vec Wv1 = A_.col(i);
        const int col = j * n_ + i;
        a2_base_.col(col) += curvature_apply(g, dM, Wv2, Wv1);
        if (theta_active) a2_theta_.col(col) += delta * theta_h_apply(g, Wv2, Wv1);
      }
    }
  }

  apply_expm_G(g, delta, A_);
  bound_log_ += delta * 2.0 * std::max(g.g_rad, g.g_tan);
  if (track_phi_) {
    const double cur = sc_potential_h(*M_, *h_, path_->x[k + 1]);
    phi_int_ += 0.5 * (phi_prev_ + cur) * delta;
    phi_prev_ = cur;
  }
  ++k_;
}

TransportTrace evolve_W(const ModelManifold& M, const WeightSpec& h, const PathRecord& path) {
  TransportIntegrator::Options opt;
  opt.evolve_w2 = false;
  TransportIntegrator it(M, h, path, opt);
  TransportTrace tr;
  tr.n = path.n;
  tr.W.push_back(it.W());
  tr.bound_log.push_back(0.0);
  while (!it.at_end()) {
    it.advance();
    tr.W.push_back(it.W());
    tr.bound_log.push_back(it.bound_log());
  }
  return tr;
}

TransportTrace evolve_W2(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                         const Vec& v1, const Vec& v2, double sign_convention) {
  TransportIntegrator::Options opt;
  opt.theta_scale = sign_convention;
  TransportIntegrator it(M, h, path, opt);
  TransportTrace tr;
  tr.n = path.n;
  const int n = path.n;
  auto extract = [&](const PairMat& a2) {
    // bilinear in (v1, v2): contract the pair tensor
    Vec out = Vec::Zero(n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out += v1(i) * v2(j) * a2.col(j * n + i);
    return out;
  };
  tr.W.push_back(it.W());
  tr.bound_log.push_back(0.0);
  tr.W2.push_back(extract(it.W2()));
  while (!it.at_end()) {
    it.advance();
    tr.W.push_back(it.W());
    tr.bound_log.push_back(it.bound_log());
    tr.W2.push_back(extract(it.W2()));
  }
  return tr;
}

double ito_integral(const ModelManifold& M, const WeightSpec& h, const PathRecord& path, double a,
                    double b, const std::vector<Vec>& weight) {
  if (a > b) throw NumericError("ito_integral: need a <= b");
  std::vector<Vec> dM;
  ito_increments(M, h, path, dM);
  double s = 0;
  for (int k = 0; k < path.steps(); ++k) {
    if (path.t[k] + 1e-15 < a || path.t[k] >= b - 1e-15) continue;
    s += dM[k].dot(weight[k]);
  }
  return s;
}

}  // namespace hessmc
