#pragma once

#include <functional>
#include <vector>

#include "hessmc/mc.hpp"
#include "hessmc/transport.hpp"

namespace hessmc {

using ScalarField = std::function<double(const ModelManifold&, const Point&)>;

// All estimates are taken in the canonical frame at x0; matrix entries (i, j)
// correspond to the direction pair (e_i, e_j) of that frame.

// dP_t^h f(v) = (1/t) E[f(x_t) int_0^t <W_s(v), u_s dB_s>], one walk per path.
McEstimate grad_semigroup(const ModelManifold& M, const WeightSpec& h, const ScalarField& f,
                          const Point& x0, double t, const RunParams& rp);

// Hess P_t^h f(v1,v2) = E[f(x_t) N_t] + (2/t) E[f(x_t) int_0^{t/2} <d{x}, W2>].
McEstimate hess_semigroup(const ModelManifold& M, const WeightSpec& h, const ScalarField& f,
                          const Point& x0, double t, const RunParams& rp);

// Second-order Feynman-Kac: the potential is shifted to vanish at x0
// internally and the shift is undone in the returned value.
McEstimate hess_feynman_kac(const ModelManifold& M, const WeightSpec& h, const PotentialSpec& V,
                            const ScalarField& f, const Point& x0, double t, const RunParams& rp);

// Elementary-formula kernel estimate
// p_T^{h,V}(x0,y0) = k_T e^{h(y0)-h(x0)} E[exp(int (Phi^h - V)(x~_s) ds)].
McEstimate kernel_elementary(const ModelManifold& M, const WeightSpec& h, const PotentialSpec& V,
                             const Point& x0, double T, const RunParams& rp);

struct GradKernelResult {
  McEstimate dp;        // nabla p_T^h(., y0) components
  McEstimate grad_log;  // nabla log p_T^h, self-normalized on shared paths
};
GradKernelResult grad_kernel(const ModelManifold& M, const WeightSpec& h, const Point& x0,
                             double T, const RunParams& rp);

struct HessKernelResult {
  // E-side of the k_T-relative Hessian formula (multiply by
  // k_T e^{h(y0)-h(x0)-V(x0)T} for nabla d p).
  McEstimate ktrel;
  // Self-normalized ratio nabla d p / p with delta-method errors.
  McEstimate hess_over_p;
  // nabla log p (valid when V = 0), shared paths.
  McEstimate grad_log;
  // nabla d log p = nabla d p / p - grad log p (x) grad log p; errors by
  // entrywise propagation treating the two ratio estimates as independent.
  MatrixXd log_hess;
  MatrixXd log_hess_se;
  double theta_scale = 1.0;
};
HessKernelResult hess_kernel(const ModelManifold& M, const WeightSpec& h, const PotentialSpec& V,
                             const Point& x0, double T, const RunParams& rp,
                             double theta_scale = 1.0);
// Same paths evaluated under several Theta^h source conventions at once (the
// theta-sourced transport component is linear in the convention).
std::vector<HessKernelResult> hess_kernel_multi(const ModelManifold& M, const WeightSpec& h,
                                                const PotentialSpec& V, const Point& x0, double T,
                                                const RunParams& rp,
                                                const std::vector<double>& theta_scales);

// Bridge discretization used by the kernel estimators for a given RunParams.
BridgeSpec bridge_spec_for(double T, const RunParams& rp);

}  // namespace hessmc
