#pragma once

#include "hessmc/estimators.hpp"

namespace hessmc {

// Closed-form heat kernels for the generator (1/2) Laplacian:
// euclidean any n; hyperbolic n = 3 only.
double exact_kernel(Kind kind, int n, double t, double d);
double exact_log_kernel(Kind kind, int n, double t, double d);

struct FdMatrix {
  MatrixXd value;
  MatrixXd budget;  // Richardson truncation estimate per entry
};
struct FdVector {
  VectorXd value;
  VectorXd budget;
};

// Covariant Hessian / gradient of a scalar field by second differences along
// geodesic probes from x0 (normal coordinates in the canonical frame),
// Richardson-extrapolated from steps s and s/2.
FdMatrix fd_hessian(const ModelManifold& M, const ScalarField& field, const Point& x0,
                    double step);
FdVector fd_gradient(const ModelManifold& M, const ScalarField& field, const Point& x0,
                     double step);

struct FdMcResult {
  MatrixXd value;
  MatrixXd se;
  MatrixXd fd_budget;
  long n_paths = 0;
};

// Reference Hessian of the plain Feynman-Kac semigroup E[f(x_t) e^{-int V}]
// at x0: the finite-difference combination is formed per path with common
// random numbers across probe starting points.
FdMcResult nested_fk_reference(const ModelManifold& M, const WeightSpec& h,
                               const PotentialSpec& V, const ScalarField& f, double t,
                               const Point& x0, double step, const RunParams& rp,
                               bool common_rn = true);

struct KernelFdReference {
  MatrixXd hess_over_p;  // nabla d p / p at x0
  MatrixXd se;
  MatrixXd fd_budget;
  VectorXd grad_log;
  VectorXd grad_se;
  VectorXd grad_budget;
};

// Reference kernel derivatives by finite differences of elementary-formula
// estimates across probe starting points, common random numbers per path.
KernelFdReference fd_kernel_reference(const ModelManifold& M, const WeightSpec& h, double T,
                                      const Point& x0, double step, const RunParams& rp);

}  // namespace hessmc
