#pragma once

#include <functional>
#include <optional>
#include <string>

#include "hessmc/common.hpp"

namespace hessmc {

enum class Kind { euclidean, hyperbolic, sphere, warped };

std::string kind_name(Kind k);

// Rotationally symmetric warping profile f with exact derivative evaluators.
// Smoothness of the metric at the pole needs f(0)=0, f'(0)=1, f''(0)=0.
struct WarpProfile {
  enum class Form { linear, sinh_form, sin_form, odd_poly };
  Form form = Form::linear;
  double c3 = 0.0, c5 = 0.0;  // odd_poly: f(r) = r + c3 r^3 + c5 r^5

  double f(double r) const;
  double fp(double r) const;
  double fpp(double r) const;
  double fppp(double r) const;

  // Guarded radial combinations (regular at r = 0):
  double log_f_over_r(double r) const;          // log(f/r)
  double beta_minus_inv_r(double r) const;      // f'/f - 1/r
  double beta_minus_inv_r_over_r(double r) const;  // (f'/f - 1/r)/r
  double r_beta(double r) const;                // r f'/f
  double beta_plus_r_betap(double r) const;     // d(r f'/f)/dr = beta + r beta'
  double fpp_over_f(double r) const;            // f''/f
  double one_minus_fp2_over_f2(double r) const; // (1 - f'^2)/f^2 (tangential curvature)
};

// A point of the model manifold.
//   euclidean:  x in R^n
//   sphere:     unit vector in R^{n+1}
//   hyperbolic: hyperboloid sheet in R^{n+1}, <x,x>_Mink = -1, x0 > 0
//   warped:     [r, u] with u a unit direction in R^n (u = e1 at r = 0)
struct Point {
  Kind kind = Kind::euclidean;
  Vec x;
};

// Tangent vector carrying its base point. For the warped kind the component
// vector lives in the orthonormal polar gauge: a = a_r u + w with w ⟂ u the
// physical angular part, so the metric is the plain dot product.
struct Tangent {
  Point base;
  Vec v;
};

struct ModelManifold {
  Kind kind = Kind::euclidean;
  int n = 3;
  WarpProfile profile;  // canonical profile for the kind (r, sinh, sin, custom)
  double kappa = 0.0;   // space-form curvature constant

  static ModelManifold euclidean(int n);
  static ModelManifold hyperbolic(int n);
  static ModelManifold sphere(int n);
  static ModelManifold warped(int n, WarpProfile profile);

  bool has_pole() const { return kind != Kind::sphere; }
  bool space_form() const { return kind != Kind::warped; }
  int ambient_dim() const { return kind == Kind::euclidean ? n : n + 1; }

  Point pole() const;                  // rejects sphere
  Point point_at_radius(double r) const;  // distance r from the pole along the first axis
};

// Radial weight h(x) = eta(d(x, y0)) with eta an even polynomial; odd powers
// are excluded (r^3 is not C^3 at the pole). K is the declared bound with
// Ric - 2 Hess h >= -K on the working ball.
struct WeightSpec {
  double c2 = 0.0, c4 = 0.0;
  double K = 0.0;

  bool zero() const { return c2 == 0.0 && c4 == 0.0; }
  double eta(double r) const { return c2 * r * r + c4 * r * r * r * r; }
  double etap(double r) const { return 2 * c2 * r + 4 * c4 * r * r * r; }
  double etapp(double r) const { return 2 * c2 + 12 * c4 * r * r; }
  double etappp(double r) const { return 24 * c4 * r; }
};

struct PotentialSpec {
  std::function<double(const ModelManifold&, const Point&)> V;
  double sup_bound = 0.0;
  double holder_exponent = 1.0;

  static PotentialSpec zero();
  static PotentialSpec constant(double c);
  // V(x) = min(d(x, y0)^2, cap)
  static PotentialSpec capped_dsq(double cap);
  bool is_zero = false;
};

// ---- metric plumbing ----

double metric_dot(const ModelManifold& M, const Point& x, const Vec& a, const Vec& b);
double metric_norm(const ModelManifold& M, const Point& x, const Vec& a);
// Projects an ambient vector onto the tangent space at x (no-op for euclidean
// and for the warped gauge).
Vec tangent_project(const ModelManifold& M, const Point& x, const Vec& a);
// Deterministic orthonormal frame at x; radial-first when x is away from the
// pole of a pole manifold. Columns are tangent vectors, ambient_dim x n.
Mat canonical_frame(const ModelManifold& M, const Point& x);
// Modified Gram-Schmidt in the metric at x.
void reorthonormalize(const ModelManifold& M, const Point& x, Mat& frame);
// Snaps a point back onto its constraint set (unit sphere / hyperboloid).
void renormalize_point(const ModelManifold& M, Point& x);

// Unit radial field grad d(., y0) at x; zero vector within eps of the pole.
Vec radial_unit(const ModelManifold& M, const Point& x);
double pole_distance(const ModelManifold& M, const Point& x);

// ---- operations ----

double distance(const ModelManifold& M, const Point& x, const Point& y);

struct ExpResult {
  Point point;
  Mat frame;
};
// One geodesic step exp_x(w) with parallel transport of the frame; w is given
// in the ambient/gauge representation at x.
ExpResult exp_and_transport(const ModelManifold& M, const Point& x, const Mat& frame,
                            const Vec& w);
// Parallel transport of a single tangent vector along the geodesic s -> exp_x(s w).
Vec transport_vector(const ModelManifold& M, const Point& x, const Vec& w, const Vec& v);

// Inverse of the exponential map. Closed form on space forms; for the warped
// kind only the pole target is supported (radial geodesic).
Vec log_map(const ModelManifold& M, const Point& x, const Point& y);

// R(X,Y)Z at x, ambient representation.
Vec curvature(const ModelManifold& M, const Point& x, const Vec& X, const Vec& Y, const Vec& Z);
double ricci(const ModelManifold& M, const Point& x, const Vec& u, const Vec& v);
// (Ric - 2 Hess h)(v, v)
double ricci_minus_2hess(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& v);
// Pointwise infimum of (Ric - 2 Hess h) over unit vectors.
double rho_h_min(const ModelManifold& M, const WeightSpec& h, const Point& x);

// Cyclic sum of the covariant derivative of the Ricci tensor:
// <Theta(v2)v1, v3> = (∇_{v3}Ric)(v1,v2) - (∇_{v1}Ric)(v3,v2) - (∇_{v2}Ric)(v1,v3).
// Identically zero on space forms; computed by fourth-order finite differences
// of the Ricci field along parallel frames for the warped kind.
Vec cyclic_ricci(const ModelManifold& M, const Point& x, const Vec& v2, const Vec& v1);
// Theta^h(v2)(v1) = 1/2 Theta(v2)(v1) + ∇^2(∇h)(v2,v1) + R(∇h, v2)(v1).
Vec cyclic_ricci_h(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& v2,
                   const Vec& v1);
// Third covariant derivative term ∇^2(∇h)(v2, v1) alone.
Vec hess_grad_h(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& v2,
                const Vec& v1);

// Jacobian determinant of exp at the pole evaluated at x: (f(r)/r)^{n-1}.
double ruse_invariant(const ModelManifold& M, const Point& x);
double log_ruse(const ModelManifold& M, const Point& x);
Vec grad_log_ruse(const ModelManifold& M, const Point& x);

// Phi = 1/2 J^{1/2} Δ J^{-1/2} and Phi^h = -1/2 |∇h|^2 - 1/2 Δh + Phi.
double sc_potential(const ModelManifold& M, const Point& x);
double sc_potential_h(const ModelManifold& M, const WeightSpec& h, const Point& x);

// Gaussian-ansatz kernel k_tau(x, y0) = (2 pi tau)^{-n/2} e^{-d^2/(2 tau)} J^{-1/2}.
double log_k_gauss(const ModelManifold& M, double tau, const Point& x);
// Bridge drift ∇ log k_tau(., y0) at x (ambient representation).
Vec bridge_drift(const ModelManifold& M, double tau, const Point& x);

// Operator norms per the Hilbert-Schmidt convention:
// ‖R_x‖ = sup_{|v1|=|v2|=1} (Σ_i |R(E_i,v2)v1|^2)^{1/2}; exact |κ|√(n-1) on
// space forms, grid-maximized for the warped kind.
double curvature_norm(const ModelManifold& M, const Point& x);
double cyclic_ricci_h_norm(const ModelManifold& M, const WeightSpec& h, const Point& x);

// Suprema over the ball of radius r_max around the pole (r-grid maximization).
double ball_sup_curvature_norm(const ModelManifold& M, double r_max);
double ball_sup_theta_h_norm(const ModelManifold& M, const WeightSpec& h, double r_max);
double ball_sup_K(const ModelManifold& M, const WeightSpec& h, double r_max);

// Everything the transports need at one path point, in frame coordinates.
// G = -1/2 Ric♯ + (∇^2 h)♯ has eigenvalue g_rad on the radial direction and
// g_tan on its complement; q holds the frame coordinates of the radial unit.
struct StepGeom {
  int n = 0;
  double r = 0.0;
  Vec q;            // zero within eps of the pole (isotropic limit)
  bool has_q = false;
  double g_rad = 0.0, g_tan = 0.0;
  double c_alpha = 0.0, c_beta = 0.0;  // curvature: K_tan and K_rad - K_tan
  // Theta^h closed-form coefficients for radial h (see cyclic_ricci_h):
  double th_etappp = 0.0;  // η'''
  double th_g2 = 0.0;      // η''β + η'β'
  double th_c3 = 0.0;      // (η'' - η'β)β
  double etap = 0.0;       // η'(r), also |∇h|
  bool theta_fd = false;   // warped kind: add 1/2 Theta from the FD tensor
  PairMat theta_half;      // column j*n+i = 1/2 Theta(e_j)(e_i) in frame coords
};

StepGeom step_geom(const ModelManifold& M, const WeightSpec& h, const Point& x, const Mat& frame);

// A <- expm(dt G) A using the rank-one structure of G.
void apply_expm_G(const StepGeom& g, double dt, Mat& A);
// Frame-coordinate R(a,b)c.
Vec curvature_apply(const StepGeom& g, const Vec& a, const Vec& b, const Vec& c);
// Frame-coordinate Theta^h(v2)(v1).
Vec theta_h_apply(const StepGeom& g, const Vec& v2, const Vec& v1);
// Frame coordinates of ∇h at the point (radial).
Vec grad_h_frame(const StepGeom& g);

// Curvature data bundle at a point (test/report convenience).
struct CurvaturePack {
  const ModelManifold* M;
  Point x;
  Mat frame;
  Mat ric_sharp;  // frame coordinates
  double R_norm = 0.0;
  double theta_h_norm = 0.0;
};
CurvaturePack curvature_pack(const ModelManifold& M, const WeightSpec& h, const Point& x);

double weight_h(const ModelManifold& M, const WeightSpec& h, const Point& x);

}  // namespace hessmc
