#include "hessmc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hessmc {

namespace {

constexpr double kPoleEps = 1e-12;    // treat radii below this as the pole itself
constexpr double kSeriesR = 1e-1;     // switch to series for sinh/sin combinations
constexpr double kRadialEps = 1e-10;  // angular part below this => radial geodesic
constexpr double kMaxWarpStep = 20.0; // warped exp refuses longer steps

double mink_dot(const Vec& a, const Vec& b) {
  double s = -a(0) * b(0);
  for (int i = 1; i < a.size(); ++i) s += a(i) * b(i);
  return s;
}

}  // namespace

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::euclidean: return "euclidean";
    case Kind::hyperbolic: return "hyperbolic";
    case Kind::sphere: return "sphere";
    case Kind::warped: return "warped";
  }
  return "?";
}

// ---- WarpProfile ----

double WarpProfile::f(double r) const {
  switch (form) {
    case Form::linear: return r;
    case Form::sinh_form: return std::sinh(r);
    case Form::sin_form: return std::sin(r);
    case Form::odd_poly: return r + c3 * r * r * r + c5 * r * r * r * r * r;
  }
  return r;
}

double WarpProfile::fp(double r) const {
  switch (form) {
    case Form::linear: return 1.0;
    case Form::sinh_form: return std::cosh(r);
    case Form::sin_form: return std::cos(r);
    case Form::odd_poly: return 1.0 + 3 * c3 * r * r + 5 * c5 * r * r * r * r;
  }
  return 1.0;
}

double WarpProfile::fpp(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form: return std::sinh(r);
    case Form::sin_form: return -std::sin(r);
    case Form::odd_poly: return 6 * c3 * r + 20 * c5 * r * r * r;
  }
  return 0.0;
}

double WarpProfile::fppp(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form: return std::cosh(r);
    case Form::sin_form: return -std::cos(r);
    case Form::odd_poly: return 6 * c3 + 60 * c5 * r * r;
  }
  return 0.0;
}

double WarpProfile::log_f_over_r(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form:
      if (r < kSeriesR) {
        const double r2 = r * r;
        return std::log1p(r2 / 6 + r2 * r2 / 120 + r2 * r2 * r2 / 5040);
      }
      return std::log(std::sinh(r) / r);
    case Form::sin_form:
      if (r < kSeriesR) {
        const double r2 = r * r;
        return std::log1p(-r2 / 6 + r2 * r2 / 120 - r2 * r2 * r2 / 5040);
      }
      return std::log(std::sin(r) / r);
    case Form::odd_poly: {
      const double r2 = r * r;
      return std::log1p(c3 * r2 + c5 * r2 * r2);
    }
  }
  return 0.0;
}

double WarpProfile::beta_minus_inv_r(double r) const {
  if (r < kPoleEps) return 0.0;
  return beta_minus_inv_r_over_r(r) * r;
}

// (f'/f - 1/r)/r, regular at r = 0 with limit f'''(0)/3.
double WarpProfile::beta_minus_inv_r_over_r(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form:
      if (r < kSeriesR) {
        const double r2 = r * r;
        return 1.0 / 3 - r2 / 45 + 2 * r2 * r2 / 945;
      }
      return (1.0 / std::tanh(r) - 1.0 / r) / r;
    case Form::sin_form:
      if (r < kSeriesR) {
        const double r2 = r * r;
        return -1.0 / 3 - r2 / 45 - 2 * r2 * r2 / 945;
      }
      return (1.0 / std::tan(r) - 1.0 / r) / r;
    case Form::odd_poly: {
      // (r f' - f)/(r^2 f): the numerator is exactly 2 c3 r^3 + 4 c5 r^5.
      const double r2 = r * r;
      return (2 * c3 * r + 4 * c5 * r2 * r) / f(r);
    }
  }
  return 0.0;
}

double WarpProfile::r_beta(double r) const {
  if (r < kPoleEps) return 1.0;
  return 1.0 + r * beta_minus_inv_r(r);
}

// d(r f'/f)/dr; the odd_poly numerator f(f'+r f'') - r f'^2 expands exactly to
// 4 c3 r^3 + 16 c5 r^5 + 4 c3 c5 r^7 (matches the sinh series term by term).
double WarpProfile::beta_plus_r_betap(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form: {
      if (r < kSeriesR) {
        const double r2 = r * r;
        return 2 * r / 3 - 4 * r2 * r / 45 + 4 * r2 * r2 * r / 315;
      }
      const double sh = std::sinh(r);
      return 1.0 / std::tanh(r) - r / (sh * sh);
    }
    case Form::sin_form: {
      if (r < kSeriesR) {
        const double r2 = r * r;
        return -2 * r / 3 - 4 * r2 * r / 45 - 4 * r2 * r2 * r / 315;
      }
      const double sn = std::sin(r);
      return 1.0 / std::tan(r) - r / (sn * sn);
    }
    case Form::odd_poly: {
      const double r2 = r * r;
      const double r3 = r2 * r;
      const double num = 4 * c3 * r3 + 16 * c5 * r3 * r2 + 4 * c3 * c5 * r3 * r2 * r2;
      const double fr = f(r);
      return num / (fr * fr);
    }
  }
  return 0.0;
}

double WarpProfile::fpp_over_f(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form: return 1.0;
    case Form::sin_form: return -1.0;
    case Form::odd_poly: {
      const double r2 = r * r;
      return (6 * c3 + 20 * c5 * r2) / (1.0 + c3 * r2 + c5 * r2 * r2);
    }
  }
  return 0.0;
}

// (1 - f'^2)/f^2; for odd_poly the numerator expands exactly to
// -(6 c3 r^2 + (10 c5 + 9 c3^2) r^4 + 30 c3 c5 r^6 + 25 c5^2 r^8).
double WarpProfile::one_minus_fp2_over_f2(double r) const {
  switch (form) {
    case Form::linear: return 0.0;
    case Form::sinh_form: return -1.0;
    case Form::sin_form: return 1.0;
    case Form::odd_poly: {
      const double r2 = r * r;
      const double num =
          -(6 * c3 + (10 * c5 + 9 * c3 * c3) * r2 + 30 * c3 * c5 * r2 * r2 +
            25 * c5 * c5 * r2 * r2 * r2);
      const double den = 1.0 + c3 * r2 + c5 * r2 * r2;
      return num / (den * den);
    }
  }
  return 0.0;
}

// ---- ModelManifold ----

ModelManifold ModelManifold::euclidean(int n) {
  ModelManifold M;
  M.kind = Kind::euclidean;
  M.n = n;
  M.kappa = 0.0;
  M.profile.form = WarpProfile::Form::linear;
  return M;
}

ModelManifold ModelManifold::hyperbolic(int n) {
  ModelManifold M;
  M.kind = Kind::hyperbolic;
  M.n = n;
  M.kappa = -1.0;
  M.profile.form = WarpProfile::Form::sinh_form;
  return M;
}

ModelManifold ModelManifold::sphere(int n) {
  ModelManifold M;
  M.kind = Kind::sphere;
  M.n = n;
  M.kappa = 1.0;
  M.profile.form = WarpProfile::Form::sin_form;
  return M;
}

ModelManifold ModelManifold::warped(int n, WarpProfile profile) {
  ModelManifold M;
  M.kind = Kind::warped;
  M.n = n;
  M.kappa = 0.0;
  M.profile = profile;
  return M;
}

Point ModelManifold::pole() const {
  if (!has_pole()) throw GeometryError("sphere has no pole");
  Point p;
  p.kind = kind;
  if (kind == Kind::euclidean) {
    p.x = Vec::Zero(n);
  } else if (kind == Kind::hyperbolic) {
    p.x = Vec::Zero(n + 1);
    p.x(0) = 1.0;
  } else {  // warped: [r, u]
    p.x = Vec::Zero(n + 1);
    p.x(1) = 1.0;
  }
  return p;
}

Point ModelManifold::point_at_radius(double r) const {
  Point p;
  p.kind = kind;
  switch (kind) {
    case Kind::euclidean:
      p.x = Vec::Zero(n);
      p.x(0) = r;
      break;
    case Kind::hyperbolic:
      p.x = Vec::Zero(n + 1);
      p.x(0) = std::cosh(r);
      p.x(1) = std::sinh(r);
      break;
    case Kind::sphere:
      p.x = Vec::Zero(n + 1);
      p.x(0) = std::cos(r);
      p.x(1) = std::sin(r);
      break;
    case Kind::warped:
      p.x = Vec::Zero(n + 1);
      p.x(0) = r;
      p.x(1) = 1.0;
      break;
  }
  return p;
}

// ---- PotentialSpec ----

PotentialSpec PotentialSpec::zero() {
  PotentialSpec p;
  p.V = [](const ModelManifold&, const Point&) { return 0.0; };
  p.sup_bound = 0.0;
  p.is_zero = true;
  return p;
}

PotentialSpec PotentialSpec::constant(double c) {
  PotentialSpec p;
  p.V = [c](const ModelManifold&, const Point&) { return c; };
  p.sup_bound = std::fabs(c);
  return p;
}

PotentialSpec PotentialSpec::capped_dsq(double cap) {
  PotentialSpec p;
  p.V = [cap](const ModelManifold& M, const Point& x) {
    const double d = pole_distance(M, x);
    return std::min(d * d, cap);
  };
  p.sup_bound = cap;
  return p;
}

// ---- metric plumbing ----

double metric_dot(const ModelManifold& M, const Point& x, const Vec& a, const Vec& b) {
  (void)x;
  if (M.kind == Kind::hyperbolic) return mink_dot(a, b);
  return a.dot(b);
}

double metric_norm(const ModelManifold& M, const Point& x, const Vec& a) {
  return std::sqrt(std::max(0.0, metric_dot(M, x, a, a)));
}

Vec tangent_project(const ModelManifold& M, const Point& x, const Vec& a) {
  switch (M.kind) {
    case Kind::euclidean:
    case Kind::warped:
      return a;
    case Kind::sphere:
      return a - a.dot(x.x) * x.x;
    case Kind::hyperbolic:
      // <x,x>_M = -1, so P(a) = a + <a,x>_M x.
      return a + mink_dot(a, x.x) * x.x;
  }
  return a;
}

void renormalize_point(const ModelManifold& M, Point& x) {
  if (M.kind == Kind::sphere) {
    x.x.normalize();
  } else if (M.kind == Kind::hyperbolic) {
    const double s = -mink_dot(x.x, x.x);
    x.x /= std::sqrt(s);
  } else if (M.kind == Kind::warped) {
    const int n = M.n;
    const double un = x.x.tail(n).norm();
    if (un > 0) x.x.tail(n) /= un;
  }
}

void reorthonormalize(const ModelManifold& M, const Point& x, Mat& frame) {
  const int n = static_cast<int>(frame.cols());
  for (int j = 0; j < n; ++j) {
    Vec c = frame.col(j);
    c = tangent_project(M, x, c);
    for (int i = 0; i < j; ++i) {
      const Vec ci = frame.col(i);
      c -= metric_dot(M, x, c, ci) * ci;
    }
    frame.col(j) = c / metric_norm(M, x, c);
  }
}

double pole_distance(const ModelManifold& M, const Point& x) {
  switch (M.kind) {
    case Kind::euclidean: return x.x.norm();
    case Kind::hyperbolic: {
      const double c = std::max(1.0, x.x(0));
      return std::acosh(c);
    }
    case Kind::warped: return x.x(0);
    case Kind::sphere: throw GeometryError("sphere has no pole");
  }
  return 0.0;
}

Vec radial_unit(const ModelManifold& M, const Point& x) {
  const double r = pole_distance(M, x);
  switch (M.kind) {
    case Kind::euclidean: {
      Vec u = Vec::Zero(M.n);
      if (r > kPoleEps) u = x.x / r;
      return u;
    }
    case Kind::hyperbolic: {
      Vec u = Vec::Zero(M.n + 1);
      if (r > kPoleEps) {
        const Point y0 = M.pole();
        // unit tangent of the geodesic from the pole: (cosh(d) x - y0)/sinh(d)
        u = (std::cosh(r) * x.x - y0.x) / std::sinh(r);
      }
      return u;
    }
    case Kind::warped: {
      Vec u = Vec::Zero(M.n);
      if (r > kPoleEps) u = x.x.tail(M.n);
      return u;
    }
    case Kind::sphere: throw GeometryError("sphere has no pole");
  }
  return Vec();
}

Mat canonical_frame(const ModelManifold& M, const Point& x) {
  const int n = M.n;
  const int ad = M.ambient_dim();
  Mat frame(ad, n);
  switch (M.kind) {
    case Kind::euclidean:
      frame = Mat::Identity(n, n);
      return frame;
    case Kind::warped: {
      frame = Mat::Identity(n, n);
      const double r = x.x(0);
      if (r > kPoleEps) {
        // radial-first: rotate the identity so that column 0 is u
        Vec u = x.x.tail(n);
        frame.col(0) = u;
        int filled = 1;
        for (int i = 0; i < n && filled < n; ++i) {
          Vec c = Vec::Zero(n);
          c(i) = 1.0;
          for (int j = 0; j < filled; ++j) c -= c.dot(frame.col(j)) * frame.col(j);
          const double nc = c.norm();
          if (nc > 1e-8) frame.col(filled++) = c / nc;
        }
      }
      return frame;
    }
    case Kind::sphere:
    case Kind::hyperbolic: {
      int filled = 0;
      // radial-first for pole manifolds away from the pole
      if (M.kind == Kind::hyperbolic && pole_distance(M, x) > 1e-9) {
        frame.col(0) = radial_unit(M, x);
        filled = 1;
      }
      for (int i = 0; i < ad && filled < n; ++i) {
        Vec c = Vec::Zero(ad);
        c(i) = 1.0;
        c = tangent_project(M, x, c);
        for (int j = 0; j < filled; ++j)
          c -= metric_dot(M, x, c, frame.col(j)) * frame.col(j);
        const double nc = metric_norm(M, x, c);
        if (nc > 1e-8) frame.col(filled++) = c / nc;
      }
      if (filled < n) throw GeometryError("frame construction failed");
      return frame;
    }
  }
  return frame;
}

// ---- distance ----

namespace {

// Geodesic state in the 2-D slice of revolution (r, phi), arclength
// parametrized: r'' = f f' phi'^2, phi'' = -2 (f'/f) r' phi'.
struct SliceState {
  double r, phi, rp, phip;
};

SliceState slice_rhs(const WarpProfile& f, const SliceState& s) {
  const double fr = f.f(s.r);
  const double fpr = f.fp(s.r);
  SliceState d;
  d.r = s.rp;
  d.phi = s.phip;
  d.rp = fr * fpr * s.phip * s.phip;
  d.phip = -2.0 * (fpr / fr) * s.rp * s.phip;
  return d;
}

SliceState rk4_step(const WarpProfile& f, const SliceState& s, double h) {
  auto add = [](const SliceState& a, const SliceState& b, double c) {
    return SliceState{a.r + c * b.r, a.phi + c * b.phi, a.rp + c * b.rp, a.phip + c * b.phip};
  };
  const SliceState k1 = slice_rhs(f, s);
  const SliceState k2 = slice_rhs(f, add(s, k1, h / 2));
  const SliceState k3 = slice_rhs(f, add(s, k2, h / 2));
  const SliceState k4 = slice_rhs(f, add(s, k3, h));
  SliceState out = s;
  out.r += h / 6 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
  out.phi += h / 6 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi);
  out.rp += h / 6 * (k1.rp + 2 * k2.rp + 2 * k3.rp + k4.rp);
  out.phip += h / 6 * (k1.phip + 2 * k2.phip + 2 * k3.phip + k4.phip);
  return out;
}

SliceState integrate_slice(const WarpProfile& f, SliceState s, double len, double hmax) {
  const int nsub = std::max(1, static_cast<int>(std::ceil(len / hmax)));
  const double h = len / nsub;
  for (int i = 0; i < nsub; ++i) s = rk4_step(f, s, h);
  return s;
}

// Arclength until the swept angle reaches psi, and r there. Shooting helper.
struct SweepResult {
  double s = -1.0;  // negative: psi not reached within s_max
  double r = 0.0;
};

SweepResult sweep_to_angle(const WarpProfile& f, double r0, double chi, double psi,
                           double s_max, double hmax) {
  SliceState s{r0, 0.0, std::cos(chi), std::sin(chi) / f.f(r0)};
  double traveled = 0.0;
  SliceState prev = s;
  while (traveled < s_max) {
    const double h = hmax;
    prev = s;
    s = rk4_step(f, s, h);
    traveled += h;
    if (s.r < 1e-9) return SweepResult{-1.0, 0.0};  // dived into the pole: treat as miss
    if (s.phi >= psi) {
      // linear interpolate the crossing inside the last substep
      const double w = (psi - prev.phi) / (s.phi - prev.phi);
      SweepResult out;
      out.s = traveled - h + w * h;
      out.r = prev.r + w * (s.r - prev.r);
      return out;
    }
  }
  return SweepResult{-1.0, s.r};
}

double warped_distance(const ModelManifold& M, const Point& a, const Point& b) {
  const WarpProfile& f = M.profile;
  const double r1 = a.x(0), r2 = b.x(0);
  if (r1 < kPoleEps) return r2;
  if (r2 < kPoleEps) return r1;
  const int n = M.n;
  double cpsi = a.x.tail(n).dot(b.x.tail(n));
  cpsi = std::clamp(cpsi, -1.0, 1.0);
  const double psi = std::acos(cpsi);
  if (psi < 1e-9) return std::fabs(r1 - r2);
  if (psi > M_PI - 1e-9) return r1 + r2;  // through the pole

  // Shoot on the initial angle chi in the totally geodesic slice through the
  // two radial directions; phi is monotone along the geodesic so the sweep is
  // well defined. rho(chi) at the crossing decreases in chi.
  const double hmax = 2e-4 * std::max(1.0, r1 + r2);
  const double s_max = 4.0 * (r1 + r2 + psi * std::max(f.f(r1), f.f(r2))) + 1.0;
  double lo = 1e-6, hi = M_PI - 1e-6;
  // ensure bracketing: rho(lo) > r2 (or miss = +inf), rho(hi) < r2
  for (int it = 0; it < 200; ++it) {
    const double chi = 0.5 * (lo + hi);
    const SweepResult res = sweep_to_angle(f, r1, chi, psi, s_max, hmax);
    const double rho = (res.s < 0) ? std::numeric_limits<double>::infinity() : res.r;
    if (rho > r2)
      lo = chi;
    else
      hi = chi;
    if (hi - lo < 1e-13) break;
  }
  const double chi = 0.5 * (lo + hi);
  const SweepResult res = sweep_to_angle(f, r1, chi, psi, s_max, hmax);
  if (res.s < 0) throw GeometryError("warped distance: shooting failed to converge");
  return res.s;
}

}  // namespace

double distance(const ModelManifold& M, const Point& x, const Point& y) {
  if (x.kind != M.kind || y.kind != M.kind)
    throw GeometryError("distance: point kind does not match the manifold");
  switch (M.kind) {
    case Kind::euclidean: return (x.x - y.x).norm();
    case Kind::sphere: {
      const double c = std::clamp(x.x.dot(y.x), -1.0, 1.0);
      return std::acos(c);
    }
    case Kind::hyperbolic: {
      const double c = std::max(1.0, -mink_dot(x.x, y.x));
      return std::acosh(c);
    }
    case Kind::warped: return warped_distance(M, x, y);
  }
  return 0.0;
}

// ---- exp and transport ----

namespace {

ExpResult exp_transport_space_form(const ModelManifold& M, const Point& x, const Mat& frame,
                                   const Vec& w) {
  ExpResult out;
  out.point = x;
  out.frame = frame;
  if (M.kind == Kind::euclidean) {
    out.point.x = x.x + w;
    return out;
  }
  const double th = metric_norm(M, x, w);
  if (th < 1e-300) return out;
  const Vec wh = w / th;
  if (M.kind == Kind::sphere) {
    out.point.x = std::cos(th) * x.x + std::sin(th) * wh;
    renormalize_point(M, out.point);
    for (int j = 0; j < frame.cols(); ++j) {
      const double c = frame.col(j).dot(wh);
      out.frame.col(j) = frame.col(j) + c * ((std::cos(th) - 1.0) * wh - std::sin(th) * x.x);
    }
  } else {  // hyperbolic
    out.point.x = std::cosh(th) * x.x + std::sinh(th) * wh;
    renormalize_point(M, out.point);
    for (int j = 0; j < frame.cols(); ++j) {
      const double c = mink_dot(frame.col(j), wh);
      out.frame.col(j) = frame.col(j) + c * ((std::cosh(th) - 1.0) * wh + std::sinh(th) * x.x);
    }
  }
  return out;
}

ExpResult exp_transport_warped(const ModelManifold& M, const Point& x, const Mat& frame,
                               const Vec& w) {
  const int n = M.n;
  const WarpProfile& f = M.profile;
  const double len = w.norm();
  ExpResult out;
  out.point = x;
  out.frame = frame;
  if (len < 1e-300) return out;
  if (len > kMaxWarpStep)
    throw GeometryError("warped exp: step too large for the geodesic integrator");

  const double r0 = x.x(0);
  Vec u0 = x.x.tail(n);

  if (r0 < kPoleEps) {
    // radial ray from the pole: gauge components are parallel
    out.point.x(0) = len;
    out.point.x.tail(n) = w / len;
    return out;
  }

  const double ar = w.dot(u0);
  Vec aperp = w - ar * u0;
  const double ang = aperp.norm();

  if (ang < kRadialEps * len) {
    // radial geodesic, possibly through the pole; gauge vectors are unchanged
    const double r1 = r0 + ar;
    if (r1 >= 0) {
      out.point.x(0) = r1;
    } else {
      out.point.x(0) = -r1;
      out.point.x.tail(n) = -u0;
    }
    return out;
  }

  const Vec tau = aperp / ang;
  SliceState s{r0, 0.0, ar / len, ang / (len * f.f(r0))};
  const double hmax = std::min(2e-4 * std::max(1.0, r0 + len), len);
  s = integrate_slice(f, s, len, hmax);
  if (s.r <= 0 || !std::isfinite(s.r))
    throw GeometryError("warped exp: geodesic integration failed (step too large)");

  const Vec u1 = std::cos(s.phi) * u0 + std::sin(s.phi) * tau;
  const Vec tau1 = -std::sin(s.phi) * u0 + std::cos(s.phi) * tau;
  out.point.x(0) = s.r;
  out.point.x.tail(n) = u1;
  renormalize_point(M, out.point);

  // In-slice transport: the unit velocity T and its in-slice normal N are
  // parallel; out-of-slice gauge components are unchanged.
  const Vec T0 = (ar * u0 + ang * tau) / len;
  const Vec N0 = (-ang * u0 + ar * tau) / len;
  const double fp1 = f.f(s.r) * s.phip;
  Vec T1 = s.rp * u1 + fp1 * tau1;
  T1.normalize();
  Vec N1 = -fp1 * u1 + s.rp * tau1;
  N1.normalize();
  for (int j = 0; j < frame.cols(); ++j) {
    const Vec v = frame.col(j);
    const double al = v.dot(T0);
    const double be = v.dot(N0);
    out.frame.col(j) = (v - al * T0 - be * N0) + al * T1 + be * N1;
  }
  return out;
}

}  // namespace

ExpResult exp_and_transport(const ModelManifold& M, const Point& x, const Mat& frame,
                            const Vec& w) {
  if (x.kind != M.kind) throw GeometryError("exp_and_transport: point kind mismatch");
  if (!w.allFinite()) throw GeometryError("exp_and_transport: non-finite step");
  if (M.kind == Kind::warped) return exp_transport_warped(M, x, frame, w);
  return exp_transport_space_form(M, x, frame, w);
}

Vec transport_vector(const ModelManifold& M, const Point& x, const Vec& w, const Vec& v) {
  Mat fr(M.ambient_dim(), 1);
  fr.col(0) = v;
  return exp_and_transport(M, x, fr, w).frame.col(0);
}

Vec log_map(const ModelManifold& M, const Point& x, const Point& y) {
  switch (M.kind) {
    case Kind::euclidean: return Vec(y.x - x.x);
    case Kind::sphere: {
      const double d = distance(M, x, y);
      if (d < 1e-14) return Vec(Vec::Zero(x.x.size()));
      return Vec((d / std::sin(d)) * (y.x - std::cos(d) * x.x));
    }
    case Kind::hyperbolic: {
      const double d = distance(M, x, y);
      if (d < 1e-14) return Vec(Vec::Zero(x.x.size()));
      return Vec((d / std::sinh(d)) * (y.x - std::cosh(d) * x.x));
    }
    case Kind::warped: {
      if (pole_distance(M, y) > 1e-12)
        throw GeometryError("warped log_map supports only the pole target");
      const double r = x.x(0);
      Vec w = Vec::Zero(M.n);
      if (r > kPoleEps) w = -r * x.x.tail(M.n);
      return w;
    }
  }
  return Vec();
}

// ---- curvature ----

namespace {

// Rotationally symmetric curvature: with B the Kulkarni-Nomizu product of the
// metric and U^b (x) U^b,
//   R(X,Y)Z = Kt (<Y,Z>X - <X,Z>Y) + (Kr - Kt) B(X,Y)Z,
//   B(X,Y)Z = <Y,U><Z,U>X - <X,U><Z,U>Y + <Y,Z><X,U>U - <X,Z><Y,U>U.
struct CurvCoef {
  double alpha = 0.0;  // K_tan
  double beta = 0.0;   // K_rad - K_tan
};

CurvCoef curv_coef(const ModelManifold& M, double r) {
  CurvCoef c;
  if (M.space_form()) {
    c.alpha = M.kappa;
    c.beta = 0.0;
    return c;
  }
  const WarpProfile& f = M.profile;
  const double Kr = -f.fpp_over_f(r);
  const double Kt = f.one_minus_fp2_over_f2(r);
  c.alpha = Kt;
  c.beta = Kr - Kt;
  return c;
}

Vec curvature_with_unit(const CurvCoef& c, const Vec& U, bool hasU, const Vec& X, const Vec& Y,
                        const Vec& Z, const std::function<double(const Vec&, const Vec&)>& dot) {
  Vec out = c.alpha * (dot(Y, Z) * X - dot(X, Z) * Y);
  if (hasU && c.beta != 0.0) {
    const double xu = dot(X, U), yu = dot(Y, U), zu = dot(Z, U);
    out += c.beta * (yu * zu * X - xu * zu * Y + dot(Y, Z) * xu * U - dot(X, Z) * yu * U);
  }
  return out;
}

}  // namespace

Vec curvature(const ModelManifold& M, const Point& x, const Vec& X, const Vec& Y, const Vec& Z) {
  auto dot = [&](const Vec& a, const Vec& b) { return metric_dot(M, x, a, b); };
  if (M.space_form()) {
    return M.kappa * (dot(Y, Z) * X - dot(X, Z) * Y);
  }
  const double r = pole_distance(M, x);
  const CurvCoef c = curv_coef(M, r);
  const bool hasU = r > kPoleEps;
  const Vec U = hasU ? radial_unit(M, x) : Vec(Vec::Zero(X.size()));
  return curvature_with_unit(c, U, hasU, X, Y, Z, dot);
}

double ricci(const ModelManifold& M, const Point& x, const Vec& u, const Vec& v) {
  if (M.space_form()) return M.kappa * (M.n - 1) * metric_dot(M, x, u, v);
  const double r = pole_distance(M, x);
  const CurvCoef c = curv_coef(M, r);
  const double Kt = c.alpha, Kr = c.alpha + c.beta;
  const double lam_rad = (M.n - 1) * Kr;
  const double lam_tan = Kr + (M.n - 2) * Kt;
  if (r < kPoleEps) return lam_rad * metric_dot(M, x, u, v);
  const Vec U = radial_unit(M, x);
  const double uu = metric_dot(M, x, u, U), vu = metric_dot(M, x, v, U);
  return lam_tan * metric_dot(M, x, u, v) + (lam_rad - lam_tan) * uu * vu;
}

double ricci_minus_2hess(const ModelManifold& M, const WeightSpec& h, const Point& x,
                         const Vec& v) {
  double out = ricci(M, x, v, v);
  if (!h.zero()) {
    if (!M.has_pole()) throw GeometryError("radial weight needs a pole");
    const double r = pole_distance(M, x);
    const double lr = h.etapp(r);
    const double lt = (2 * h.c2 + 4 * h.c4 * r * r) * M.profile.r_beta(r);  // η'β, regular
    const double vv = metric_dot(M, x, v, v);
    if (r < kPoleEps) {
      out -= 2.0 * lr * vv;
    } else {
      const Vec U = radial_unit(M, x);
      const double vu = metric_dot(M, x, v, U);
      out -= 2.0 * (lt * vv + (lr - lt) * vu * vu);
    }
  }
  return out;
}

double rho_h_min(const ModelManifold& M, const WeightSpec& h, const Point& x) {
  if (!M.has_pole() && !h.zero())
    throw GeometryError("radial weight needs a pole manifold");
  double lam_rad, lam_tan;
  if (M.space_form()) {
    lam_rad = lam_tan = M.kappa * (M.n - 1);
  } else {
    const CurvCoef c = curv_coef(M, pole_distance(M, x));
    lam_rad = (M.n - 1) * (c.alpha + c.beta);
    lam_tan = (c.alpha + c.beta) + (M.n - 2) * c.alpha;
  }
  if (!h.zero()) {
    const double r = pole_distance(M, x);
    lam_rad -= 2.0 * h.etapp(r);
    lam_tan -= 2.0 * (2 * h.c2 + 4 * h.c4 * r * r) * M.profile.r_beta(r);
  }
  return std::min(lam_rad, lam_tan);
}

// ---- Theta and Theta^h ----

namespace {

// Ricci as a frame-coordinate matrix at y (for the FD sweeps).
Mat ricci_matrix(const ModelManifold& M, const Point& y, const Mat& frame) {
  const int n = M.n;
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      out(i, j) = ricci(M, y, frame.col(i), frame.col(j));
      out(j, i) = out(i, j);
    }
  return out;
}

Mat hess_h_matrix(const ModelManifold& M, const WeightSpec& h, const Point& y, const Mat& frame) {
  const int n = M.n;
  const double r = pole_distance(M, y);
  const double lr = h.etapp(r);
  const double lt = (2 * h.c2 + 4 * h.c4 * r * r) * M.profile.r_beta(r);
  Mat out = lt * Mat::Identity(n, n);
  if (r > kPoleEps) {
    const Vec U = radial_unit(M, y);
    Vec q(n);
    for (int i = 0; i < n; ++i) q(i) = metric_dot(M, y, frame.col(i), U);
    out += (lr - lt) * q * q.transpose();
  }
  return out;
}

// Fourth-order central difference of a frame-matrix field along the geodesic
// through x in direction frame*dir, with the frame parallel-transported.
Mat fd_tensor_derivative(const ModelManifold& M, const Point& x, const Mat& frame,
                         const Vec& dir_frame, double step,
                         const std::function<Mat(const Point&, const Mat&)>& field) {
  const Vec w = frame * dir_frame;
  auto probe = [&](double s) {
    const ExpResult e = exp_and_transport(M, x, frame, Vec(s * w));
    return field(e.point, e.frame);
  };
  return (-probe(2 * step) + 8.0 * probe(step) - 8.0 * probe(-step) + probe(-2 * step)) /
         (12.0 * step);
}

// Full ∇Ric 3-tensor in frame coordinates: out[c](a,b) = (∇_{e_c} Ric)(e_a, e_b).
std::vector<Mat> grad_ricci_tensor(const ModelManifold& M, const Point& x, const Mat& frame) {
  const int n = M.n;
  const double r = pole_distance(M, x);
  const double step = 1e-3 * std::max(1.0, r);
  std::vector<Mat> out(n);
  for (int c = 0; c < n; ++c) {
    Vec dir = Vec::Zero(n);
    dir(c) = 1.0;
    out[c] = fd_tensor_derivative(M, x, frame, dir, step,
                                  [&](const Point& y, const Mat& fr) { return ricci_matrix(M, y, fr); });
  }
  return out;
}

}  // namespace

Vec cyclic_ricci(const ModelManifold& M, const Point& x, const Vec& v2, const Vec& v1) {
  const int n = M.n;
  if (M.space_form()) return Vec(Vec::Zero(x.x.size()));  // ∇Ric = 0
  const Mat frame = canonical_frame(M, x);
  Vec c1(n), c2(n);
  for (int i = 0; i < n; ++i) {
    c1(i) = metric_dot(M, x, v1, frame.col(i));
    c2(i) = metric_dot(M, x, v2, frame.col(i));
  }
  const std::vector<Mat> dric = grad_ricci_tensor(M, x, frame);
  Vec theta = Vec::Zero(n);
  for (int a = 0; a < n; ++a) {
    double t = 0.0;
    // (∇_{e_a}Ric)(v1,v2) - (∇_{v1}Ric)(e_a,v2) - (∇_{v2}Ric)(v1,e_a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t += dric[a](i, j) * c1(i) * c2(j);
    for (int c = 0; c < n; ++c)
      for (int j = 0; j < n; ++j) t -= dric[c](a, j) * c1(c) * c2(j);
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < n; ++i) t -= dric[c](i, a) * c1(i) * c2(c);
    theta(a) = t;
  }
  return frame * theta;
}

Vec hess_grad_h(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& v2,
                const Vec& v1) {
  if (h.zero()) return Vec(Vec::Zero(x.x.size()));
  if (!M.has_pole()) throw GeometryError("radial weight needs a pole");
  if (M.kind == Kind::warped) {
    // finite differences of the Hess-h field along parallel frames
    const int n = M.n;
    const Mat frame = canonical_frame(M, x);
    Vec c1(n), c2(n);
    for (int i = 0; i < n; ++i) {
      c1(i) = metric_dot(M, x, v1, frame.col(i));
      c2(i) = metric_dot(M, x, v2, frame.col(i));
    }
    const double step = 1e-3 * std::max(1.0, pole_distance(M, x));
    const Mat d = fd_tensor_derivative(
        M, x, frame, c2, step,
        [&](const Point& y, const Mat& fr) { return hess_h_matrix(M, h, y, fr); });
    return frame * Vec(d * c1);
  }
  // closed form for space forms (see theta_h_apply for the coefficients)
  const Mat frame = canonical_frame(M, x);
  StepGeom g = step_geom(M, h, x, frame);
  Vec c1(M.n), c2(M.n);
  for (int i = 0; i < M.n; ++i) {
    c1(i) = metric_dot(M, x, v1, frame.col(i));
    c2(i) = metric_dot(M, x, v2, frame.col(i));
  }
  const double a2u = g.has_q ? c2.dot(g.q) : 0.0;
  const double a1u = g.has_q ? c1.dot(g.q) : 0.0;
  Vec c1t = g.has_q ? Vec(c1 - a1u * g.q) : c1;
  Vec c2t = g.has_q ? Vec(c2 - a2u * g.q) : c2;
  Vec out = Vec::Zero(M.n);
  if (g.has_q) {
    out += (g.th_etappp * a2u * a1u) * g.q;
    out += (g.th_g2 * a2u) * c1t;
    out += g.th_c3 * (c1.dot(c2t) * g.q + a1u * c2t);
  }
  return frame * out;
}

Vec cyclic_ricci_h(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& v2,
                   const Vec& v1) {
  Vec out = 0.5 * cyclic_ricci(M, x, v2, v1);
  if (!h.zero()) {
    out += hess_grad_h(M, h, x, v2, v1);
    const double r = pole_distance(M, x);
    if (r > kPoleEps) {
      const Vec gh = h.etap(r) * radial_unit(M, x);
      out += curvature(M, x, gh, v2, v1);
    }
  }
  return out;
}

// ---- Ruse invariant, potentials, bridge drift ----

double log_ruse(const ModelManifold& M, const Point& x) {
  if (!M.has_pole()) throw GeometryError("Ruse invariant needs a pole");
  const double r = pole_distance(M, x);
  return (M.n - 1) * M.profile.log_f_over_r(r);
}

double ruse_invariant(const ModelManifold& M, const Point& x) { return std::exp(log_ruse(M, x)); }

Vec grad_log_ruse(const ModelManifold& M, const Point& x) {
  const double r = pole_distance(M, x);
  if (r < kPoleEps) return Vec(Vec::Zero(x.x.size()));
  return ((M.n - 1) * M.profile.beta_minus_inv_r(r)) * radial_unit(M, x);
}

double sc_potential(const ModelManifold& M, const Point& x) {
  if (!M.has_pole()) throw GeometryError("Phi needs a pole");
  const double r = pole_distance(M, x);
  const WarpProfile& f = M.profile;
  const double m = 0.5 * (M.n - 1);
  const double t1 = f.beta_minus_inv_r(r);
  const double t1r = f.beta_minus_inv_r_over_r(r);
  // 1/r^2 - beta^2 = -(t1^2 + 2 t1/r), regular at the pole
  const double inv2_minus_b2 = -(t1 * t1 + 2.0 * t1r);
  return 0.5 * m * ((m - 1.0) * inv2_minus_b2 - f.fpp_over_f(r));
}

double sc_potential_h(const ModelManifold& M, const WeightSpec& h, const Point& x) {
  double out = sc_potential(M, x);
  if (!h.zero()) {
    const double r = pole_distance(M, x);
    const double gp = h.etap(r);
    const double lap =
        h.etapp(r) + (M.n - 1) * (2 * h.c2 + 4 * h.c4 * r * r) * M.profile.r_beta(r);
    out += -0.5 * gp * gp - 0.5 * lap;
  }
  return out;
}

double log_k_gauss(const ModelManifold& M, double tau, const Point& x) {
  if (tau <= 0) throw GeometryError("k_tau needs tau > 0");
  const double d = pole_distance(M, x);
  return -0.5 * M.n * std::log(2 * M_PI * tau) - d * d / (2 * tau) - 0.5 * log_ruse(M, x);
}

Vec bridge_drift(const ModelManifold& M, double tau, const Point& x) {
  if (tau <= 0) throw GeometryError("bridge drift needs tau > 0");
  const double r = pole_distance(M, x);
  if (r < kPoleEps) return Vec(Vec::Zero(x.x.size()));
  const double m = 0.5 * (M.n - 1);
  const double coef = -m * M.profile.beta_minus_inv_r(r) - r / tau;
  return coef * radial_unit(M, x);
}

// ---- norms ----

namespace {

double curvature_norm_at(const ModelManifold& M, double r) {
  if (M.space_form()) return std::fabs(M.kappa) * std::sqrt(static_cast<double>(M.n - 1));
  // ‖R(.,v2)v1‖_HS depends on (a1,a2,omega): v1 = a1 U + b1 e1, v2 = a2 U +
  // b2 (cos w e1 + sin w e2); maximize on a grid with local refinement.
  const int n = M.n;
  const CurvCoef cc = curv_coef(M, r);
  auto hs2 = [&](double a1, double a2, double w) {
    Vec U = Vec::Zero(n), e1 = Vec::Zero(n), e2 = Vec::Zero(n);
    U(0) = 1;
    e1(1) = 1;
    if (n > 2) e2(2) = 1;
    const double b1 = std::sqrt(std::max(0.0, 1 - a1 * a1));
    const double b2 = std::sqrt(std::max(0.0, 1 - a2 * a2));
    Vec v1 = a1 * U + b1 * e1;
    Vec v2 = a2 * U + b2 * (std::cos(w) * e1 + (n > 2 ? std::sin(w) : 0.0) * e2);
    auto dot = [](const Vec& a, const Vec& b) { return a.dot(b); };
    double s = 0;
    for (int i = 0; i < n; ++i) {
      Vec Ei = Vec::Zero(n);
      Ei(i) = 1;
      const Vec R = curvature_with_unit(cc, U, true, Ei, v2, v1, dot);
      s += R.squaredNorm();
    }
    return s;
  };
  double best = 0;
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j)
      for (int k = 0; k <= 16; ++k)
        best = std::max(best, hs2(-1 + i / 8.0, -1 + j / 8.0, k * M_PI / 16));
  return std::sqrt(best);
}

}  // namespace

double curvature_norm(const ModelManifold& M, const Point& x) {
  const double r = M.space_form() ? 0.0 : pole_distance(M, x);
  return curvature_norm_at(M, r);
}

double cyclic_ricci_h_norm(const ModelManifold& M, const WeightSpec& h, const Point& x) {
  const int n = M.n;
  const Mat frame = canonical_frame(M, x);
  double best = 0;
  // grid over (a1, a2, omega) as in curvature_norm_at
  for (int i = 0; i <= 12; ++i)
    for (int j = 0; j <= 12; ++j)
      for (int k = 0; k <= 12; ++k) {
        const double a1 = -1 + i / 6.0, a2 = -1 + j / 6.0, w = k * M_PI / 12;
        const double b1 = std::sqrt(std::max(0.0, 1 - a1 * a1));
        const double b2 = std::sqrt(std::max(0.0, 1 - a2 * a2));
        Vec v1 = a1 * frame.col(0) + b1 * frame.col(1);
        Vec v2 = a2 * frame.col(0) +
                 b2 * (std::cos(w) * frame.col(1) +
                       (n > 2 ? std::sin(w) : 0.0) * frame.col(n > 2 ? 2 : 1));
        const Vec th = cyclic_ricci_h(M, h, x, v2, v1);
        best = std::max(best, metric_dot(M, x, th, th));
      }
  return std::sqrt(best);
}

double ball_sup_curvature_norm(const ModelManifold& M, double r_max) {
  if (M.space_form()) return std::fabs(M.kappa) * std::sqrt(static_cast<double>(M.n - 1));
  double best = 0;
  for (int i = 0; i <= 64; ++i) best = std::max(best, curvature_norm_at(M, i * r_max / 64));
  return best;
}

double ball_sup_theta_h_norm(const ModelManifold& M, const WeightSpec& h, double r_max) {
  if (M.space_form() && h.zero()) return 0.0;
  double best = 0;
  for (int i = 0; i <= 32; ++i) {
    const Point x = M.point_at_radius(i * r_max / 32);
    best = std::max(best, cyclic_ricci_h_norm(M, h, x));
  }
  return best;
}

double ball_sup_K(const ModelManifold& M, const WeightSpec& h, double r_max) {
  double worst = 0;
  for (int i = 0; i <= 64; ++i) {
    const Point x = M.point_at_radius(i * r_max / 64);
    worst = std::min(worst, rho_h_min(M, h, x));
  }
  return -worst;
}

// ---- StepGeom ----

StepGeom step_geom(const ModelManifold& M, const WeightSpec& h, const Point& x, const Mat& frame) {
  StepGeom g;
  if (!M.has_pole() && !h.zero())
    throw GeometryError("radial weight needs a pole manifold");
  const int n = M.n;
  g.n = n;
  const double r = M.has_pole() ? pole_distance(M, x) : 0.0;
  g.r = r;

  double ric_rad, ric_tan;
  const CurvCoef cc = curv_coef(M, r);
  g.c_alpha = cc.alpha;
  g.c_beta = cc.beta;
  ric_rad = (n - 1) * (cc.alpha + cc.beta);
  ric_tan = (cc.alpha + cc.beta) + (n - 2) * cc.alpha;

  double hess_rad = 0, hess_tan = 0;
  if (!h.zero()) {
    hess_rad = h.etapp(r);
    hess_tan = (2 * h.c2 + 4 * h.c4 * r * r) * M.profile.r_beta(r);
    g.etap = h.etap(r);
    const double t1 = M.profile.beta_minus_inv_r(r);
    const double rb = M.profile.r_beta(r);
    // η''β + η'β' = β(η'' - η'/r) + (η'/r)(β + rβ'), all factors regular:
    const double etapp_m = 8 * h.c4 * r * r;          // η'' - η'/r
    const double etap_over_r = 2 * h.c2 + 4 * h.c4 * r * r;
    double beta_times = 0;
    if (r > kPoleEps) beta_times = (etapp_m / r) * rb;  // β(η''-η'/r) = (η''-η'/r)/r * rβ
    g.th_g2 = beta_times + etap_over_r * M.profile.beta_plus_r_betap(r);
    // (η'' - η'β)β = [(η''-η'/r) - (η'/r)(rβ-1)]β, times β via the /r trick
    const double diff_over_r = 8 * h.c4 * r - etap_over_r * t1;  // (η''-η'β)/r
    g.th_c3 = diff_over_r * rb;
    g.th_etappp = h.etappp(r);
  }

  g.g_rad = -0.5 * ric_rad + hess_rad;
  g.g_tan = -0.5 * ric_tan + hess_tan;

  if (M.has_pole() && r > kPoleEps) {
    const Vec U = radial_unit(M, x);
    g.q = Vec(n);
    for (int i = 0; i < n; ++i) g.q(i) = metric_dot(M, x, frame.col(i), U);
    g.has_q = true;
  } else {
    g.q = Vec::Zero(n);
    g.has_q = false;
    g.g_rad = g.g_tan;  // isotropic limit at the pole
  }

  if (M.kind == Kind::warped) {
    // 1/2 Theta and, when h is present, ∇^2(∇h) both enter through finite
    // differences along parallel frames for the warped kind; the contraction
    // tensor folds the two so the transports stay uniform.
    g.theta_fd = true;
    g.theta_half.resize(n, n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec th = 0.5 * cyclic_ricci(M, x, frame.col(j), frame.col(i));
        if (!h.zero()) th += hess_grad_h(M, h, x, frame.col(j), frame.col(i));
        for (int a = 0; a < n; ++a)
          g.theta_half(a, j * n + i) = metric_dot(M, x, th, frame.col(a));
      }
    // the curvature-against-∇h term stays closed form (etap kept); suppress
    // the closed-form third-derivative coefficients
    g.th_etappp = g.th_g2 = g.th_c3 = 0.0;
  }
  return g;
}

void apply_expm_G(const StepGeom& g, double dt, Mat& A) {
  const double et = std::exp(dt * g.g_tan);
  if (!g.has_q || g.g_rad == g.g_tan) {
    A *= et;
    return;
  }
  const double ed = std::exp(dt * (g.g_rad - g.g_tan)) - 1.0;
  A = et * (A + ed * g.q * (g.q.transpose() * A)).eval();
}

Vec curvature_apply(const StepGeom& g, const Vec& a, const Vec& b, const Vec& c) {
  Vec out = g.c_alpha * (b.dot(c) * a - a.dot(c) * b);
  if (g.has_q && g.c_beta != 0.0) {
    const double au = a.dot(g.q), bu = b.dot(g.q), cu = c.dot(g.q);
    out += g.c_beta * (bu * cu * a - au * cu * b + b.dot(c) * au * g.q - a.dot(c) * bu * g.q);
  }
  return out;
}

Vec theta_h_apply(const StepGeom& g, const Vec& v2, const Vec& v1) {
  const int n = g.n;
  Vec out = Vec::Zero(n);
  if (g.theta_fd) {
    for (int a = 0; a < n; ++a) {
      double t = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) t += g.theta_half(a, j * n + i) * v2(j) * v1(i);
      out(a) = t;
    }
  }
  if (g.etap != 0.0 && g.has_q) {
    const double a2u = v2.dot(g.q), a1u = v1.dot(g.q);
    const Vec v1t = v1 - a1u * g.q;
    const Vec v2t = v2 - a2u * g.q;
    // ∇^2(∇h)(v2, v1)
    out += (g.th_etappp * a2u * a1u) * g.q + (g.th_g2 * a2u) * v1t +
           g.th_c3 * (v1.dot(v2t) * g.q + a1u * v2t);
    // R(∇h, v2)(v1) with ∇h = η' U
    Vec gh = g.etap * g.q;
    out += curvature_apply(g, gh, v2, v1);
  }
  return out;
}

Vec grad_h_frame(const StepGeom& g) {
  Vec out = Vec::Zero(g.n);
  if (g.etap != 0.0 && g.has_q) out = g.etap * g.q;
  return out;
}

CurvaturePack curvature_pack(const ModelManifold& M, const WeightSpec& h, const Point& x) {
  CurvaturePack p;
  p.M = &M;
  p.x = x;
  p.frame = canonical_frame(M, x);
  const int n = M.n;
  p.ric_sharp.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p.ric_sharp(i, j) = ricci(M, x, p.frame.col(i), p.frame.col(j));
  p.R_norm = curvature_norm(M, x);
  p.theta_h_norm = cyclic_ricci_h_norm(M, h, x);
  return p;
}

double weight_h(const ModelManifold& M, const WeightSpec& h, const Point& x) {
  if (h.zero()) return 0.0;
  return h.eta(pole_distance(M, x));
}

}  // namespace hessmc
