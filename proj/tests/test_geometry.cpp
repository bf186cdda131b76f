#include <doctest.h>

#include <cmath>

#include "hessmc/geometry.hpp"
#include "hessmc/rng.hpp"

using namespace hessmc;

namespace {

// Deterministic pseudo-random tangent vectors for property sweeps.
struct DirGen {
  GaussianStream g{SeedSpec{12345, 7}};
  uint64_t ctr = 0;
  Vec unit(const ModelManifold& M, const Point& x) {
    Vec v(M.ambient_dim());
    for (int i = 0; i < v.size(); ++i) v(i) = g.normal(0, ctr++);
    v = tangent_project(M, x, v);
    return Vec(v / metric_norm(M, x, v));
  }
  double uniform() { return 0.5 + 0.5 * std::erf(g.normal(1, ctr++) / std::sqrt(2.0)); }
};

Point random_point(const ModelManifold& M, DirGen& gen, double rmax) {
  if (M.kind == Kind::sphere) {
    Point p = M.point_at_radius(gen.uniform() * rmax);
    // scatter over the sphere by a couple of geodesic hops
    Mat fr = canonical_frame(M, p);
    Vec w = fr.col(1) * (gen.uniform() * 2.0);
    return exp_and_transport(M, p, fr, w).point;
  }
  Point p = M.point_at_radius(0.05 + gen.uniform() * rmax);
  Mat fr = canonical_frame(M, p);
  Vec w = fr.col(M.n - 1) * (gen.uniform() * 1.5);
  return exp_and_transport(M, p, fr, w).point;
}

// Hess h(u,v) via polarization of Ric - (Ric - 2 Hess h), public API only.
double hess_h_bilinear(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& u,
                       const Vec& v) {
  auto hess_quad = [&](const Vec& w) {
    return 0.5 * (ricci(M, x, w, w) - ricci_minus_2hess(M, h, x, w));
  };
  const Vec up = u + v, um = u - v;
  return (hess_quad(up) - hess_quad(um)) / 4.0;
}

// Independent FD oracle for (nabla_{v2} Hess^sharp h)(v1) along parallel frames.
Vec fd_hess_grad_h(const ModelManifold& M, const WeightSpec& h, const Point& x, const Vec& v2,
                   const Vec& v1) {
  const int n = M.n;
  const Mat frame = canonical_frame(M, x);
  Vec c1(n);
  for (int i = 0; i < n; ++i) c1(i) = metric_dot(M, x, v1, frame.col(i));
  const double step = 1e-3 * std::max(1.0, pole_distance(M, x));
  auto probe = [&](double s) {
    const ExpResult e = exp_and_transport(M, x, frame, Vec(s * v2));
    Mat Hm(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        Hm(i, j) = hess_h_bilinear(M, h, e.point, e.frame.col(i), e.frame.col(j));
    return Hm;
  };
  const Mat d = (-probe(2 * step) + 8.0 * probe(step) - 8.0 * probe(-step) + probe(-2 * step)) /
                (12.0 * step);
  return frame * Vec(d * c1);
}

// Closed-form grad-Ricci for rotationally symmetric metrics (test oracle for
// the FD implementation): Ric = lam_t g + (lam_r - lam_t) u (x) u.
double grad_ric_closed(const ModelManifold& M, const Point& x, const Vec& v, const Vec& a,
                       const Vec& b) {
  const WarpProfile& f = M.profile;
  const double r = pole_distance(M, x);
  const int n = M.n;
  const double fr = f.f(r), fp = f.fp(r), fpp = f.fpp(r), fppp = f.fppp(r);
  const double lr = -(n - 1) * fpp / fr;
  const double lt = -fpp / fr + (n - 2) * (1 - fp * fp) / (fr * fr);
  const double lrp = -(n - 1) * (fppp * fr - fpp * fp) / (fr * fr);
  const double ltp = -(fppp * fr - fpp * fp) / (fr * fr) +
                     (n - 2) * (-2 * fp * (fpp * fr + 1 - fp * fp)) / (fr * fr * fr);
  const double beta = fp / fr;
  const Vec u = radial_unit(M, x);
  auto d = [&](const Vec& p, const Vec& q) { return metric_dot(M, x, p, q); };
  const double vu = d(v, u), au = d(a, u), bu = d(b, u);
  const Vec vt = v - vu * u;
  return ltp * vu * (d(a, b) - au * bu) + lrp * vu * au * bu +
         (lr - lt) * beta * (d(a, vt) * bu + au * d(b, vt));
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("distance closed forms") {
  auto E2 = ModelManifold::euclidean(2);
  Point a = E2.pole(), b = E2.pole();
  b.x << 3, 4;
  CHECK(distance(E2, a, b) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(distance(E2, b, a) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(distance(E2, b, b) == doctest::Approx(0.0));

  auto H3 = ModelManifold::hyperbolic(3);
  Point p = H3.pole();
  Point q = H3.point_at_radius(1.0);
  CHECK(distance(H3, p, q) == doctest::Approx(1.0).epsilon(1e-12));

  auto S2 = ModelManifold::sphere(2);
  Point e1{Kind::sphere, Vec::Zero(3)}, e2{Kind::sphere, Vec::Zero(3)};
  e1.x(0) = 1;
  e2.x(1) = 1;
  CHECK(distance(S2, e1, e2) == doctest::Approx(M_PI / 2).epsilon(1e-12));
}

TEST_CASE("distance rejects kind mismatch") {
  auto E3 = ModelManifold::euclidean(3);
  auto H3 = ModelManifold::hyperbolic(3);
  CHECK_THROWS_AS(distance(E3, E3.pole(), H3.pole()), GeometryError);
}

TEST_CASE("exp and transport on space forms") {
  auto E3 = ModelManifold::euclidean(3);
  Point x0 = E3.pole();
  Mat fr = canonical_frame(E3, x0);
  Vec w(3);
  w << 0.3, -0.2, 0.5;
  auto res = exp_and_transport(E3, x0, fr, w);
  CHECK((res.point.x - w).norm() == doctest::Approx(0.0));
  CHECK((res.frame - fr).norm() == doctest::Approx(0.0));

  // quarter great circle: e1 -> e2, transported e2-direction -> -e1
  auto S2 = ModelManifold::sphere(2);
  Point e1{Kind::sphere, Vec::Zero(3)};
  e1.x(0) = 1;
  Mat f2(3, 2);
  f2.col(0) << 0, 1, 0;
  f2.col(1) << 0, 0, 1;
  Vec step = Vec::Zero(3);
  step(1) = M_PI / 2;
  auto r2 = exp_and_transport(S2, e1, f2, step);
  CHECK(r2.point.x(1) == doctest::Approx(1.0).epsilon(1e-12));
  Vec t0 = r2.frame.col(0);
  CHECK(t0(0) == doctest::Approx(-1.0).epsilon(1e-12));

  auto H3 = ModelManifold::hyperbolic(3);
  Point h0 = H3.point_at_radius(0.7);
  Mat fh = canonical_frame(H3, h0);
  Vec wh = 0.4 * fh.col(0) + 0.9 * fh.col(2);
  auto rh = exp_and_transport(H3, h0, fh, wh);
  for (int j = 0; j < 3; ++j)
    CHECK(metric_norm(H3, rh.point, rh.frame.col(j)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("transport composition over a subdivided geodesic") {
  for (auto M : {ModelManifold::sphere(3), ModelManifold::hyperbolic(3)}) {
    const Point x0 = M.point_at_radius(0.4);
    const Mat fr = canonical_frame(M, x0);
    const Vec w = 0.8 * fr.col(0) - 0.5 * fr.col(1) + 0.3 * fr.col(2);
    const auto whole = exp_and_transport(M, x0, fr, w);
    // carry the geodesic velocity as an extra frame column: stepping along
    // the transported velocity in equal legs retraces the same geodesic
    Mat carry(fr.rows(), fr.cols() + 1);
    carry.leftCols(fr.cols()) = fr;
    carry.col(fr.cols()) = w;
    Point xc = x0;
    const int parts = 16;
    for (int i = 0; i < parts; ++i) {
      const Vec leg = carry.col(fr.cols()) / parts;
      const auto res = exp_and_transport(M, xc, carry, leg);
      xc = res.point;
      carry = res.frame;
    }
    CHECK(distance(M, xc, whole.point) < 1e-8);
    for (int j = 0; j < 3; ++j)
      CHECK((carry.col(j) - whole.frame.col(j)).norm() < 1e-8);
  }
}

TEST_CASE("curvature on space forms and trace identities") {
  DirGen gen;
  for (auto M : {ModelManifold::euclidean(3), ModelManifold::sphere(3),
                 ModelManifold::hyperbolic(3),
                 ModelManifold::warped(3, WarpProfile{WarpProfile::Form::odd_poly, 0.1, 0.0})}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Point x = random_point(M, gen, 1.5);
      const Vec X = gen.unit(M, x), Y = gen.unit(M, x), Z = gen.unit(M, x);
      // first Bianchi
      const Vec bianchi = curvature(M, x, X, Y, Z) + curvature(M, x, Y, Z, X) +
                          curvature(M, x, Z, X, Y);
      CHECK(metric_norm(M, x, bianchi) < 1e-8);
      // Ricci as a trace
      const Mat fr = canonical_frame(M, x);
      double tr = 0;
      for (int i = 0; i < M.n; ++i)
        tr += metric_dot(M, x, curvature(M, x, fr.col(i), X, Y), fr.col(i));
      CHECK(tr == doctest::Approx(ricci(M, x, X, Y)).epsilon(1e-8).scale(1.0));
      if (M.space_form()) {
        const Vec RYXX = curvature(M, x, X, Y, Y);
        const Vec expect =
            M.kappa * (metric_dot(M, x, Y, Y) * X - metric_dot(M, x, X, Y) * Y);
        CHECK(metric_norm(M, x, Vec(RYXX - expect)) < 1e-10);
      }
    }
  }
}

TEST_CASE("ricci minus 2 hess h") {
  auto H3 = ModelManifold::hyperbolic(3);
  WeightSpec h0;
  const Point x = H3.point_at_radius(0.8);
  const Mat fr = canonical_frame(H3, x);
  CHECK(ricci_minus_2hess(H3, h0, x, fr.col(1)) == doctest::Approx(-2.0).epsilon(1e-12));

  auto E3 = ModelManifold::euclidean(3);
  WeightSpec hq{0.5, 0.0, 0.0};  // eta = r^2/2, Hess h = I
  const Point xe = E3.point_at_radius(1.3);
  const Mat fe = canonical_frame(E3, xe);
  for (int i = 0; i < 3; ++i)
    CHECK(ricci_minus_2hess(E3, hq, xe, fe.col(i)) == doctest::Approx(-2.0).epsilon(1e-12));

  // warped radial direction vs the Jacobi-field finite-difference oracle
  auto W3 = ModelManifold::warped(3, WarpProfile{WarpProfile::Form::odd_poly, 0.1, 0.0});
  const Point xw = W3.point_at_radius(1.0);
  const Vec u = radial_unit(W3, xw);
  const double got = ricci_minus_2hess(W3, WeightSpec{}, xw, u);
  const auto& f = W3.profile;
  const double dd = 1e-4;
  const double fpp_fd = (f.f(1.0 + dd) - 2 * f.f(1.0) + f.f(1.0 - dd)) / (dd * dd);
  CHECK(got == doctest::Approx(-(3 - 1) * fpp_fd / f.f(1.0)).epsilon(1e-6));
}

TEST_CASE("theta vanishes on space forms") {
  DirGen gen;
  WeightSpec h0;
  for (auto M :
       {ModelManifold::euclidean(3), ModelManifold::sphere(3), ModelManifold::hyperbolic(3)}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Point x = random_point(M, gen, 1.2);
      const Vec a = gen.unit(M, x), b = gen.unit(M, x);
      CHECK(metric_norm(M, x, cyclic_ricci(M, x, a, b)) < 1e-12);
      if (M.has_pole())
        CHECK(metric_norm(M, x, cyclic_ricci_h(M, h0, x, a, b)) < 1e-12);
    }
  }
}

TEST_CASE("theta_h with radial weight vs finite-difference oracle") {
  auto H3 = ModelManifold::hyperbolic(3);
  WeightSpec h{1.0, 0.0, 0.0};  // eta = r^2
  const Point x = H3.point_at_radius(1.0);
  const Mat fr = canonical_frame(H3, x);
  const Vec v = fr.col(0);  // radial, v1 = v2
  const Vec got = cyclic_ricci_h(H3, h, x, v, v);
  CHECK(metric_norm(H3, x, got) > 1e-6);  // nonzero
  // Theta = 0 here, so Theta^h = hess_grad_h + R(grad h, v)(v)
  const Vec oracle_h = fd_hess_grad_h(H3, h, x, v, v);
  const Vec gh = h.etap(1.0) * radial_unit(H3, x);
  const Vec expect = oracle_h + curvature(H3, x, gh, v, v);
  CHECK(metric_norm(H3, x, Vec(got - expect)) < 1e-4);

  // also a mixed pair
  const Vec v2b = fr.col(1);
  const Vec got2 = cyclic_ricci_h(H3, h, x, v2b, v);
  const Vec expect2 = fd_hess_grad_h(H3, h, x, v2b, v) + curvature(H3, x, gh, v2b, v);
  CHECK(metric_norm(H3, x, Vec(got2 - expect2)) < 1e-4);
}

TEST_CASE("warped theta vs closed-form grad-Ricci oracle") {
  auto W3 = ModelManifold::warped(3, WarpProfile{WarpProfile::Form::odd_poly, 0.1, 0.0});
  const Point x = W3.point_at_radius(1.0);
  const Mat fr = canonical_frame(W3, x);
  const Vec v1 = fr.col(0), v2 = Vec(0.6 * fr.col(0) + 0.8 * fr.col(1));
  const Vec got = cyclic_ricci(W3, x, v2, v1);
  CHECK(got.norm() > 1e-6);
  Vec expect = Vec::Zero(3);
  for (int a = 0; a < 3; ++a) {
    const Vec ea = fr.col(a);
    const double val = grad_ric_closed(W3, x, ea, v1, v2) - grad_ric_closed(W3, x, v1, ea, v2) -
                       grad_ric_closed(W3, x, v2, v1, ea);
    expect += val * ea;
  }
  CHECK((got - expect).norm() < 1e-4);
}

TEST_CASE("theta symmetry in (v1, v2)") {
  DirGen gen;
  auto W3 = ModelManifold::warped(3, WarpProfile{WarpProfile::Form::odd_poly, 0.1, 0.02});
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = random_point(W3, gen, 1.2);
    const Vec a = gen.unit(W3, x), b = gen.unit(W3, x);
    const Vec d = cyclic_ricci(W3, x, a, b) - cyclic_ricci(W3, x, b, a);
    CHECK(d.norm() < 1e-4);
  }
}

TEST_CASE("ruse invariant and its gradient") {
  auto E3 = ModelManifold::euclidean(3);
  CHECK(ruse_invariant(E3, E3.point_at_radius(2.3)) == doctest::Approx(1.0));
  auto H3 = ModelManifold::hyperbolic(3);
  CHECK(ruse_invariant(H3, H3.point_at_radius(1.0)) ==
        doctest::Approx(sqr(std::sinh(1.0) / 1.0)).epsilon(1e-12));
  CHECK(ruse_invariant(H3, H3.pole()) == doctest::Approx(1.0));
  auto S3 = ModelManifold::sphere(3);
  CHECK_THROWS_AS(ruse_invariant(S3, S3.point_at_radius(0.3)), GeometryError);
}

TEST_CASE("sc potential closed forms") {
  auto E3 = ModelManifold::euclidean(3);
  CHECK(sc_potential(E3, E3.point_at_radius(1.7)) == doctest::Approx(0.0));
  auto H3 = ModelManifold::hyperbolic(3);
  CHECK(sc_potential(H3, H3.point_at_radius(0.3)) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(sc_potential(H3, H3.point_at_radius(2.9)) == doctest::Approx(-0.5).epsilon(1e-12));
  // n = 2 value from the radial formula; cross-checked below by the radial
  // finite-difference of (1/2) J^{1/2} Lap J^{-1/2}
  auto H2 = ModelManifold::hyperbolic(2);
  const double phi2 = sc_potential(H2, H2.point_at_radius(1.0));
  CHECK(phi2 == doctest::Approx(-0.159492).epsilon(1e-5));
  auto j_half = [&](double r) { return std::pow(std::sinh(r) / r, -0.5); };
  const double r = 1.0, dd = 1e-4;
  const double up = (j_half(r + dd) - 2 * j_half(r) + j_half(r - dd)) / (dd * dd);
  const double u1 = (j_half(r + dd) - j_half(r - dd)) / (2 * dd);
  const double lap = up + (2 - 1) * (std::cosh(r) / std::sinh(r)) * u1;
  CHECK(phi2 == doctest::Approx(0.5 * lap / j_half(r)).epsilon(1e-6));
}

TEST_CASE("phi_h includes the weight terms") {
  auto H3 = ModelManifold::hyperbolic(3);
  WeightSpec h{0.1, 0.0, 0.0};
  const double r = 1.2;
  const Point x = H3.point_at_radius(r);
  const double etap = 0.2 * r;
  const double lap = 0.2 + 2 * (std::cosh(r) / std::sinh(r)) * etap;
  CHECK(sc_potential_h(H3, h, x) ==
        doctest::Approx(-0.5 * etap * etap - 0.5 * lap - 0.5).epsilon(1e-10));
}

TEST_CASE("bridge drift") {
  auto E3 = ModelManifold::euclidean(3);
  const Point x = E3.point_at_radius(0.9);
  const Vec d = bridge_drift(E3, 0.5, x);
  CHECK((d + Vec(x.x / 0.5)).norm() < 1e-12);

  auto H3 = ModelManifold::hyperbolic(3);
  CHECK(bridge_drift(H3, 1.0, H3.pole()).norm() < 1e-12);
  const Point xh = H3.point_at_radius(1.0);
  const Vec dh = bridge_drift(H3, 1.0, xh);
  const double radial = metric_dot(H3, xh, dh, radial_unit(H3, xh));
  CHECK(radial == doctest::Approx(-1.0 / std::tanh(1.0)).epsilon(1e-10));
  CHECK_THROWS_AS(bridge_drift(H3, -1.0, xh), GeometryError);
}

TEST_CASE("warped-sinh matches hyperbolic closed forms") {
  auto W3 = ModelManifold::warped(3, WarpProfile{WarpProfile::Form::sinh_form});
  for (double r : {0.3, 1.0, 2.2}) {
    const Point x = W3.point_at_radius(r);
    CHECK(ruse_invariant(W3, x) == doctest::Approx(sqr(std::sinh(r) / r)).epsilon(1e-6));
    CHECK(sc_potential(W3, x) == doctest::Approx(-0.5).epsilon(1e-6));
  }
  // distance against the hyperbolic law of cosines
  auto H3 = ModelManifold::hyperbolic(3);
  const double r1 = 0.8, r2 = 1.1, psi = 1.0;
  Point a = W3.point_at_radius(r1);
  Point b = W3.point_at_radius(r2);
  b.x.tail(3) << std::cos(psi), std::sin(psi), 0.0;
  const double expect = std::acosh(std::cosh(r1) * std::cosh(r2) -
                                   std::sinh(r1) * std::sinh(r2) * std::cos(psi));
  CHECK(distance(W3, a, b) == doctest::Approx(expect).epsilon(1e-6));
  (void)H3;
}

TEST_CASE("step geom matches the generic operators") {
  DirGen gen;
  auto H3 = ModelManifold::hyperbolic(3);
  WeightSpec h{0.2, 0.05, 0.0};
  const Point x = H3.point_at_radius(0.9);
  const Mat fr = canonical_frame(H3, x);
  const StepGeom g = step_geom(H3, h, x, fr);
  for (int trial = 0; trial < 6; ++trial) {
    Vec a(3), b(3), c(3);
    for (int i = 0; i < 3; ++i) {
      a(i) = gen.g.normal(2, gen.ctr++);
      b(i) = gen.g.normal(2, gen.ctr++);
      c(i) = gen.g.normal(2, gen.ctr++);
    }
    // curvature through frame coordinates vs ambient
    const Vec amb = curvature(H3, x, Vec(fr * a), Vec(fr * b), Vec(fr * c));
    Vec amb_f(3);
    for (int i = 0; i < 3; ++i) amb_f(i) = metric_dot(H3, x, fr.col(i), amb);
    CHECK((curvature_apply(g, a, b, c) - amb_f).norm() < 1e-10);
    // Theta^h through frame coordinates vs ambient
    const Vec th = cyclic_ricci_h(H3, h, x, Vec(fr * b), Vec(fr * a));
    Vec th_f(3);
    for (int i = 0; i < 3; ++i) th_f(i) = metric_dot(H3, x, fr.col(i), th);
    CHECK((theta_h_apply(g, b, a) - th_f).norm() < 1e-10);
  }
  // G eigenstructure: -(1/2) Ric + Hess h on radial/tangential directions
  const double betar = std::cosh(0.9) / std::sinh(0.9);
  CHECK(g.g_rad == doctest::Approx(1.0 + h.etapp(0.9)).epsilon(1e-12));
  CHECK(g.g_tan == doctest::Approx(1.0 + h.etap(0.9) * betar).epsilon(1e-12));
}

TEST_CASE("expm rank-one formula vs series") {
  auto H3 = ModelManifold::hyperbolic(3);
  WeightSpec h{0.3, 0.1, 0.0};
  const Point x = H3.point_at_radius(1.4);
  const Mat fr = canonical_frame(H3, x);
  const StepGeom g = step_geom(H3, h, x, fr);
  Mat G = g.g_tan * Mat::Identity(3, 3);
  G += (g.g_rad - g.g_tan) * g.q * g.q.transpose();
  const double dt = 0.37;
  // Taylor series reference
  Mat E = Mat::Identity(3, 3), term = Mat::Identity(3, 3);
  for (int k = 1; k < 40; ++k) {
    term = (term * G * dt / k).eval();
    E += term;
  }
  Mat A = Mat::Identity(3, 3);
  apply_expm_G(g, dt, A);
  CHECK((A - E).norm() < 1e-12);
}

TEST_CASE("pole-dependent operations reject the sphere") {
  auto S3 = ModelManifold::sphere(3);
  const Point x = S3.point_at_radius(0.4);
  CHECK_THROWS_AS(sc_potential(S3, x), GeometryError);
  CHECK_THROWS_AS(log_k_gauss(S3, 1.0, x), GeometryError);
  CHECK_THROWS_AS(S3.pole(), GeometryError);
}

TEST_CASE("curvature norm convention") {
  auto H3 = ModelManifold::hyperbolic(3);
  CHECK(curvature_norm(H3, H3.point_at_radius(1.0)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  auto W3 = ModelManifold::warped(3, WarpProfile{WarpProfile::Form::sinh_form});
  CHECK(curvature_norm(W3, W3.point_at_radius(1.0)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
}

TEST_SUITE_END();
