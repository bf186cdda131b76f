#include "hessmc/oracles.hpp"

#include <cmath>

namespace hessmc {

double exact_log_kernel(Kind kind, int n, double t, double d) {
  if (t <= 0) throw NumericError("exact_kernel: t must be positive");
  if (kind == Kind::euclidean)
    return -0.5 * n * std::log(2 * M_PI * t) - d * d / (2 * t);
  if (kind == Kind::hyperbolic && n == 3) {
    // (2 pi t)^{-3/2} e^{-t/2} e^{-d^2/2t} (d / sinh d)
    double logj;
    if (d < 1e-6)
      logj = -d * d / 6.0;  // log(d/sinh d)
    else
      logj = std::log(d / std::sinh(d));
    return -1.5 * std::log(2 * M_PI * t) - 0.5 * t - d * d / (2 * t) + logj;
  }
  throw NumericError("exact_kernel: unsupported (kind, n)");
}

double exact_kernel(Kind kind, int n, double t, double d) {
  return std::exp(exact_log_kernel(kind, n, t, d));
}

namespace {

// Probe offsets (in the canonical frame at x0) for the 4-point second
// differences plus the axis probes shared with the gradient.
struct ProbeSet {
  std::vector<Vec> offsets;  // frame coordinates, includes the zero probe first
  int n = 0;
};

ProbeSet build_probes(int n, double s) {
  ProbeSet ps;
  ps.n = n;
  ps.offsets.push_back(Vec::Zero(n));
  for (int half = 0; half < 2; ++half) {
    const double sc = half ? s / 2 : s;
    for (int i = 0; i < n; ++i)
      for (int sign : {+1, -1}) {
        Vec v = Vec::Zero(n);
        v(i) = sign * sc;
        ps.offsets.push_back(v);
      }
  }
  for (int half = 0; half < 2; ++half) {
    const double sc = half ? s / 2 : s;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int s1 : {+1, -1})
          for (int s2 : {+1, -1}) {
            Vec v = Vec::Zero(n);
            v(i) = s1 * sc;
            v(j) = s2 * sc;
            ps.offsets.push_back(v);
          }
  }
  return ps;
}

// index helpers matching build_probes layout
int axis_index(int n, bool half, int i, int sign) {
  return 1 + (half ? 2 * n : 0) + 2 * i + (sign > 0 ? 0 : 1);
}
int pair_index(int n, bool half, int i, int j, int s1, int s2) {
  int p = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (a == i && b == j) {
        const int base = 1 + 4 * n + (half ? 2 * n * (n - 1) : 0);
        return base + 4 * p + (s1 > 0 ? 0 : 2) + (s2 > 0 ? 0 : 1);
      }
      ++p;
    }
  throw NumericError("pair_index: bad pair");
}

// Hessian entries from probe values at one scale.
MatrixXd hess_from_values(int n, double s, const std::vector<double>& F, bool half) {
  const double sc = half ? s / 2 : s;
  MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    H(i, i) = (F[axis_index(n, half, i, +1)] - 2 * F[0] + F[axis_index(n, half, i, -1)]) /
              (sc * sc);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = (F[pair_index(n, half, i, j, +1, +1)] -
                        F[pair_index(n, half, i, j, +1, -1)] -
                        F[pair_index(n, half, i, j, -1, +1)] +
                        F[pair_index(n, half, i, j, -1, -1)]) /
                       (4 * sc * sc);
      H(i, j) = v;
      H(j, i) = v;
    }
  return H;
}

VectorXd grad_from_values(int n, double s, const std::vector<double>& F, bool half) {
  const double sc = half ? s / 2 : s;
  VectorXd g(n);
  for (int i = 0; i < n; ++i)
    g(i) = (F[axis_index(n, half, i, +1)] - F[axis_index(n, half, i, -1)]) / (2 * sc);
  return g;
}

std::vector<Point> probe_points(const ModelManifold& M, const Point& x0, const ProbeSet& ps) {
  const Mat frame = canonical_frame(M, x0);
  std::vector<Point> pts;
  pts.reserve(ps.offsets.size());
  for (const Vec& off : ps.offsets) {
    if (off.norm() == 0.0) {
      pts.push_back(x0);
    } else {
      pts.push_back(exp_and_transport(M, x0, frame, Vec(frame * off)).point);
    }
  }
  return pts;
}

}  // namespace

FdMatrix fd_hessian(const ModelManifold& M, const ScalarField& field, const Point& x0,
                    double step) {
  if (step < 1e-4 || step > 1e-1) throw NumericError("fd_hessian: step out of [1e-4, 1e-1]");
  const int n = M.n;
  const ProbeSet ps = build_probes(n, step);
  const std::vector<Point> pts = probe_points(M, x0, ps);
  std::vector<double> F(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    F[i] = field(M, pts[i]);
    if (!std::isfinite(F[i])) throw NumericError("fd_hessian: non-finite field value");
  }
  const MatrixXd Hs = hess_from_values(n, step, F, false);
  const MatrixXd Hh = hess_from_values(n, step, F, true);
  FdMatrix out;
  out.value = (4.0 * Hh - Hs) / 3.0;
  out.budget = ((Hh - Hs) / 3.0).cwiseAbs() * 2.0;
  return out;
}

FdVector fd_gradient(const ModelManifold& M, const ScalarField& field, const Point& x0,
                     double step) {
  const int n = M.n;
  const ProbeSet ps = build_probes(n, step);
  const std::vector<Point> pts = probe_points(M, x0, ps);
  std::vector<double> F(pts.size(), 0.0);
  for (int half = 0; half < 2; ++half)
    for (int i = 0; i < n; ++i)
      for (int sign : {+1, -1}) {
        const int idx = axis_index(n, half, i, sign);
        F[idx] = field(M, pts[idx]);
      }
  const VectorXd gs = grad_from_values(n, step, F, false);
  const VectorXd gh = grad_from_values(n, step, F, true);
  FdVector out;
  out.value = (4.0 * gh - gs) / 3.0;
  out.budget = ((gh - gs) / 3.0).cwiseAbs() * 2.0;
  return out;
}

FdMcResult nested_fk_reference(const ModelManifold& M, const WeightSpec& h,
                               const PotentialSpec& V, const ScalarField& f, double t,
                               const Point& x0, double step, const RunParams& rp,
                               bool common_rn) {
  const int n = M.n;
  const ProbeSet ps = build_probes(n, step);
  const std::vector<Point> pts = probe_points(M, x0, ps);
  const int np = static_cast<int>(pts.size());
  const GaussianStream g(rp.seed);

  // payload: the per-path FD Hessian combinations at both scales
  const int P = 2 * n * n;
  const Accumulated acc = mc_accumulate(rp.n_paths, rp.workers, P, [&](long j, double* out) {
    thread_local PathRecord path;
    std::vector<double> F(np);
    for (int p = 0; p < np; ++p) {
      // common random numbers: same stream and path index for every probe;
      // otherwise decorrelate by folding the probe id into the path index
      const uint64_t jj = common_rn ? static_cast<uint64_t>(j)
                                    : static_cast<uint64_t>(j) * 131 + p + 1;
      sample_h_bm(M, h, pts[p], t, rp.steps, g, jj, path);
      double vint = 0;
      double v_prev = V.V(M, path.x[0]);
      for (int k = 1; k <= path.steps(); ++k) {
        const double v_cur = V.V(M, path.x[k]);
        vint += 0.5 * (v_prev + v_cur) * path.dt[k - 1];
        v_prev = v_cur;
      }
      F[p] = f(M, path.x[path.steps()]) * std::exp(-vint);
    }
    const MatrixXd Hs = hess_from_values(n, step, F, false);
    const MatrixXd Hh = hess_from_values(n, step, F, true);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        out[a * n + b] = Hs(a, b);
        out[n * n + a * n + b] = Hh(a, b);
      }
  });

  FdMcResult res;
  res.value.resize(n, n);
  res.se.resize(n, n);
  res.fd_budget.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double ms = acc.mean(a * n + b), mh = acc.mean(n * n + a * n + b);
      const double ss = acc.se(a * n + b), sh = acc.se(n * n + a * n + b);
      res.value(a, b) = (4.0 * mh - ms) / 3.0;
      res.se(a, b) = std::sqrt(sqr(4.0 * sh / 3.0) + sqr(ss / 3.0));
      res.fd_budget(a, b) = 2.0 * std::fabs(mh - ms) / 3.0;
    }
  res.n_paths = rp.n_paths;
  return res;
}

KernelFdReference fd_kernel_reference(const ModelManifold& M, const WeightSpec& h, double T,
                                      const Point& x0, double step, const RunParams& rp) {
  const int n = M.n;
  const ProbeSet ps = build_probes(n, step);
  const std::vector<Point> pts = probe_points(M, x0, ps);
  const int np = static_cast<int>(pts.size());
  const BridgeSpec bspec = bridge_spec_for(T, rp);
  const BridgeGrid grid = bridge_grid(bspec);
  const GaussianStream g(rp.seed);
  const Point y0 = M.pole();
  const double hy0 = weight_h(M, h, y0);

  // Per-path finite-difference combinations with common random numbers: one
  // Gaussian stream drives the bridge from every probe start, and the
  // Richardson combination is formed before averaging, so the correlation
  // between probes tightens the error bars directly.
  // payload: R_ab (n^2), g_i (n), center (1), R*center (n^2), g*center (n),
  // budget combos Hd_ab (n^2), gd_i (n)
  const int nn = n * n;
  const int cR = 0, cG = nn, cC = nn + n, cRC = nn + n + 1, cGC = 2 * nn + n + 1,
            cHd = 2 * nn + 2 * n + 1, cGd = 3 * nn + 2 * n + 1;
  const int P = 3 * nn + 3 * n + 1;
  const Accumulated acc = mc_accumulate(rp.n_paths, rp.workers, P, [&](long j, double* out) {
    thread_local PathRecord path;
    std::vector<double> F(np);
    for (int p = 0; p < np; ++p) {
      sample_sc_bridge(M, bspec, grid, pts[p], g, static_cast<uint64_t>(j), path);
      double phi = 0;
      double prev = sc_potential_h(M, h, path.x[0]);
      for (int k = 1; k <= path.steps(); ++k) {
        const double cur = sc_potential_h(M, h, path.x[k]);
        phi += 0.5 * (prev + cur) * path.dt[k - 1];
        prev = cur;
      }
      F[p] = std::exp(log_k_gauss(M, T, pts[p]) + hy0 - weight_h(M, h, pts[p]) + phi);
    }
    const MatrixXd Hs = hess_from_values(n, step, F, false);
    const MatrixXd Hh = hess_from_values(n, step, F, true);
    const VectorXd gs = grad_from_values(n, step, F, false);
    const VectorXd gh = grad_from_values(n, step, F, true);
    const double c = F[0];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double R = (4.0 * Hh(a, b) - Hs(a, b)) / 3.0;
        out[cR + a * n + b] = R;
        out[cRC + a * n + b] = R * c;
        out[cHd + a * n + b] = Hh(a, b) - Hs(a, b);
      }
    for (int i = 0; i < n; ++i) {
      const double gv = (4.0 * gh(i) - gs(i)) / 3.0;
      out[cG + i] = gv;
      out[cGC + i] = gv * c;
      out[cGd + i] = gh(i) - gs(i);
    }
    out[cC] = c;
  });

  const double p0 = acc.mean(cC);
  KernelFdReference res;
  res.hess_over_p.resize(n, n);
  res.se.resize(n, n);
  res.fd_budget.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int e = a * n + b;
      res.hess_over_p(a, b) = acc.mean(cR + e) / p0;
      res.se(a, b) = ratio_se(acc, cR + e, cC, cRC + e);
      res.fd_budget(a, b) = 2.0 * std::fabs(acc.mean(cHd + e)) / 3.0 / p0;
    }
  res.grad_log.resize(n);
  res.grad_se.resize(n);
  res.grad_budget.resize(n);
  for (int i = 0; i < n; ++i) {
    res.grad_log(i) = acc.mean(cG + i) / p0;
    res.grad_se(i) = ratio_se(acc, cG + i, cC, cGC + i);
    res.grad_budget(i) = 2.0 * std::fabs(acc.mean(cGd + i)) / 3.0 / p0;
  }
  return res;
}

}  // namespace hessmc
