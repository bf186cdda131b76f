#include "hessmc/estimators.hpp"

#include <cmath>

namespace hessmc {

namespace {

struct Workspace {
  PathRecord path;
  std::vector<double> p1;       // (N+1) x n Ito prefixes of <dM, W e_i>
  std::vector<double> p2_base;  // (N+1) x n^2 prefixes of <dM, W2_base(e_i,e_j)>
  std::vector<double> p2_theta;
  std::vector<double> phi_pre;  // trapezoid prefixes of Phi^h
  std::vector<double> v_pre;    // trapezoid prefixes of the shifted potential
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

// Evaluation nodes for the dr-integrals: M divides steps/2 so every node time
// and its half-time sit exactly on the uniform part of the grid.
int pick_nodes(int steps, int r_nodes) {
  const int half = steps / 2;
  int m = std::min(r_nodes, half);
  while (m > 1 && half % m != 0) --m;
  return m;
}

double V_shifted(const ModelManifold& M, const PotentialSpec& V, const Point& x, double v0) {
  return V.V(M, x) - v0;
}

// One h-BM path: fills the Ito prefixes, the shifted-potential prefix, and
// returns f(x_t).
double sweep_h_bm(const ModelManifold& M, const WeightSpec& h, const PotentialSpec* V, double v0,
                  const ScalarField& f, const Point& x0, double t, int steps,
                  const GaussianStream& g, long j, Workspace& ws, bool need_w2) {
  sample_h_bm(M, h, x0, t, steps, g, static_cast<uint64_t>(j), ws.path);
  const int n = M.n;
  const int N = ws.path.steps();
  ws.p1.assign((N + 1) * n, 0.0);
  if (need_w2) {
    ws.p2_base.assign((N + 1) * n * n, 0.0);
    ws.p2_theta.assign((N + 1) * n * n, 0.0);
  }
  if (V) ws.v_pre.assign(N + 1, 0.0);

  TransportIntegrator::Options opt;
  opt.evolve_w2 = need_w2;
  TransportIntegrator it(M, h, ws.path, opt);
  double v_prev = V ? V_shifted(M, *V, ws.path.x[0], v0) : 0.0;
  while (!it.at_end()) {
    const int k = it.k();
    const Vec& dM = it.ito_inc();
    const Mat& A = it.W();
    for (int i = 0; i < n; ++i)
      ws.p1[(k + 1) * n + i] = ws.p1[k * n + i] + dM.dot(A.col(i));
    if (need_w2) {
      const PairMat& b = it.w2_base();
      const PairMat& th = it.w2_theta();
      for (int c = 0; c < n * n; ++c) {
        ws.p2_base[(k + 1) * n * n + c] = ws.p2_base[k * n * n + c] + dM.dot(b.col(c));
        ws.p2_theta[(k + 1) * n * n + c] = ws.p2_theta[k * n * n + c] + dM.dot(th.col(c));
      }
    }
    it.advance();
    if (V) {
      const double v_cur = V_shifted(M, *V, ws.path.x[it.k()], v0);
      ws.v_pre[it.k()] = ws.v_pre[it.k() - 1] + 0.5 * (v_prev + v_cur) * ws.path.dt[it.k() - 1];
      v_prev = v_cur;
    }
  }
  return f(M, ws.path.x[N]);
}

}  // namespace

BridgeSpec bridge_spec_for(double T, const RunParams& rp) {
  BridgeSpec b;
  b.T = T;
  b.steps = rp.steps;
  return b;
}

McEstimate grad_semigroup(const ModelManifold& M, const WeightSpec& h, const ScalarField& f,
                          const Point& x0, double t, const RunParams& rp) {
  if (t <= 0) throw NumericError("grad_semigroup: t must be positive");
  const int n = M.n;
  const GaussianStream g(rp.seed);
  const Accumulated acc =
      mc_accumulate(rp.n_paths, rp.workers, n, [&](long j, double* out) {
        Workspace& ws = workspace();
        const double y = sweep_h_bm(M, h, nullptr, 0, f, x0, t, rp.steps, g, j, ws, false);
        const int N = ws.path.steps();
        for (int i = 0; i < n; ++i) out[i] = y * ws.p1[N * n + i] / t;
      });
  McEstimate est;
  est.value.resize(n, 1);
  est.se.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    est.value(i, 0) = acc.mean(i);
    est.se(i, 0) = acc.se(i);
  }
  est.n_paths = rp.n_paths;
  est.seed = rp.seed;
  return est;
}

McEstimate hess_semigroup(const ModelManifold& M, const WeightSpec& h, const ScalarField& f,
                          const Point& x0, double t, const RunParams& rp) {
  if (t <= 0) throw NumericError("hess_semigroup: t must be positive");
  if (rp.steps % 2 != 0) throw NumericError("hess_semigroup: steps must be even");
  const int n = M.n;
  const GaussianStream g(rp.seed);
  const Accumulated acc =
      mc_accumulate(rp.n_paths, rp.workers, n * n, [&](long j, double* out) {
        Workspace& ws = workspace();
        const double y = sweep_h_bm(M, h, nullptr, 0, f, x0, t, rp.steps, g, j, ws, true);
        const int N = ws.path.steps();
        const int mid = N / 2;
        for (int jdir = 0; jdir < n; ++jdir)
          for (int i = 0; i < n; ++i) {
            const double w1 = ws.p1[N * n + i] - ws.p1[mid * n + i];   // [t/2, t), v1
            const double w2 = ws.p1[mid * n + jdir];                   // [0, t/2), v2
            const double q = ws.p2_base[mid * n * n + (jdir * n + i)] +
                             ws.p2_theta[mid * n * n + (jdir * n + i)];
            out[jdir * n + i] = y * (4.0 / (t * t) * w1 * w2 + 2.0 / t * q);
          }
      });
  McEstimate est;
  est.value.resize(n, n);
  est.se.resize(n, n);
  for (int jdir = 0; jdir < n; ++jdir)
    for (int i = 0; i < n; ++i) {
      est.value(i, jdir) = acc.mean(jdir * n + i);
      est.se(i, jdir) = acc.se(jdir * n + i);
    }
  est.n_paths = rp.n_paths;
  est.seed = rp.seed;
  return est;
}

McEstimate hess_feynman_kac(const ModelManifold& M, const WeightSpec& h, const PotentialSpec& V,
                            const ScalarField& f, const Point& x0, double t, const RunParams& rp) {
  if (t <= 0) throw NumericError("hess_feynman_kac: t must be positive");
  if (rp.steps % 2 != 0) throw NumericError("hess_feynman_kac: steps must be even");
  const int n = M.n;
  const int Mn = pick_nodes(rp.steps, rp.r_nodes);
  if (rp.r_nodes > rp.steps / 2)
    throw NumericError("hess_feynman_kac: r_nodes exceeds the grid resolution");
  const double v0 = V.V(M, x0);
  const GaussianStream g(rp.seed);

  const Accumulated acc = mc_accumulate(rp.n_paths, rp.workers, n * n, [&](long j, double* out) {
    Workspace& ws = workspace();
    const double y = sweep_h_bm(M, h, &V, v0, f, x0, t, rp.steps, g, j, ws, true);
    const int N = ws.path.steps();
    const int stride = N / Mn;  // uniform grid: node m sits at index m*stride
    auto n_term = [&](int k, int i, int jdir) {
      if (k == 0) return 0.0;
      const double tp = ws.path.t[k];
      const double w1 = ws.p1[k * n + i] - ws.p1[(k / 2) * n + i];
      const double w2 = ws.p1[(k / 2) * n + jdir];
      return 4.0 / (tp * tp) * w1 * w2;
    };
    auto q_term = [&](int k, int i, int jdir) {
      if (k == 0) return 0.0;
      const double tp = ws.path.t[k];
      const int c = jdir * n + i;
      return 2.0 / tp * (ws.p2_base[(k / 2) * n * n + c] + ws.p2_theta[(k / 2) * n * n + c]);
    };
    const double vint_total = ws.v_pre[N];
    // potential factors at the nodes, shared across entries
    std::vector<double> vfac(Mn + 1, 0.0);
    for (int m = 1; m <= Mn; ++m) {
      const int k = m * stride;
      vfac[m] = V_shifted(M, V, ws.path.x[k], v0) * std::exp(-(vint_total - ws.v_pre[k]));
    }
    for (int jdir = 0; jdir < n; ++jdir)
      for (int i = 0; i < n; ++i) {
        double val = n_term(N, i, jdir) + q_term(N, i, jdir);
        // dr-integral over r = t - t', trapezoid on the node grid; the
        // integrand vanishes at t' = 0. Duhamel carries a minus sign.
        double integral = 0.0;
        double prev_g = 0.0;  // node m=0, t'=0
        for (int m = 1; m <= Mn; ++m) {
          const int k = m * stride;
          const double cur_g = vfac[m] * (n_term(k, i, jdir) + q_term(k, i, jdir));
          integral += 0.5 * (prev_g + cur_g) * (t / Mn);
          prev_g = cur_g;
        }
        val -= integral;
        out[jdir * n + i] = y * val;
      }
  });

  McEstimate est;
  est.value.resize(n, n);
  est.se.resize(n, n);
  const double pref = std::exp(-v0 * t);
  for (int jdir = 0; jdir < n; ++jdir)
    for (int i = 0; i < n; ++i) {
      est.value(i, jdir) = pref * acc.mean(jdir * n + i);
      est.se(i, jdir) = pref * acc.se(jdir * n + i);
    }
  est.n_paths = rp.n_paths;
  est.seed = rp.seed;
  return est;
}

namespace {

// Shared bridge sweep for the kernel estimators. Fills the workspace prefix
// arrays along one sampled bridge and returns exp(int Phi^h) and
// exp(int (Phi^h - V)).
struct BridgePathOut {
  double beta = 1.0;
  double den = 1.0;
};

BridgePathOut sweep_bridge(const ModelManifold& M, const WeightSpec& h, const PotentialSpec* V,
                           double v0, const Point& x0, const BridgeSpec& bspec,
                           const BridgeGrid& grid, const GaussianStream& g, long j, Workspace& ws,
                           bool need_w2) {
  sample_sc_bridge(M, bspec, grid, x0, g, static_cast<uint64_t>(j), ws.path);
  const int n = M.n;
  const int N = ws.path.steps();
  ws.p1.assign((N + 1) * n, 0.0);
  if (need_w2) {
    ws.p2_base.assign((N + 1) * n * n, 0.0);
    ws.p2_theta.assign((N + 1) * n * n, 0.0);
  }
  ws.phi_pre.assign(N + 1, 0.0);
  if (V) ws.v_pre.assign(N + 1, 0.0);

  TransportIntegrator::Options opt;
  opt.evolve_w2 = need_w2;
  TransportIntegrator it(M, h, ws.path, opt);
  double phi_prev = sc_potential_h(M, h, ws.path.x[0]);
  double v_prev = V ? V->V(M, ws.path.x[0]) - v0 : 0.0;
  while (!it.at_end()) {
    const int k = it.k();
    const Vec& dM = it.ito_inc();
    const Mat& A = it.W();
    for (int i = 0; i < n; ++i)
      ws.p1[(k + 1) * n + i] = ws.p1[k * n + i] + dM.dot(A.col(i));
    if (need_w2) {
      const PairMat& b = it.w2_base();
      const PairMat& th = it.w2_theta();
      for (int c = 0; c < n * n; ++c) {
        ws.p2_base[(k + 1) * n * n + c] = ws.p2_base[k * n * n + c] + dM.dot(b.col(c));
        ws.p2_theta[(k + 1) * n * n + c] = ws.p2_theta[k * n * n + c] + dM.dot(th.col(c));
      }
    }
    it.advance();
    const int k1 = it.k();
    const double phi_cur = sc_potential_h(M, h, ws.path.x[k1]);
    ws.phi_pre[k1] = ws.phi_pre[k1 - 1] + 0.5 * (phi_prev + phi_cur) * ws.path.dt[k1 - 1];
    phi_prev = phi_cur;
    if (V) {
      const double v_cur = V->V(M, ws.path.x[k1]) - v0;
      ws.v_pre[k1] = ws.v_pre[k1 - 1] + 0.5 * (v_prev + v_cur) * ws.path.dt[k1 - 1];
      v_prev = v_cur;
    }
  }
  BridgePathOut out;
  out.beta = std::exp(ws.phi_pre[N]);
  // int (Phi^h - V) with the unshifted V
  out.den = V ? std::exp(ws.phi_pre[N] - ws.v_pre[N] - v0 * bspec.T) : out.beta;
  return out;
}

}  // namespace

McEstimate kernel_elementary(const ModelManifold& M, const WeightSpec& h, const PotentialSpec& V,
                             const Point& x0, double T, const RunParams& rp) {
  if (!M.has_pole()) throw GeometryError("kernel_elementary needs a pole manifold");
  const BridgeSpec bspec = bridge_spec_for(T, rp);
  const BridgeGrid grid = bridge_grid(bspec);
  const GaussianStream g(rp.seed);
  const bool hasV = !V.is_zero;
  const double v0 = hasV ? 0.0 : 0.0;  // no shift: the elementary formula takes V directly
  const Accumulated acc = mc_accumulate(rp.n_paths, rp.workers, 1, [&](long j, double* out) {
    Workspace& ws = workspace();
    const BridgePathOut r =
        sweep_bridge(M, h, hasV ? &V : nullptr, v0, x0, bspec, grid, g, j, ws, false);
    out[0] = r.den;
  });
  const double pref =
      std::exp(log_k_gauss(M, T, x0) + weight_h(M, h, M.pole()) - weight_h(M, h, x0));
  McEstimate est;
  est.value.resize(1, 1);
  est.se.resize(1, 1);
  est.value(0, 0) = pref * acc.mean(0);
  est.se(0, 0) = pref * acc.se(0);
  est.n_paths = rp.n_paths;
  est.seed = rp.seed;
  return est;
}

GradKernelResult grad_kernel(const ModelManifold& M, const WeightSpec& h, const Point& x0,
                             double T, const RunParams& rp) {
  if (!M.has_pole()) throw GeometryError("grad_kernel needs a pole manifold");
  const int n = M.n;
  const BridgeSpec bspec = bridge_spec_for(T, rp);
  const BridgeGrid grid = bridge_grid(bspec);
  const GaussianStream g(rp.seed);
  // payload: den, gnum_i, gnum_i * den
  const int P = 1 + 2 * n;
  const Accumulated acc = mc_accumulate(rp.n_paths, rp.workers, P, [&](long j, double* out) {
    Workspace& ws = workspace();
    const BridgePathOut r = sweep_bridge(M, h, nullptr, 0, x0, bspec, grid, g, j, ws, false);
    const int N = ws.path.steps();
    out[0] = r.beta;
    for (int i = 0; i < n; ++i) {
      const double gi = r.beta * ws.p1[N * n + i] / T;
      out[1 + i] = gi;
      out[1 + n + i] = gi * r.beta;
    }
  });
  const double pref =
      std::exp(log_k_gauss(M, T, x0) + weight_h(M, h, M.pole()) - weight_h(M, h, x0));
  GradKernelResult res;
  res.dp.value.resize(n, 1);
  res.dp.se.resize(n, 1);
  res.grad_log.value.resize(n, 1);
  res.grad_log.se.resize(n, 1);
  const double den = acc.mean(0);
  for (int i = 0; i < n; ++i) {
    res.dp.value(i, 0) = pref * acc.mean(1 + i);
    res.dp.se(i, 0) = pref * acc.se(1 + i);
    res.grad_log.value(i, 0) = acc.mean(1 + i) / den;
    res.grad_log.se(i, 0) = ratio_se(acc, 1 + i, 0, 1 + n + i);
  }
  res.dp.n_paths = res.grad_log.n_paths = rp.n_paths;
  res.dp.seed = res.grad_log.seed = rp.seed;
  res.grad_log.den_mean = den;
  res.grad_log.den_se = acc.se(0);
  return res;
}

std::vector<HessKernelResult> hess_kernel_multi(const ModelManifold& M, const WeightSpec& h,
                                                const PotentialSpec& V, const Point& x0, double T,
                                                const RunParams& rp,
                                                const std::vector<double>& theta_scales) {
  if (!M.has_pole()) throw GeometryError("hess_kernel needs a pole manifold");
  if (rp.steps % 2 != 0) throw NumericError("hess_kernel: steps must be even");
  const int n = M.n;
  const int S = static_cast<int>(theta_scales.size());
  const BridgeSpec bspec = bridge_spec_for(T, rp);
  const BridgeGrid grid = bridge_grid(bspec);
  const GaussianStream g(rp.seed);
  const bool hasV = !V.is_zero;
  const double v0 = hasV ? V.V(M, x0) : 0.0;
  const int Mn = hasV ? pick_nodes(rp.steps, rp.r_nodes) : 0;
  if (hasV && rp.r_nodes > rp.steps / 2)
    throw NumericError("hess_kernel: r_nodes exceeds the grid resolution");

  // payload: den(1), grad gnum_i (n), gnum_i*den (n), per scale: num_ij (n^2)
  // and num_ij*den (n^2)
  const int base = 1 + 2 * n;
  const int per_scale = 2 * n * n;
  const int P = base + S * per_scale;

  // node grid indices are path-independent: precompute once
  std::vector<int> node_k(Mn + 1, 0), node_khalf(Mn + 1, 0);
  {
    const int N = static_cast<int>(grid.dt.size());
    auto find_time = [&](double time) {
      const double delta = grid.dt[0];
      const int k = static_cast<int>(std::llround(time / delta));
      if (k < static_cast<int>(grid.t.size()) && std::fabs(grid.t[k] - time) < 1e-9) return k;
      for (int i = N; i >= 0; --i)
        if (std::fabs(grid.t[i] - time) < 1e-9) return i;
      throw NumericError("hess_kernel: node time off the bridge grid");
    };
    for (int m = 1; m <= Mn; ++m) {
      node_k[m] = (m == Mn) ? N : find_time(T * m / Mn);
      node_khalf[m] = find_time(T * m / (2.0 * Mn));
    }
  }
  const int mid_idx = [&] {
    const double delta = grid.dt[0];
    return static_cast<int>(std::llround(T / 2 / delta));
  }();
  if (std::fabs(grid.t[mid_idx] - T / 2) > 1e-9)
    throw NumericError("hess_kernel: T/2 is not a grid time (steps must be even)");

  const Accumulated acc = mc_accumulate(rp.n_paths, rp.workers, P, [&](long j, double* out) {
    Workspace& ws = workspace();
    const BridgePathOut r =
        sweep_bridge(M, h, hasV ? &V : nullptr, v0, x0, bspec, grid, g, j, ws, true);
    const int N = ws.path.steps();

    out[0] = r.den;
    for (int i = 0; i < n; ++i) {
      const double gi = r.beta * ws.p1[N * n + i] / T;
      out[1 + i] = gi;
      out[1 + n + i] = gi * r.den;
    }

    auto nq = [&](int k, int khalf, int i, int jdir, double scale) {
      if (k == 0) return 0.0;
      const double tp = ws.path.t[k];
      const double w1 = ws.p1[k * n + i] - ws.p1[khalf * n + i];
      const double w2 = ws.p1[khalf * n + jdir];
      const int c = jdir * n + i;
      const double q =
          ws.p2_base[khalf * n * n + c] + scale * ws.p2_theta[khalf * n * n + c];
      return 4.0 / (tp * tp) * w1 * w2 + 2.0 / tp * q;
    };

    // potential factors at the nodes, shared across entries
    std::vector<double> vfac;
    if (hasV) {
      vfac.assign(Mn + 1, 0.0);
      const double vtot = ws.v_pre[N];
      for (int m = 1; m <= Mn; ++m) {
        const int k = node_k[m];
        vfac[m] = (V.V(M, ws.path.x[k]) - v0) * std::exp(-(vtot - ws.v_pre[k]));
      }
    }

    for (int s = 0; s < S; ++s) {
      const double scale = theta_scales[s];
      for (int jdir = 0; jdir < n; ++jdir)
        for (int i = 0; i < n; ++i) {
          double val = r.beta * nq(N, mid_idx, i, jdir, scale);
          if (hasV) {
            double integral = 0.0;
            double prev_g = 0.0;
            for (int m = 1; m <= Mn; ++m) {
              const double cur_g =
                  r.beta * vfac[m] * nq(node_k[m], node_khalf[m], i, jdir, scale);
              integral += 0.5 * (prev_g + cur_g) * (T / Mn);
              prev_g = cur_g;
            }
            val -= integral;
          }
          out[base + s * per_scale + jdir * n + i] = val;
          out[base + s * per_scale + n * n + jdir * n + i] = val * r.den;
        }
    }
  });

  const double den = acc.mean(0);
  const double pref_v = std::exp(-v0 * T);
  std::vector<HessKernelResult> results;
  results.reserve(S);
  for (int s = 0; s < S; ++s) {
    HessKernelResult res;
    res.theta_scale = theta_scales[s];
    res.ktrel.value.resize(n, n);
    res.ktrel.se.resize(n, n);
    res.hess_over_p.value.resize(n, n);
    res.hess_over_p.se.resize(n, n);
    for (int jdir = 0; jdir < n; ++jdir)
      for (int i = 0; i < n; ++i) {
        const int c = base + s * per_scale + jdir * n + i;
        const int cx = base + s * per_scale + n * n + jdir * n + i;
        res.ktrel.value(i, jdir) = acc.mean(c);
        res.ktrel.se(i, jdir) = acc.se(c);
        res.hess_over_p.value(i, jdir) = pref_v * acc.mean(c) / den;
        res.hess_over_p.se(i, jdir) = pref_v * ratio_se(acc, c, 0, cx);
      }
    res.grad_log.value.resize(n, 1);
    res.grad_log.se.resize(n, 1);
    for (int i = 0; i < n; ++i) {
      res.grad_log.value(i, 0) = acc.mean(1 + i) / den;
      res.grad_log.se(i, 0) = ratio_se(acc, 1 + i, 0, 1 + n + i);
    }
    res.log_hess.resize(n, n);
    res.log_hess_se.resize(n, n);
    for (int jdir = 0; jdir < n; ++jdir)
      for (int i = 0; i < n; ++i) {
        const double gi = res.grad_log.value(i, 0), gj = res.grad_log.value(jdir, 0);
        res.log_hess(i, jdir) = res.hess_over_p.value(i, jdir) - gi * gj;
        const double si = res.grad_log.se(i, 0), sj = res.grad_log.se(jdir, 0);
        res.log_hess_se(i, jdir) = std::sqrt(sqr(res.hess_over_p.se(i, jdir)) +
                                             sqr(gj * si) + sqr(gi * sj));
      }
    res.ktrel.n_paths = res.hess_over_p.n_paths = res.grad_log.n_paths = rp.n_paths;
    res.ktrel.seed = res.hess_over_p.seed = res.grad_log.seed = rp.seed;
    res.hess_over_p.den_mean = den;
    res.hess_over_p.den_se = acc.se(0);
    results.push_back(std::move(res));
  }
  return results;
}

HessKernelResult hess_kernel(const ModelManifold& M, const WeightSpec& h, const PotentialSpec& V,
                             const Point& x0, double T, const RunParams& rp, double theta_scale) {
  return hess_kernel_multi(M, h, V, x0, T, rp, {theta_scale}).front();
}

}  // namespace hessmc
