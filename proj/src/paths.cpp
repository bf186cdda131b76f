#include "hessmc/paths.hpp"

#include <cmath>

namespace hessmc {

namespace {

// Re-orthonormalization cadence: closed-form transport on space forms is an
// isometry per step, the warped RK4 transport is not.
int reorth_every(const ModelManifold& M) { return M.kind == Kind::warped ? 1 : 64; }

Vec grad_h_ambient(const ModelManifold& M, const WeightSpec& h, const Point& x) {
  if (h.zero()) return Vec(Vec::Zero(x.x.size()));
  const double r = pole_distance(M, x);
  if (r < 1e-12) return Vec(Vec::Zero(x.x.size()));
  return Vec(h.etap(r) * radial_unit(M, x));
}

Vec to_frame(const ModelManifold& M, const Point& x, const Mat& frame, const Vec& ambient) {
  const int n = static_cast<int>(frame.cols());
  Vec out(n);
  for (int i = 0; i < n; ++i) out(i) = metric_dot(M, x, frame.col(i), ambient);
  return out;
}

}  // namespace

void PathRecord::reset(int n_dim, int ambient, int capacity) {
  n = n_dim;
  pinned = false;
  n_noise = 0;
  t.clear();
  dt.clear();
  x.clear();
  frame.clear();
  dB.clear();
  drift.clear();
  t.reserve(capacity + 1);
  dt.reserve(capacity);
  x.reserve(capacity + 1);
  frame.reserve(capacity + 1);
  dB.reserve(capacity);
  drift.reserve(capacity);
  (void)ambient;
}

BridgeGrid bridge_grid(const BridgeSpec& spec) {
  if (spec.T <= 0) throw NumericError("bridge: T must be positive");
  if (spec.steps < 8) throw NumericError("bridge: need at least 8 steps");
  if (!(spec.shrink > 0 && spec.shrink < 1)) throw NumericError("bridge: shrink must be in (0,1)");
  BridgeGrid g;
  const double delta = spec.base_dt();
  const double pin = spec.pin_fraction * delta;
  double t = 0;
  g.t.push_back(0.0);
  while (spec.T - t > pin) {
    const double step = std::min(delta, spec.shrink * (spec.T - t));
    g.dt.push_back(step);
    t += step;
    g.t.push_back(t);
    if (g.dt.size() > 100000u) throw NumericError("bridge grid failed to terminate");
  }
  g.n_noise = static_cast<int>(g.dt.size());
  // deterministic pinning step
  g.dt.push_back(spec.T - t);
  g.t.push_back(spec.T);
  return g;
}

void sample_h_bm(const ModelManifold& M, const WeightSpec& h, const Point& x0, double t_end,
                 int steps, const GaussianStream& g, uint64_t path_index, PathRecord& out) {
  if (t_end <= 0) throw NumericError("h-bm: t_end must be positive");
  if (steps < 1) throw NumericError("h-bm: steps must be >= 1");
  const int n = M.n;
  out.reset(n, M.ambient_dim(), steps);
  out.scheme = Scheme::h_bm;
  out.n_noise = steps;
  const double delta = t_end / steps;
  const double sd = std::sqrt(delta);
  const int cadence = reorth_every(M);

  Point x = x0;
  Mat frame = canonical_frame(M, x);
  out.t.push_back(0.0);
  out.x.push_back(x);
  out.frame.push_back(frame);
  for (int k = 0; k < steps; ++k) {
    Vec dB(n);
    for (int i = 0; i < n; ++i)
      dB(i) = sd * g.normal(path_index, static_cast<uint64_t>(k) * n + i);
    const Vec gh = grad_h_ambient(M, h, x);
    const Vec drift_f = to_frame(M, x, frame, gh);
    Vec w = frame * dB + delta * gh;
    ExpResult e;
    try {
      e = exp_and_transport(M, x, frame, w);
    } catch (const GeometryError& err) {
      throw NumericError("h-bm step " + std::to_string(k) + ": " + err.what());
    }
    x = e.point;
    frame = e.frame;
    renormalize_point(M, x);
    if ((k + 1) % cadence == 0) reorthonormalize(M, x, frame);
    out.dt.push_back(delta);
    out.t.push_back(delta * (k + 1));
    out.x.push_back(x);
    out.frame.push_back(frame);
    out.dB.push_back(dB);
    out.drift.push_back(drift_f);
  }
}

void sample_sc_bridge(const ModelManifold& M, const BridgeSpec& spec, const Point& x0,
                      const GaussianStream& g, uint64_t path_index, PathRecord& out) {
  const BridgeGrid grid = bridge_grid(spec);
  sample_sc_bridge(M, spec, grid, x0, g, path_index, out);
}

void sample_sc_bridge(const ModelManifold& M, const BridgeSpec& spec, const BridgeGrid& grid,
                      const Point& x0, const GaussianStream& g, uint64_t path_index,
                      PathRecord& out) {
  if (!M.has_pole()) throw GeometryError("semi-classical bridge needs a pole manifold");
  const int n = M.n;
  const int N = static_cast<int>(grid.dt.size());
  out.reset(n, M.ambient_dim(), N);
  out.scheme = Scheme::sc_bridge;
  out.n_noise = grid.n_noise;
  const int cadence = reorth_every(M);
  const Point y0 = M.pole();

  Point x = x0;
  Mat frame = canonical_frame(M, x);
  out.t.push_back(0.0);
  out.x.push_back(x);
  out.frame.push_back(frame);
  for (int k = 0; k < grid.n_noise; ++k) {
    const double delta = grid.dt[k];
    const double tau = spec.T - grid.t[k];
    const double sd = std::sqrt(delta);
    Vec dB(n);
    for (int i = 0; i < n; ++i)
      dB(i) = sd * g.normal(path_index, static_cast<uint64_t>(k) * n + i);
    const Vec drift = bridge_drift(M, tau, x);
    Vec w = frame * dB + delta * drift;
    ExpResult e;
    try {
      e = exp_and_transport(M, x, frame, w);
    } catch (const GeometryError& err) {
      throw NumericError("bridge step " + std::to_string(k) + ": " + err.what());
    }
    out.drift.push_back(to_frame(M, x, frame, drift));
    x = e.point;
    frame = e.frame;
    renormalize_point(M, x);
    if ((k + 1) % cadence == 0) reorthonormalize(M, x, frame);
    out.dt.push_back(delta);
    out.t.push_back(grid.t[k + 1]);
    out.x.push_back(x);
    out.frame.push_back(frame);
    out.dB.push_back(dB);
  }
  // pinning: one deterministic geodesic step onto y0, no Gaussian increment
  {
    const double delta = grid.dt[N - 1];
    const Vec w = log_map(M, x, y0);
    const ExpResult e = exp_and_transport(M, x, frame, w);
    out.drift.push_back(to_frame(M, x, frame, Vec(w / delta)));
    out.dB.push_back(Vec(Vec::Zero(n)));
    out.dt.push_back(delta);
    out.t.push_back(spec.T);
    Point xe = y0;  // exact endpoint
    out.x.push_back(xe);
    Mat fr = e.frame;
    reorthonormalize(M, xe, fr);
    out.frame.push_back(fr);
  }
  out.pinned = true;
}

double girsanov_weight(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                       double T, double t) {
  if (path.scheme != Scheme::sc_bridge) throw NumericError("girsanov_weight needs a bridge path");
  // locate the grid index
  int k = -1;
  for (int i = 0; i < static_cast<int>(path.t.size()); ++i)
    if (std::fabs(path.t[i] - t) < 1e-12) {
      k = i;
      break;
    }
  if (k < 0) throw NumericError("girsanov_weight: t is not a grid time");
  if (k >= path.n_noise)
    throw NumericError("girsanov_weight: t inside the pinning window (weight singular)");
  double phi_int = 0;
  double prev = sc_potential_h(M, h, path.x[0]);
  for (int i = 1; i <= k; ++i) {
    const double cur = sc_potential_h(M, h, path.x[i]);
    phi_int += 0.5 * (prev + cur) * path.dt[i - 1];
    prev = cur;
  }
  const double log_m = weight_h(M, h, path.x[k]) - weight_h(M, h, path.x[0]) +
                       log_k_gauss(M, T, path.x[0]) - log_k_gauss(M, T - t, path.x[k]) + phi_int;
  return std::exp(log_m);
}

void ito_increments(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                    std::vector<Vec>& out) {
  const int N = path.steps();
  out.resize(N);
  if (path.scheme == Scheme::h_bm) {
    for (int k = 0; k < N; ++k) out[k] = path.dB[k];
    return;
  }
  for (int k = 0; k < N; ++k) {
    if (k >= path.n_noise) {
      out[k] = Vec::Zero(path.n);
      continue;
    }
    Vec corr = path.drift[k];
    if (!h.zero()) {
      const double r = pole_distance(M, path.x[k]);
      if (r > 1e-12) {
        const Vec U = radial_unit(M, path.x[k]);
        for (int i = 0; i < path.n; ++i)
          corr(i) -= h.etap(r) * metric_dot(M, path.x[k], path.frame[k].col(i), U);
      }
    }
    out[k] = path.dB[k] + path.dt[k] * corr;
  }
}

void dump_path_csv(std::ostream& os, const PathRecord& path) {
  os << "k,t";
  const int ad = static_cast<int>(path.x[0].x.size());
  for (int i = 0; i < ad; ++i) os << ",x" << i;
  for (int i = 0; i < path.n; ++i) os << ",dB" << i;
  os << "\n";
  for (size_t k = 0; k < path.x.size(); ++k) {
    os << k << "," << path.t[k];
    for (int i = 0; i < ad; ++i) os << "," << path.x[k].x(i);
    for (int i = 0; i < path.n; ++i) os << "," << (k < path.dB.size() ? path.dB[k](i) : 0.0);
    os << "\n";
  }
}

}  // namespace hessmc
