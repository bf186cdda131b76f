#pragma once

#include <ostream>
#include <vector>

#include "hessmc/geometry.hpp"
#include "hessmc/rng.hpp"

namespace hessmc {

enum class Scheme { h_bm, sc_bridge };

// One discretized path: points, parallel-transported frames, the sampled
// Gaussian increments (frame coordinates, stored verbatim) and the per-step
// drift vectors (frame coordinates).
struct PathRecord {
  Scheme scheme = Scheme::h_bm;
  bool pinned = false;
  int n = 0;
  std::vector<double> t;    // size N+1
  std::vector<double> dt;   // size N
  std::vector<Point> x;     // size N+1
  std::vector<Mat> frame;   // size N+1
  std::vector<Vec> dB;      // size N; zero on the pinned final step
  std::vector<Vec> drift;   // size N
  int n_noise = 0;          // steps carrying a Gaussian increment

  int steps() const { return static_cast<int>(dt.size()); }
  void reset(int n_dim, int ambient, int capacity);
};

struct BridgeSpec {
  double T = 1.0;
  int steps = 200;            // base grid, delta = T/steps
  double shrink = 0.5;        // step factor once delta would overshoot
  double pin_fraction = 1e-3; // pin when T - t < pin_fraction * delta

  double base_dt() const { return T / steps; }
};

// The adaptive grid is a pure function of the spec (never of the path), so
// Gaussian counters stay aligned across paths and workers.
struct BridgeGrid {
  std::vector<double> t;
  std::vector<double> dt;
  int n_noise = 0;  // the final step is the deterministic pinning step
};
BridgeGrid bridge_grid(const BridgeSpec& spec);

// Geodesic random walk for the weighted Brownian motion:
// x_{k+1} = exp_{x_k}(u_k dB_k + grad h(x_k) dt), frames parallel.
void sample_h_bm(const ModelManifold& M, const WeightSpec& h, const Point& x0, double t_end,
                 int steps, const GaussianStream& g, uint64_t path_index, PathRecord& out);

// Semi-classical bridge toward the pole: drift grad log k_{T-t}(., y0),
// adaptive step shrink near T, hard pinning to y0 on the last step.
void sample_sc_bridge(const ModelManifold& M, const BridgeSpec& spec, const Point& x0,
                      const GaussianStream& g, uint64_t path_index, PathRecord& out);
void sample_sc_bridge(const ModelManifold& M, const BridgeSpec& spec, const BridgeGrid& grid,
                      const Point& x0, const GaussianStream& g, uint64_t path_index,
                      PathRecord& out);

// Density of the h-Brownian-motion law against the bridge law on [0, t]:
// M_t = e^{h(x_t)-h(x0)} k_T(x0,y0)/k_{T-t}(x_t,y0) exp(int_0^t Phi^h ds).
// t must be a grid time strictly before the pinning window.
double girsanov_weight(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                       double T, double t);

// Increments of the h-martingale part of the path, frame coordinates: the
// stored dB for h-BM paths, dB + dt (drift - grad h) for bridge paths. The
// pinned step contributes a zero vector.
void ito_increments(const ModelManifold& M, const WeightSpec& h, const PathRecord& path,
                    std::vector<Vec>& out);

// Debug trace: one row per grid point, "k,t,x...,dB...".
void dump_path_csv(std::ostream& os, const PathRecord& path);

}  // namespace hessmc
