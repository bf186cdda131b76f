#include "hessmc/mc.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace hessmc {

namespace {

constexpr long kBlock = 512;

// Pairwise reduction over one payload component of a block buffer
// (path-major rows).
double pairwise_block(const double* base, long count, long stride, bool squared) {
  if (count <= 8) {
    double s = 0;
    for (long i = 0; i < count; ++i) {
      const double v = base[i * stride];
      s += squared ? v * v : v;
    }
    return s;
  }
  const long half = count / 2;
  return pairwise_block(base, half, stride, squared) +
         pairwise_block(base + half * stride, count - half, stride, squared);
}

}  // namespace

Accumulated mc_accumulate(long n_paths, int workers, int payload_dim,
                          const std::function<void(long, double*)>& fn) {
  if (n_paths <= 0) throw NumericError("mc_accumulate: n_paths must be positive");
  const long n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<Eigen::ArrayXd> block_sum(n_blocks), block_sq(n_blocks);

  std::atomic<long> next{0};
  auto work = [&]() {
    std::vector<double> buf(kBlock * payload_dim);
    for (;;) {
      const long b = next.fetch_add(1);
      if (b >= n_blocks) return;
      const long j0 = b * kBlock;
      const long j1 = std::min(n_paths, j0 + kBlock);
      const long cnt = j1 - j0;
      for (long j = j0; j < j1; ++j) fn(j, buf.data() + (j - j0) * payload_dim);
      Eigen::ArrayXd s(payload_dim), q(payload_dim);
      for (int c = 0; c < payload_dim; ++c) {
        s(c) = pairwise_block(buf.data() + c, cnt, payload_dim, false);
        q(c) = pairwise_block(buf.data() + c, cnt, payload_dim, true);
      }
      block_sum[b] = std::move(s);
      block_sq[b] = std::move(q);
    }
  };

  const int w = std::max(1, workers);
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // fixed pairwise tree across blocks
  std::function<void(long, long, Eigen::ArrayXd&, Eigen::ArrayXd&)> reduce =
      [&](long lo, long hi, Eigen::ArrayXd& s, Eigen::ArrayXd& q) {
        if (hi - lo == 1) {
          s = block_sum[lo];
          q = block_sq[lo];
          return;
        }
        const long mid = lo + (hi - lo) / 2;
        Eigen::ArrayXd s2, q2;
        reduce(lo, mid, s, q);
        reduce(mid, hi, s2, q2);
        s += s2;
        q += q2;
      };
  Accumulated acc;
  reduce(0, n_blocks, acc.sum, acc.sumsq);
  acc.n = n_paths;
  return acc;
}

double ratio_se(const Accumulated& acc, int c_num, int c_den, int c_cross) {
  const double nbar = acc.mean(c_num);
  const double dbar = acc.mean(c_den);
  const double R = nbar / dbar;
  const double var_n = std::max(0.0, acc.sumsq(c_num) / acc.n - nbar * nbar);
  const double var_d = std::max(0.0, acc.sumsq(c_den) / acc.n - dbar * dbar);
  const double cov = acc.cov(c_num, c_den, c_cross);
  const double var_r = (var_n + R * R * var_d - 2.0 * R * cov) / (dbar * dbar);
  return std::sqrt(std::max(0.0, var_r) / acc.n);
}

}  // namespace hessmc
