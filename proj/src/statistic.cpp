#include "balldiv/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace balldiv {

BallIndex::BallIndex(int n, int m) : n_(n), m_(m), total_(n + m) {}

BallIndex::BallIndex(const PooledSample& pooled, const DistanceSpec& spec)
    : BallIndex(pooled.n(), pooled.m()) {
  const int N = total_;
  const int d = pooled.dim();
  dist_.assign(static_cast<std::size_t>(N) * N, 0.0);
  // Each unordered pair is computed once and mirrored, so the matrix is
  // symmetric bit-for-bit.
  for (int i = 0; i < N; ++i) {
    const double* ri = pooled.pooled_row(i);
    for (int j = i + 1; j < N; ++j) {
      const double v = distance_unchecked(ri, pooled.pooled_row(j), d, spec);
      dist_[static_cast<std::size_t>(i) * N + j] = v;
      dist_[static_cast<std::size_t>(j) * N + i] = v;
    }
  }
  build_orders();
}

BallIndex BallIndex::from_distance_matrix(int n, int m, std::vector<double> dist) {
  if (n < 3 || m < 3)
    throw std::invalid_argument("BallIndex: both groups need at least 3 rows");
  const int N = n + m;
  if (dist.size() != static_cast<std::size_t>(N) * N)
    throw std::invalid_argument("BallIndex: distance matrix must be N x N");
  for (int i = 0; i < N; ++i) {
    if (dist[static_cast<std::size_t>(i) * N + i] != 0.0)
      throw std::invalid_argument("BallIndex: distance matrix diagonal must be zero");
    for (int j = 0; j < N; ++j) {
      const double v = dist[static_cast<std::size_t>(i) * N + j];
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("BallIndex: distances must be finite and nonnegative");
      if (v != dist[static_cast<std::size_t>(j) * N + i])
        throw std::invalid_argument("BallIndex: distance matrix must be symmetric");
    }
  }
  BallIndex index(n, m);
  index.dist_ = std::move(dist);
  index.build_orders();
  return index;
}

void BallIndex::build_orders() {
  const int N = total_;
  order_.assign(static_cast<std::size_t>(N) * (N - 1), 0);
  rank_by_pos_.assign(static_cast<std::size_t>(N) * (N - 1), 0);
  rank_of_.assign(static_cast<std::size_t>(N) * N, 0);
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(N - 1));
  for (int i = 0; i < N; ++i) {
    const double* di = dist_.data() + static_cast<std::size_t>(i) * N;
    std::uint32_t k = 0;
    for (int j = 0; j < N; ++j)
      if (j != i) idx[k++] = static_cast<std::uint32_t>(j);
    std::sort(idx.begin(), idx.end(), [di](std::uint32_t a, std::uint32_t b) {
      if (di[a] != di[b]) return di[a] < di[b];
      return a < b;
    });
    std::uint32_t* ord = order_.data() + static_cast<std::size_t>(i) * (N - 1);
    std::uint32_t* rbp = rank_by_pos_.data() + static_cast<std::size_t>(i) * (N - 1);
    std::uint32_t* rof = rank_of_.data() + static_cast<std::size_t>(i) * N;
    std::copy(idx.begin(), idx.end(), ord);
    // Equal-distance runs share the tie-inclusive rank: the 1-based position
    // of the last member of the run.
    int p = 0;
    while (p < N - 1) {
      int e = p + 1;
      while (e < N - 1 && di[ord[e]] == di[ord[p]]) ++e;
      for (int q = p; q < e; ++q) {
        rbp[q] = static_cast<std::uint32_t>(e);
        rof[ord[q]] = static_cast<std::uint32_t>(e);
      }
      p = e;
    }
  }
}

namespace {

void check_labels(const BallIndex& index, const Labeling& labels) {
  if (labels.size() != static_cast<std::size_t>(index.total()))
    throw std::invalid_argument("ball statistic: labeling size must equal pooled size");
  int zeros = 0;
  for (std::uint8_t v : labels) {
    if (v > 1) throw std::invalid_argument("ball statistic: labels must be 0 or 1");
    zeros += (v == 0);
  }
  if (zeros != index.n())
    throw std::invalid_argument("ball statistic: labeling must assign exactly n zeros");
}

}  // namespace

StatisticValue ball_statistic_fast(const BallIndex& index, const Labeling& labels) {
  check_labels(index, labels);
  const int N = index.total();
  const int n = index.n();
  const int m = index.m();
  const double inv_n2 = 1.0 / (n - 2);
  const double inv_m = 1.0 / m;
  const double inv_n = 1.0 / n;
  const double inv_m2 = 1.0 / (m - 2);
  const std::uint8_t* lab = labels.data();

  double acc1 = 0.0;
  double acc2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const std::uint32_t* ord = index.order_row(i);
    const std::uint32_t* rnk = index.rank_row(i);
    double local = 0.0;
    int cum0 = 0;
    int p = 0;
    if (lab[i] == 0) {
      while (p < N - 1) {
        const int e = static_cast<int>(rnk[p]);  // tie group covers positions [p, e)
        int g0 = 0;
        for (int q = p; q < e; ++q) g0 += (lab[ord[q]] == 0);
        const int cx = cum0 + g0;
        const double diff = (cx - 1) * inv_n2 - (e - cx) * inv_m;
        local += g0 * (diff * diff);
        cum0 = cx;
        p = e;
      }
      acc1 += local;
    } else {
      while (p < N - 1) {
        const int e = static_cast<int>(rnk[p]);
        int g0 = 0;
        for (int q = p; q < e; ++q) g0 += (lab[ord[q]] == 0);
        const int cx = cum0 + g0;
        const double diff = cx * inv_n - (e - cx - 1) * inv_m2;
        local += (e - p - g0) * (diff * diff);
        cum0 = cx;
        p = e;
      }
      acc2 += local;
    }
  }
  StatisticValue out;
  out.v1 = acc1 / (static_cast<double>(n) * (n - 1));
  out.v2 = acc2 / (static_cast<double>(m) * (m - 1));
  out.t = out.v1 + out.v2;
  return out;
}

StatisticValue ball_statistic_naive(const BallIndex& index, const Labeling& labels) {
  check_labels(index, labels);
  const int N = index.total();
  const int n = index.n();
  const int m = index.m();
  const std::uint8_t* lab = labels.data();

  double acc1 = 0.0;
  double acc2 = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (j == i || lab[j] != lab[i]) continue;
      const double radius = index.dist(j, i);
      int same = 0;
      int other = 0;
      for (int k = 0; k < N; ++k) {
        if (index.dist(k, i) > radius) continue;
        if (lab[k] == lab[i]) {
          if (k != i && k != j) ++same;
        } else {
          ++other;
        }
      }
      if (lab[i] == 0) {
        const double diff = static_cast<double>(same) / (n - 2) - static_cast<double>(other) / m;
        acc1 += diff * diff;
      } else {
        const double diff = static_cast<double>(other) / n - static_cast<double>(same) / (m - 2);
        acc2 += diff * diff;
      }
    }
  }
  StatisticValue out;
  out.v1 = acc1 / (static_cast<double>(n) * (n - 1));
  out.v2 = acc2 / (static_cast<double>(m) * (m - 1));
  out.t = out.v1 + out.v2;
  return out;
}

}  // namespace balldiv
