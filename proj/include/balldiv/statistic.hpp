#pragma once

// The two-sample ball statistic T = V1 + V2 and its supporting index.
//
// For each same-group ordered pair (i, j), the ball centered at point i with
// radius dist(j, i) is compared between the two groups: V1 averages, over the
// n(n-1) ordered pairs from group 0, the squared difference between the
// within-group membership proportion (leave-two-out, denominator n-2) and the
// opposite-group proportion (denominator m); V2 is symmetric. Membership uses
// the tie-inclusive comparison dist(u, i) <= dist(j, i).
//
// BallIndex precomputes, per center, the neighbor list sorted by distance and
// the tie-inclusive prefix ranks, after which each relabeling is scored in
// O(N^2) by ball_statistic_fast. ball_statistic_naive is the O(N^3)
// definition written directly against the raw distance matrix; it exists as
// an independent check of the fast path and is used by tests only.

#include <cstdint>
#include <vector>

#include "balldiv/core.hpp"

namespace balldiv {

struct StatisticValue {
  double v1 = 0.0;
  double v2 = 0.0;
  double t = 0.0;
};

class BallIndex {
 public:
  BallIndex(const PooledSample& pooled, const DistanceSpec& spec);

  // Build from an explicit symmetric distance matrix (row-major N x N, zero
  // diagonal). Useful for custom metrics and for invariance tests.
  static BallIndex from_distance_matrix(int n, int m, std::vector<double> dist);

  int n() const { return n_; }
  int m() const { return m_; }
  int total() const { return total_; }

  double dist(int i, int j) const {
    return dist_[static_cast<std::size_t>(i) * total_ + j];
  }
  // p-th nearest neighbor of center i (p in 0..N-2; ties by ascending index).
  std::uint32_t order(int i, int p) const {
    return order_[static_cast<std::size_t>(i) * (total_ - 1) + p];
  }
  // Number of points u != i with dist(u, i) <= dist(j, i); constant across a
  // tie group and equal to N-1 for the farthest point(s).
  std::uint32_t tie_rank(int i, int j) const {
    return rank_of_[static_cast<std::size_t>(i) * total_ + j];
  }

  const std::uint32_t* order_row(int i) const {
    return order_.data() + static_cast<std::size_t>(i) * (total_ - 1);
  }
  // Tie-inclusive rank of the point at each sorted position of center i.
  const std::uint32_t* rank_row(int i) const {
    return rank_by_pos_.data() + static_cast<std::size_t>(i) * (total_ - 1);
  }

 private:
  BallIndex(int n, int m);
  void build_orders();

  int n_;
  int m_;
  int total_;
  std::vector<double> dist_;
  std::vector<std::uint32_t> order_;        // N x (N-1)
  std::vector<std::uint32_t> rank_by_pos_;  // N x (N-1)
  std::vector<std::uint32_t> rank_of_;      // N x N, diagonal unused
};

// labels: one entry per pooled row, 0 or 1, with exactly index.n() zeros.
StatisticValue ball_statistic_fast(const BallIndex& index, const Labeling& labels);
StatisticValue ball_statistic_naive(const BallIndex& index, const Labeling& labels);

}  // namespace balldiv
