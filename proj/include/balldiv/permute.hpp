#pragma once

// Permutation inference for the ball statistic.
//
// Random mode draws B relabelings uniformly over the C(N, n) group
// assignments (seeded Fisher–Yates shuffle of the canonical label vector;
// replicate k uses the substream derived from (seed, k), so results are
// independent of thread count). The p-value uses the add-one convention
//     p = (1 + #{replicates >= observed}) / (B + 1).
// Exhaustive mode enumerates all C(N, n) labelings in lexicographic subset
// order (the identity labeling included) and reports the exact proportion
//     p = #{labelings with T >= observed} / C(N, n).
// The test rejects when p < alpha. cutoff_estimate is the empirical (1-alpha)
// quantile of the replicate distribution, reported as a diagnostic only.

#include <cstdint>
#include <vector>

#include "balldiv/core.hpp"
#include "balldiv/statistic.hpp"

namespace balldiv {

enum class PermutationMode { Random, Exhaustive };

struct PermutationPlan {
  PermutationMode mode = PermutationMode::Random;
  int replicates = 500;                      // B, random mode
  std::uint64_t seed = 0;                    // random mode
  std::uint64_t max_combinations = 100000;   // exhaustive-mode cap on C(N, n)

  static PermutationPlan random(int B, std::uint64_t seed) {
    PermutationPlan plan;
    plan.mode = PermutationMode::Random;
    plan.replicates = B;
    plan.seed = seed;
    return plan;
  }
  static PermutationPlan exhaustive(std::uint64_t cap = 100000) {
    PermutationPlan plan;
    plan.mode = PermutationMode::Exhaustive;
    plan.max_combinations = cap;
    return plan;
  }
};

struct TestResult {
  StatisticValue observed;
  std::vector<double> replicates;  // replicate t values in deterministic order
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  double cutoff_estimate = 0.0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
};

// C(N, n) saturated at cap+1 (so a return value > cap means "over the cap").
std::uint64_t binomial_count(int N, int n, std::uint64_t cap);

TestResult permutation_test(const BallIndex& index, const PermutationPlan& plan, double alpha,
                            int threads = 1);
TestResult permutation_test(const PooledSample& pooled, const DistanceSpec& spec,
                            const PermutationPlan& plan, double alpha, int threads = 1);

// Universal bound on the permutation-distribution (1-alpha) quantile:
// 2 / (3 * alpha * (min(n, m) - 2)).
double cutoff_upper_bound(double alpha, int n, int m);

// Exact mean of T over the uniform relabeling distribution of any fixed
// tie-free pooled sample: (1/6)(1/n + 1/m + 1/(n-2) + 1/(m-2)).
double perm_conditional_expectation(int n, int m);

}  // namespace balldiv
