#include "balldiv/permute.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "balldiv/rng.hpp"

namespace balldiv {

std::uint64_t binomial_count(int N, int n, std::uint64_t cap) {
  if (n < 0 || n > N) return 0;
  const int k = std::min(n, N - n);
  // C(N, k) via the multiplicative formula; every prefix product is integral.
  unsigned __int128 c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<unsigned>(N - k + i) / static_cast<unsigned>(i);
    if (c > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(c);
}

namespace {

double empirical_upper_quantile(std::vector<double> values, double alpha) {
  // Smallest t with empirical CDF(t) >= 1 - alpha.
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  const double target = (1.0 - alpha) * static_cast<double>(k);
  std::size_t q = static_cast<std::size_t>(std::ceil(target));
  if (q < 1) q = 1;
  if (q > k) q = k;
  return values[q - 1];
}

void run_random_replicates(const BallIndex& index, int b_total, std::uint64_t seed, int threads,
                           std::vector<double>& out) {
  const int n = index.n();
  const int m = index.m();
  out.assign(static_cast<std::size_t>(b_total), 0.0);
  auto worker = [&](int first, int last) {
    for (int k = first; k < last; ++k) {
      RngStream stream(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
      Labeling labels = canonical_labeling(n, m);
      stream.shuffle(labels);
      out[static_cast<std::size_t>(k)] = ball_statistic_fast(index, labels).t;
    }
  };
  threads = std::max(1, std::min(threads, b_total));
  if (threads == 1) {
    worker(0, b_total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const int chunk = (b_total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int first = t * chunk;
    const int last = std::min(b_total, first + chunk);
    if (first >= last) break;
    pool.emplace_back(worker, first, last);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

TestResult permutation_test(const BallIndex& index, const PermutationPlan& plan, double alpha,
                            int threads) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("permutation_test: alpha must lie in (0, 1)");
  const int n = index.n();
  const int m = index.m();
  const int N = n + m;

  TestResult result;
  result.alpha = alpha;
  result.observed = ball_statistic_fast(index, canonical_labeling(n, m));

  if (plan.mode == PermutationMode::Random) {
    if (plan.replicates < 1)
      throw std::invalid_argument("permutation_test: random mode needs at least 1 replicate");
    run_random_replicates(index, plan.replicates, plan.seed, threads, result.replicates);
    std::uint64_t ge = 0;
    for (double t : result.replicates) ge += (t >= result.observed.t);
    result.p_value = static_cast<double>(1 + ge) / static_cast<double>(plan.replicates + 1);
    result.seed = plan.seed;
    result.exhaustive = false;
  } else {
    const std::uint64_t count = binomial_count(N, n, plan.max_combinations);
    if (count > plan.max_combinations)
      throw std::invalid_argument(
          "permutation_test: C(N, n) exceeds the exhaustive-mode combination cap");
    result.replicates.reserve(static_cast<std::size_t>(count));
    // Lexicographic enumeration of all n-subsets of {0..N-1}.
    std::vector<int> subset(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) subset[static_cast<std::size_t>(i)] = i;
    Labeling labels(static_cast<std::size_t>(N));
    while (true) {
      std::fill(labels.begin(), labels.end(), std::uint8_t{1});
      for (int s : subset) labels[static_cast<std::size_t>(s)] = 0;
      result.replicates.push_back(ball_statistic_fast(index, labels).t);
      int i = n - 1;
      while (i >= 0 && subset[static_cast<std::size_t>(i)] == N - n + i) --i;
      if (i < 0) break;
      ++subset[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < n; ++j)
        subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
    std::uint64_t ge = 0;
    for (double t : result.replicates) ge += (t >= result.observed.t);
    result.p_value = static_cast<double>(ge) / static_cast<double>(result.replicates.size());
    result.exhaustive = true;
    result.seed = 0;
  }
  result.reject = result.p_value < alpha;
  result.cutoff_estimate = empirical_upper_quantile(result.replicates, alpha);
  return result;
}

TestResult permutation_test(const PooledSample& pooled, const DistanceSpec& spec,
                            const PermutationPlan& plan, double alpha, int threads) {
  BallIndex index(pooled, spec);
  return permutation_test(index, plan, alpha, threads);
}

double cutoff_upper_bound(double alpha, int n, int m) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("cutoff_upper_bound: alpha must lie in (0, 1)");
  const int lo = std::min(n, m);
  if (lo <= 2) throw std::invalid_argument("cutoff_upper_bound: min(n, m) must exceed 2");
  return 2.0 / (3.0 * alpha * (lo - 2));
}

double perm_conditional_expectation(int n, int m) {
  if (n < 3 || m < 3)
    throw std::invalid_argument("perm_conditional_expectation: both groups need at least 3");
  return (1.0 / n + 1.0 / m + 1.0 / (n - 2) + 1.0 / (m - 2)) / 6.0;
}

}  // namespace balldiv
