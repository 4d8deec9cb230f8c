// Acceptance checks for the ball-divergence toolkit. Each check prints one
// [PASS]/[FAIL] line; the process exits nonzero if any check fails. All
// tolerances are pinned here as constants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "balldiv/core.hpp"
#include "balldiv/harness.hpp"
#include "balldiv/oracle.hpp"
#include "balldiv/permute.hpp"
#include "balldiv/rng.hpp"
#include "balldiv/scenarios.hpp"
#include "balldiv/statistic.hpp"

using namespace balldiv;

namespace {

int g_failures = 0;

void report(int index, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] C%02d %s — %s\n", pass ? "PASS" : "FAIL", index, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

PooledSample random_pooled(std::uint64_t seed, int n, int m, int d, bool lattice) {
  RngStream rng(seed);
  DataMatrix x(n, d), y(m, d);
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < d; ++q)
      x.row_ptr(i)[q] = lattice ? std::floor(rng.uniform01() * 4.0) : rng.normal();
  for (int j = 0; j < m; ++j)
    for (int q = 0; q < d; ++q)
      y.row_ptr(j)[q] = lattice ? std::floor(rng.uniform01() * 4.0) : rng.normal();
  x.check_finite();
  y.check_finite();
  return PooledSample(std::move(x), std::move(y));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Empirical upper quantile: smallest value whose empirical CDF is >= 1-alpha.
double upper_quantile(std::vector<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  std::size_t q = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(k)));
  q = std::min(std::max<std::size_t>(q, 1), k);
  return values[q - 1];
}

GridRecord run_single(const std::string& study, const std::string& id, int d, DistanceKind kind,
                      int reps, int B, double beta = 0.0, double gamma = 0.0,
                      bool has_bg = false) {
  StudyConfig config;
  config.study = study;
  config.reps = reps;
  config.B = B;
  config.kinds = {kind};
  ScenarioSelection sel;
  sel.id = id;
  sel.dims = {d};
  sel.beta = beta;
  sel.gamma = gamma;
  sel.has_beta_gamma = has_bg;
  config.scenarios = {sel};
  const StudyResult result = run_power_study(config);
  return result.records.at(0);
}

std::string slurp(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) return "<missing " + path + ">";
  return std::string((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
}

struct ExhaustiveInstance {
  int n, m;
  TestResult result;
};

}  // namespace

int main() {
  // ---------------------------------------------------------------- C01
  // Exact identity: the mean of the statistic over every relabeling of a
  // tie-free pooled sample equals (1/6)(1/n + 1/m + 1/(n-2) + 1/(m-2)).
  std::vector<ExhaustiveInstance> instances;
  {
    constexpr double kTol = 1e-12;
    const std::pair<int, int> shapes[4] = {{3, 3}, {3, 4}, {4, 4}, {3, 7}};
    const char* kinds[4] = {"l2", "l1", "exp", "log"};
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const auto [n, m] = shapes[rep % 4];
      const PooledSample pooled =
          random_pooled(derive_seed(0xC1, {static_cast<std::uint64_t>(rep)}), n, m, 2, false);
      const DistanceSpec spec = distance_spec_from_name(kinds[rep % 4]);
      TestResult result = permutation_test(pooled, spec, PermutationPlan::exhaustive(), 0.05);
      worst = std::max(worst,
                       std::abs(mean_of(result.replicates) - perm_conditional_expectation(n, m)));
      instances.push_back({n, m, std::move(result)});
    }
    report(1, "relabeling mean matches closed form", worst <= kTol,
           "max |mean - closed form| = " + fmt("%.3e", worst) + " over 20 exhaustive runs (tol " +
               fmt("%.0e", kTol) + ")");
  }

  // ---------------------------------------------------------------- C02
  // The O(N^2) scoring path agrees with the direct O(N^3) definition.
  {
    constexpr double kTol = 1e-12;
    RngStream rng(0xC2);
    const char* kinds[4] = {"l2", "l1", "exp", "log"};
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const int n = 3 + static_cast<int>(rng.uniform_index(6));
      const int m = 3 + static_cast<int>(rng.uniform_index(6));
      const int d = 1 + static_cast<int>(rng.uniform_index(5));
      const PooledSample pooled = random_pooled(
          derive_seed(0xC2C2, {static_cast<std::uint64_t>(rep)}), n, m, d, rep % 2 == 0);
      const BallIndex index(pooled, distance_spec_from_name(kinds[rep % 4]));
      Labeling labels = canonical_labeling(n, m);
      if (rep % 3 != 0) rng.shuffle(labels);
      const StatisticValue fast = ball_statistic_fast(index, labels);
      const StatisticValue naive = ball_statistic_naive(index, labels);
      worst = std::max({worst, std::abs(fast.v1 - naive.v1), std::abs(fast.v2 - naive.v2),
                        std::abs(fast.t - naive.t)});
    }
    report(2, "fast scoring equals direct definition", worst <= kTol,
           "max |fast - direct| = " + fmt("%.3e", worst) +
               " over 200 random instances with duplicates (tol " + fmt("%.0e", kTol) + ")");
  }

  // ---------------------------------------------------------------- C03
  // Quantile chain on every exhaustive distribution from C01: the empirical
  // (1-alpha) quantile is at most expectation/alpha (Markov), which is at
  // most the universal cutoff bound 2/(3 alpha (min(n,m)-2)).
  {
    bool pass = true;
    double worst_gap1 = 1e300, worst_gap2 = 1e300;
    for (const auto& inst : instances) {
      for (const double alpha : {0.05, 0.1}) {
        const double quant = upper_quantile(inst.result.replicates, alpha);
        const double markov = perm_conditional_expectation(inst.n, inst.m) / alpha;
        const double bound = cutoff_upper_bound(alpha, inst.n, inst.m);
        pass = pass && quant <= markov + 1e-12 && markov <= bound + 1e-12;
        worst_gap1 = std::min(worst_gap1, markov - quant);
        worst_gap2 = std::min(worst_gap2, bound - markov);
      }
    }
    report(3, "quantile <= expectation/alpha <= cutoff bound", pass,
           "min slack quantile->markov = " + fmt("%.4f", worst_gap1) +
               ", markov->bound = " + fmt("%.4f", worst_gap2) +
               " over 20 instances x alpha in {0.05, 0.1}");
  }

  // ---------------------------------------------------------------- C04
  // Null level: with F = G (standard normal), n = m = 50, the rejection rate
  // at alpha = 0.05 stays within +-0.03 across dimensions 4, 64, 1024.
  {
    constexpr double kTol = 0.03;
    StudyConfig config;
    config.study = "level";
    config.reps = 500;
    config.B = 500;
    config.kinds = {DistanceKind::L2};
    ScenarioSelection sel;
    sel.id = "level";
    sel.dims = {4, 64, 1024};
    config.scenarios = {sel};
    const StudyResult result = run_power_study(config);
    bool pass = true;
    std::string detail;
    for (const auto& rec : result.records) {
      pass = pass && std::abs(rec.power - 0.05) <= kTol;
      detail += "d=" + std::to_string(rec.d) + ": " + fmt("%.3f", rec.power) + "  ";
    }
    report(4, "null rejection rate near 0.05 (500 reps, B=500)", pass,
           detail + "(tol +-" + fmt("%.2f", kTol) + ")");
  }

  // ---------------------------------------------------------------- C05
  // Pinned power values on alternative scenarios (500 reps, B = 500).
  {
    struct Point {
      const char* id;
      int d;
      DistanceKind kind;
      double lo, hi;
    };
    const Point points[5] = {
        {"ex2", 64, DistanceKind::L2, 0.736 - 0.06, 0.736 + 0.06},
        {"ex3", 32, DistanceKind::Exp, 0.90, 1.0},
        {"ex3", 32, DistanceKind::L2, 0.0, 0.10},
        {"ex4", 8, DistanceKind::Exp, 0.95, 1.0},
        {"ex1", 1024, DistanceKind::L2, 0.99 - 0.03, 1.0},
    };
    bool pass = true;
    std::string detail;
    for (const auto& p : points) {
      const GridRecord rec = run_single("power", p.id, p.d, p.kind, 500, 500);
      const bool ok = rec.power >= p.lo && rec.power <= p.hi;
      pass = pass && ok;
      detail += std::string(p.id) + "/" + rec.kind + " d=" + std::to_string(p.d) + ": " +
                fmt("%.3f", rec.power) + (ok ? "" : "(!)") + "  ";
    }
    report(5, "pinned power table (500 reps, B=500)", pass, detail);
  }

  // ---------------------------------------------------------------- C06
  // Sample-size growth rescues a shrinking mean separation: at d = 64 with
  // separation d^-0.5, growing n like 5 + d^1.1 gains at least 0.5 power
  // over the flat n = 6.
  {
    const GridRecord fast_growth =
        run_single("power", "prop41", 64, DistanceKind::L2, 200, 500, 0.5, 1.1, true);
    const GridRecord no_growth =
        run_single("power", "prop41", 64, DistanceKind::L2, 200, 500, 0.5, 0.0, true);
    const double gap = fast_growth.power - no_growth.power;
    report(6, "growing samples beat fixed samples at shrinking separation", gap >= 0.5,
           "power(n=" + std::to_string(fast_growth.n) + ") = " + fmt("%.3f", fast_growth.power) +
               ", power(n=" + std::to_string(no_growth.n) + ") = " +
               fmt("%.3f", no_growth.power) + ", gap = " + fmt("%.3f", gap) + " (need >= 0.5)");
  }

  // ---------------------------------------------------------------- C07
  // The finite-sample expectation formula predicts the Monte Carlo mean of
  // the statistic (ex1 alternative, d = 4, n = m = 10).
  {
    const ScenarioSpec spec = find_scenario("ex1").at(4);
    const DistanceSpec kind = distance_spec_from_name("l2");
    const int n = 10, m = 10, reps = 2000;
    double sum = 0.0, sumsq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t seed = derive_seed(0xC7, {static_cast<std::uint64_t>(rep)});
      DataMatrix x(n, spec.d), y(m, spec.d);
      for (int i = 0; i < n; ++i) {
        RngStream s(derive_seed(seed, {0, static_cast<std::uint64_t>(i)}));
        spec.f.draw(s, x.row_ptr(i));
      }
      for (int j = 0; j < m; ++j) {
        RngStream s(derive_seed(seed, {1, static_cast<std::uint64_t>(j)}));
        spec.g.draw(s, y.row_ptr(j));
      }
      x.check_finite();
      y.check_finite();
      const PooledSample pooled(std::move(x), std::move(y));
      const double t =
          ball_statistic_fast(BallIndex(pooled, kind), canonical_labeling(n, m)).t;
      sum += t;
      sumsq += t * t;
    }
    const double mc_mean = sum / reps;
    const double mc_sd = std::sqrt((sumsq - reps * mc_mean * mc_mean) / (reps - 1));
    const double mc_se = mc_sd / std::sqrt(static_cast<double>(reps));
    const ProbabilityProfile prof =
        estimate_probability_profile(spec.f, spec.g, kind, 1000000, 0xC7C7);
    const ValueWithSe expect = expected_statistic(n, m, prof);
    const double combined = std::sqrt(mc_se * mc_se + expect.se * expect.se);
    const double gap = std::abs(mc_mean - expect.value);
    report(7, "expectation formula matches simulated mean", gap <= 3.0 * combined,
           "mc mean = " + fmt("%.5f", mc_mean) + ", formula = " + fmt("%.5f", expect.value) +
               ", |gap| = " + fmt("%.5f", gap) + " <= 3 x " + fmt("%.5f", combined) + " ?");
  }

  // ---------------------------------------------------------------- C08
  // Under F = G both divergence estimates vanish within noise: the
  // probability-profile divergence and the energy distance.
  {
    const ScenarioSpec level = find_scenario("level").at(4);
    const ProbabilityProfile prof = estimate_probability_profile(
        level.f, level.g, distance_spec_from_name("l2"), 100000, 0xC8);
    const ThetaEstimate theta = theta_estimate(prof);
    const bool theta_ok = std::abs(theta.raw) <= 3.0 * theta.se;

    const int rows = 200;
    DataMatrix x(rows, 4), y(rows, 4);
    for (int i = 0; i < rows; ++i) {
      RngStream sx(derive_seed(0xC8C8, {0, static_cast<std::uint64_t>(i)}));
      RngStream sy(derive_seed(0xC8C8, {1, static_cast<std::uint64_t>(i)}));
      level.f.draw(sx, x.row_ptr(i));
      level.g.draw(sy, y.row_ptr(i));
    }
    x.check_finite();
    y.check_finite();
    const EnergyEstimate energy = energy_distance_estimate(x, y, distance_spec_from_name("l2"));
    const bool energy_ok = std::abs(energy.value) <= 3.0 * energy.se;
    report(8, "null divergences vanish within noise", theta_ok && energy_ok,
           "divergence raw = " + fmt("%.5f", theta.raw) + " (se " + fmt("%.5f", theta.se) +
               "), energy = " + fmt("%.5f", energy.value) + " (se " + fmt("%.5f", energy.se) +
               ")");
  }

  // ---------------------------------------------------------------- C09
  // The divergence dominates its two-sided projection bound
  // (p0 - 1/2)^2 + (p2 - 1/2)^2 across five configurations.
  {
    struct Config {
      std::string name;
      Sampler f, g;
    };
    std::vector<Config> configs;
    configs.push_back({"level d=3", find_scenario("level").at(3).f,
                       find_scenario("level").at(3).g});
    configs.push_back({"ex1 d=4", find_scenario("ex1").at(4).f, find_scenario("ex1").at(4).g});
    configs.push_back({"ex5 d=16", find_scenario("ex5").at(16).f,
                       find_scenario("ex5").at(16).g});
    configs.push_back({"ex3 d=8", find_scenario("ex3").at(8).f, find_scenario("ex3").at(8).g});
    {
      Sampler plus, minus;
      plus.descriptor = "N(+0.1, 1)";
      plus.dim = 1;
      plus.draw = [](RngStream& s, double* out) { out[0] = 0.1 + s.normal(); };
      minus.descriptor = "N(-0.1, 1)";
      minus.dim = 1;
      minus.draw = [](RngStream& s, double* out) { out[0] = -0.1 + s.normal(); };
      configs.push_back({"N(+-0.1) 1-d", plus, minus});
    }
    bool pass = true;
    std::string detail;
    int idx = 0;
    for (const auto& c : configs) {
      const ProbabilityProfile prof = estimate_probability_profile(
          c.f, c.g, distance_spec_from_name("l2"), 100000,
          derive_seed(0xC9, {static_cast<std::uint64_t>(idx++)}));
      const ValueWithSe diff = theta_minus_projection_bound(prof);
      const bool ok = diff.value >= -3.0 * diff.se;
      pass = pass && ok;
      detail += c.name + ": " + fmt("%.5f", diff.value) + "+-" + fmt("%.5f", diff.se) +
                (ok ? "" : "(!)") + "  ";
    }
    report(9, "divergence dominates its projection bound", pass, detail);
  }

  // ---------------------------------------------------------------- C10
  // A fixed study configuration produces byte-identical output files across
  // repeated runs and across thread counts 1 and 8.
  {
    StudyConfig config;
    config.study = "power";
    config.reps = 30;
    config.B = 100;
    config.kinds = {DistanceKind::L2, DistanceKind::Exp};
    ScenarioSelection level_sel, ex1_sel;
    level_sel.id = "level";
    level_sel.dims = {2, 8};
    ex1_sel.id = "ex1";
    ex1_sel.dims = {2, 8};
    config.scenarios = {level_sel, ex1_sel};

    namespace fs = std::filesystem;
    const std::string base = (fs::temp_directory_path() / "bd_acceptance").string();
    config.threads = 1;
    const auto files_a = write_study_outputs(run_power_study(config), base + "_a");
    config.threads = 1;
    const auto files_b = write_study_outputs(run_power_study(config), base + "_b");
    config.threads = 8;
    const auto files_c = write_study_outputs(run_power_study(config), base + "_c");
    bool pass = files_a.size() == files_b.size() && files_a.size() == files_c.size();
    std::size_t bytes = 0;
    if (pass) {
      for (std::size_t k = 0; k < files_a.size(); ++k) {
        const std::string a = slurp(files_a[k]);
        pass = pass && a == slurp(files_b[k]) && a == slurp(files_c[k]);
        bytes += a.size();
      }
    }
    report(10, "study outputs byte-identical across runs and threads {1,8}", pass,
           std::to_string(files_a.size()) + " files, " + std::to_string(bytes) +
               " bytes compared across 3 runs");
  }

  std::printf("%s: %d of 10 checks passed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
