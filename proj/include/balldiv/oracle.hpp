#pragma once

// Monte Carlo and closed-form reference quantities for the ball divergence.
//
// estimate_probability_profile draws, per replicate, a shared six-tuple
// X1,X2,X3 ~ F and Y1,Y2,Y3 ~ G and records the joint outcome of six ball
// events (tie-inclusive <=, ball centers/radii from same-group pairs):
//   p0 = P{ d(Y1,X1) <= d(X2,X1) }
//   p1 = P{ d(Y1,X1) <= d(X2,X1),  d(Y2,X1) <= d(X2,X1) }
//   p2 = P{ d(X1,Y1) <= d(Y2,Y1) }
//   p3 = P{ d(X1,Y1) <= d(Y2,Y1),  d(X2,Y1) <= d(Y2,Y1) }
//   p4 = P{ d(X3,X1) <= d(X2,X1),  d(Y1,X1) <= d(X2,X1) }
//   p5 = P{ d(Y3,Y1) <= d(Y2,Y1),  d(X1,Y1) <= d(Y2,Y1) }
// All six probabilities come from the same draws, so population identities
// (event nesting, divergence formulas) hold at the sample level too.
//
// Derived from the profile:
//   theta          = p1 + p3 - 2 p4 - 2 p5 + 2/3          (the divergence)
//   expected_statistic(n, m) = (1/6)(1/(n-2) + 1/(m-2))
//                              + (p0 - p1)/m + (p2 - p3)/n + theta
//   projection_lower_bound   = (p0 - 1/2)^2 + (p2 - 1/2)^2  (<= theta for
//                              continuous F, G by Jensen's inequality)
// Standard errors: binomial per probability; derived quantities use a
// replicate-level bootstrap over the shared draws (default 200 resamples).

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "balldiv/core.hpp"
#include "balldiv/rng.hpp"

namespace balldiv {

inline constexpr std::uint64_t kOracleBootstrapSeed = 0xb001757a9ULL;

// A deterministic observation generator: draw(stream, out) fills out[0..dim)
// using only the given stream, so identical substreams give identical points.
struct Sampler {
  std::string descriptor;
  int dim = 0;
  std::function<void(RngStream&, double*)> draw;
};

struct ProbabilityProfile {
  std::uint64_t replicates = 0;
  std::array<double, 6> p{};
  std::array<double, 6> se{};
  // Joint outcome counts: bit k of the cell index records event k above.
  std::array<std::uint64_t, 64> cells{};
};

// Replicate r, point t (0..2 = X1,X2,X3; 3..5 = Y1,Y2,Y3) is drawn from the
// substream derive_seed(seed, {r, t}). Requires replicates >= 1000.
ProbabilityProfile estimate_probability_profile(const Sampler& f, const Sampler& g,
                                                const DistanceSpec& spec,
                                                std::uint64_t replicates, std::uint64_t seed);

// Bootstrap standard error of any functional of the six probabilities,
// resampling the shared replicates (via their joint-outcome counts).
double bootstrap_se(const ProbabilityProfile& profile,
                    const std::function<double(const std::array<double, 6>&)>& functional,
                    int resamples, std::uint64_t seed);

struct ThetaEstimate {
  double value = 0.0;   // clamped to [0, 2]
  double raw = 0.0;     // unclamped plug-in value
  bool clamped = false;
  double se = 0.0;
};
ThetaEstimate theta_estimate(const ProbabilityProfile& profile, int bootstrap_resamples = 200,
                             std::uint64_t bootstrap_seed = kOracleBootstrapSeed);

struct ValueWithSe {
  double value = 0.0;
  double se = 0.0;
};

// Exact finite-sample mean of T for iid samples of sizes n, m (>= 3 each);
// uses the unclamped theta plug-in.
ValueWithSe expected_statistic(int n, int m, const ProbabilityProfile& profile,
                               int bootstrap_resamples = 200,
                               std::uint64_t bootstrap_seed = kOracleBootstrapSeed);

double projection_lower_bound(const ProbabilityProfile& profile);

// theta - projection_lower_bound with a bootstrap SE of the difference.
ValueWithSe theta_minus_projection_bound(const ProbabilityProfile& profile,
                                         int bootstrap_resamples = 200,
                                         std::uint64_t bootstrap_seed = kOracleBootstrapSeed);

// Slowest mean-separation rate still giving test consistency:
// (1/sqrt(n) + 1/sqrt(m))^2.
double separation_rate(int n, int m);

struct EnergyEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Plug-in energy distance 2 h(cross) - h(within x) - h(within y), where each
// argument is the mean over pairs of the per-coordinate psi averages (cross:
// all n*m pairs; within: unordered distinct pairs). SE via row bootstrap.
EnergyEstimate energy_distance_estimate(const DataMatrix& x, const DataMatrix& y,
                                        const DistanceSpec& spec, int bootstrap_resamples = 200,
                                        std::uint64_t bootstrap_seed = kOracleBootstrapSeed);

}  // namespace balldiv
