#include "balldiv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace balldiv {

namespace {

// Per-pair mean of psi(|a_q - b_q|^2), i.e. the generalized distance before
// the outer h. Energy averages these and applies h once at the end.
double pair_psi_mean(const double* a, const double* b, int d, const DistanceSpec& spec) {
  double acc = 0.0;
  switch (spec.kind) {
    case DistanceKind::L2:
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += g * g;
      }
      break;
    case DistanceKind::L1:
      for (int q = 0; q < d; ++q) acc += std::fabs(a[q] - b[q]);
      break;
    case DistanceKind::Exp:
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += -std::expm1(-0.5 * g * g);
      }
      break;
    case DistanceKind::Log:
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += std::log1p(g * g);
      }
      break;
    case DistanceKind::Custom:
      for (int q = 0; q < d; ++q) {
        const double g = a[q] - b[q];
        acc += spec.psi(g * g);
      }
      break;
  }
  return acc / d;
}

double apply_h(const DistanceSpec& spec, double t) {
  switch (spec.kind) {
    case DistanceKind::L2: return std::sqrt(t);
    case DistanceKind::Custom: return spec.h(t);
    default: return t;
  }
}

std::array<double, 6> probs_from_cells(const std::array<std::uint64_t, 64>& cells,
                                       std::uint64_t total) {
  std::array<std::uint64_t, 6> counts{};
  for (int c = 0; c < 64; ++c) {
    if (!cells[static_cast<std::size_t>(c)]) continue;
    for (int k = 0; k < 6; ++k)
      if (c & (1 << k)) counts[static_cast<std::size_t>(k)] += cells[static_cast<std::size_t>(c)];
  }
  std::array<double, 6> p{};
  for (int k = 0; k < 6; ++k)
    p[static_cast<std::size_t>(k)] =
        static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(total);
  return p;
}

double theta_from_probs(const std::array<double, 6>& p) {
  return p[1] + p[3] - 2.0 * p[4] - 2.0 * p[5] + 2.0 / 3.0;
}

double sample_sd(const std::vector<double>& v) {
  const std::size_t k = v.size();
  if (k < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(k - 1));
}

}  // namespace

ProbabilityProfile estimate_probability_profile(const Sampler& f, const Sampler& g,
                                                const DistanceSpec& spec,
                                                std::uint64_t replicates, std::uint64_t seed) {
  if (!f.draw || !g.draw)
    throw std::invalid_argument("estimate_probability_profile: samplers must be callable");
  if (f.dim != g.dim || f.dim < 1)
    throw std::invalid_argument("estimate_probability_profile: samplers must share a dimension");
  if (replicates < 1000)
    throw std::invalid_argument("estimate_probability_profile: needs at least 1000 replicates");

  const int d = f.dim;
  ProbabilityProfile profile;
  profile.replicates = replicates;
  std::vector<double> buf(static_cast<std::size_t>(6) * d);
  double* x1 = buf.data();
  double* x2 = buf.data() + d;
  double* x3 = buf.data() + 2 * d;
  double* y1 = buf.data() + 3 * d;
  double* y2 = buf.data() + 4 * d;
  double* y3 = buf.data() + 5 * d;

  for (std::uint64_t r = 0; r < replicates; ++r) {
    double* slots[6] = {x1, x2, x3, y1, y2, y3};
    for (int t = 0; t < 6; ++t) {
      RngStream stream(derive_seed(seed, {r, static_cast<std::uint64_t>(t)}));
      (t < 3 ? f : g).draw(stream, slots[t]);
    }
    const double r_x = distance_unchecked(x2, x1, d, spec);
    const double d_y1x1 = distance_unchecked(y1, x1, d, spec);
    const double d_y2x1 = distance_unchecked(y2, x1, d, spec);
    const double d_x3x1 = distance_unchecked(x3, x1, d, spec);
    const double r_y = distance_unchecked(y2, y1, d, spec);
    const double d_x2y1 = distance_unchecked(x2, y1, d, spec);
    const double d_y3y1 = distance_unchecked(y3, y1, d, spec);

    const bool e0 = d_y1x1 <= r_x;
    const bool e1 = e0 && d_y2x1 <= r_x;
    const bool e2 = d_y1x1 <= r_y;  // d(X1, Y1) == d(Y1, X1)
    const bool e3 = e2 && d_x2y1 <= r_y;
    const bool e4 = e0 && d_x3x1 <= r_x;
    const bool e5 = e2 && d_y3y1 <= r_y;
    const int pattern = static_cast<int>(e0) | static_cast<int>(e1) << 1 |
                        static_cast<int>(e2) << 2 | static_cast<int>(e3) << 3 |
                        static_cast<int>(e4) << 4 | static_cast<int>(e5) << 5;
    ++profile.cells[static_cast<std::size_t>(pattern)];
  }

  profile.p = probs_from_cells(profile.cells, replicates);
  for (int k = 0; k < 6; ++k) {
    const double pk = profile.p[static_cast<std::size_t>(k)];
    profile.se[static_cast<std::size_t>(k)] =
        std::sqrt(pk * (1.0 - pk) / static_cast<double>(replicates));
  }
  return profile;
}

double bootstrap_se(const ProbabilityProfile& profile,
                    const std::function<double(const std::array<double, 6>&)>& functional,
                    int resamples, std::uint64_t seed) {
  if (resamples < 2) throw std::invalid_argument("bootstrap_se: needs at least 2 resamples");
  if (profile.replicates == 0) throw std::invalid_argument("bootstrap_se: empty profile");
  const std::uint64_t total = profile.replicates;
  std::array<std::uint64_t, 64> prefix{};
  std::uint64_t running = 0;
  for (int c = 0; c < 64; ++c) {
    running += profile.cells[static_cast<std::size_t>(c)];
    prefix[static_cast<std::size_t>(c)] = running;
  }
  std::vector<double> values(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    RngStream stream(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    std::array<std::uint64_t, 64> counts{};
    for (std::uint64_t r = 0; r < total; ++r) {
      const std::uint64_t target = stream.uniform_index(total);
      // First cell whose cumulative count exceeds the target (64 cells).
      int lo = 0, hi = 63;
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (prefix[static_cast<std::size_t>(mid)] > target) hi = mid;
        else lo = mid + 1;
      }
      ++counts[static_cast<std::size_t>(lo)];
    }
    values[static_cast<std::size_t>(b)] = functional(probs_from_cells(counts, total));
  }
  return sample_sd(values);
}

ThetaEstimate theta_estimate(const ProbabilityProfile& profile, int bootstrap_resamples,
                             std::uint64_t bootstrap_seed) {
  ThetaEstimate est;
  est.raw = theta_from_probs(profile.p);
  est.value = std::clamp(est.raw, 0.0, 2.0);
  est.clamped = est.value != est.raw;
  est.se = bootstrap_se(profile, theta_from_probs, bootstrap_resamples, bootstrap_seed);
  return est;
}

ValueWithSe expected_statistic(int n, int m, const ProbabilityProfile& profile,
                               int bootstrap_resamples, std::uint64_t bootstrap_seed) {
  if (n < 3 || m < 3)
    throw std::invalid_argument("expected_statistic: both groups need at least 3");
  auto functional = [n, m](const std::array<double, 6>& p) {
    return (1.0 / (n - 2) + 1.0 / (m - 2)) / 6.0 + (p[0] - p[1]) / m + (p[2] - p[3]) / n +
           theta_from_probs(p);
  };
  ValueWithSe out;
  out.value = functional(profile.p);
  out.se = bootstrap_se(profile, functional, bootstrap_resamples, bootstrap_seed);
  return out;
}

double projection_lower_bound(const ProbabilityProfile& profile) {
  const double a = profile.p[0] - 0.5;
  const double b = profile.p[2] - 0.5;
  return a * a + b * b;
}

ValueWithSe theta_minus_projection_bound(const ProbabilityProfile& profile,
                                         int bootstrap_resamples, std::uint64_t bootstrap_seed) {
  auto functional = [](const std::array<double, 6>& p) {
    const double a = p[0] - 0.5;
    const double b = p[2] - 0.5;
    return theta_from_probs(p) - (a * a + b * b);
  };
  ValueWithSe out;
  out.value = functional(profile.p);
  out.se = bootstrap_se(profile, functional, bootstrap_resamples, bootstrap_seed);
  return out;
}

double separation_rate(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("separation_rate: sizes must be positive");
  const double a = 1.0 / std::sqrt(static_cast<double>(n));
  const double b = 1.0 / std::sqrt(static_cast<double>(m));
  return (a + b) * (a + b);
}

EnergyEstimate energy_distance_estimate(const DataMatrix& x, const DataMatrix& y,
                                        const DistanceSpec& spec, int bootstrap_resamples,
                                        std::uint64_t bootstrap_seed) {
  const int n = x.rows();
  const int m = y.rows();
  if (n < 2 || m < 2)
    throw std::invalid_argument("energy_distance_estimate: both samples need at least 2 rows");
  if (x.dim() != y.dim())
    throw std::invalid_argument("energy_distance_estimate: samples have different dimensions");
  const int d = x.dim();

  std::vector<double> sxx(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> syy(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> sxy(static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = pair_psi_mean(x.row_ptr(i), x.row_ptr(j), d, spec);
      sxx[static_cast<std::size_t>(i) * n + j] = v;
      sxx[static_cast<std::size_t>(j) * n + i] = v;
    }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double v = pair_psi_mean(y.row_ptr(i), y.row_ptr(j), d, spec);
      syy[static_cast<std::size_t>(i) * m + j] = v;
      syy[static_cast<std::size_t>(j) * m + i] = v;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      sxy[static_cast<std::size_t>(i) * m + j] = pair_psi_mean(x.row_ptr(i), y.row_ptr(j), d, spec);

  auto estimate_from_counts = [&](const std::vector<std::uint32_t>& cx,
                                  const std::vector<std::uint32_t>& cy) {
    double cross = 0.0, within_x = 0.0, within_y = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t ci = cx[static_cast<std::size_t>(i)];
      if (!ci) continue;
      const double* row = sxy.data() + static_cast<std::size_t>(i) * m;
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += static_cast<double>(cy[static_cast<std::size_t>(j)]) * row[j];
      cross += static_cast<double>(ci) * acc;
      const double* rxx = sxx.data() + static_cast<std::size_t>(i) * n;
      double accx = 0.0;
      for (int j = 0; j < n; ++j) accx += static_cast<double>(cx[static_cast<std::size_t>(j)]) * rxx[j];
      within_x += static_cast<double>(ci) * accx;
    }
    for (int i = 0; i < m; ++i) {
      const std::uint32_t ci = cy[static_cast<std::size_t>(i)];
      if (!ci) continue;
      const double* ryy = syy.data() + static_cast<std::size_t>(i) * m;
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += static_cast<double>(cy[static_cast<std::size_t>(j)]) * ryy[j];
      within_y += static_cast<double>(ci) * acc;
    }
    const double mean_cross = cross / (static_cast<double>(n) * m);
    const double mean_xx = within_x / (static_cast<double>(n) * (n - 1));
    const double mean_yy = within_y / (static_cast<double>(m) * (m - 1));
    return 2.0 * apply_h(spec, mean_cross) - apply_h(spec, mean_xx) - apply_h(spec, mean_yy);
  };

  std::vector<std::uint32_t> ones_x(static_cast<std::size_t>(n), 1);
  std::vector<std::uint32_t> ones_y(static_cast<std::size_t>(m), 1);
  EnergyEstimate out;
  out.value = estimate_from_counts(ones_x, ones_y);

  if (bootstrap_resamples >= 2) {
    std::vector<double> values(static_cast<std::size_t>(bootstrap_resamples));
    std::vector<std::uint32_t> cx(static_cast<std::size_t>(n));
    std::vector<std::uint32_t> cy(static_cast<std::size_t>(m));
    for (int b = 0; b < bootstrap_resamples; ++b) {
      RngStream stream(derive_seed(bootstrap_seed, {static_cast<std::uint64_t>(b)}));
      std::fill(cx.begin(), cx.end(), 0u);
      std::fill(cy.begin(), cy.end(), 0u);
      for (int i = 0; i < n; ++i)
        ++cx[static_cast<std::size_t>(stream.uniform_index(static_cast<std::uint64_t>(n)))];
      for (int j = 0; j < m; ++j)
        ++cy[static_cast<std::size_t>(stream.uniform_index(static_cast<std::uint64_t>(m)))];
      values[static_cast<std::size_t>(b)] = estimate_from_counts(cx, cy);
    }
    out.se = sample_sd(values);
  }
  return out;
}

}  // namespace balldiv
