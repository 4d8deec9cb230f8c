#include "balldiv/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace balldiv {

int floor_pow(int d, double gamma) {
  if (d < 1) throw std::invalid_argument("floor_pow: d must be positive");
  const double y = std::pow(static_cast<double>(d), gamma);
  const double snapped = std::round(y);
  if (std::fabs(y - snapped) <= 1e-9 * std::max(1.0, std::fabs(snapped)))
    return static_cast<int>(snapped);
  return static_cast<int>(std::floor(y));
}

std::pair<int, int> sample_sizes(GrowthRule growth, int d, double gamma, int fixed_n,
                                 int fixed_m) {
  switch (growth) {
    case GrowthRule::Fixed: return {fixed_n, fixed_m};
    case GrowthRule::SqrtPlus5: {
      const int k = 5 + static_cast<int>(std::floor(std::sqrt(static_cast<double>(d))));
      return {k, k};
    }
    case GrowthRule::DimPlus5: return {d + 5, d + 5};
    case GrowthRule::PowPlus5: {
      const int k = 5 + floor_pow(d, gamma);
      return {k, k};
    }
  }
  return {0, 0};
}

namespace {

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, a);
  return buf;
}

Sampler normal_diag(int d, std::vector<double> mean, std::vector<double> sd, std::string desc) {
  auto mu = std::make_shared<std::vector<double>>(std::move(mean));
  auto sigma = std::make_shared<std::vector<double>>(std::move(sd));
  Sampler s;
  s.descriptor = std::move(desc);
  s.dim = d;
  s.draw = [mu, sigma, d](RngStream& stream, double* out) {
    for (int q = 0; q < d; ++q)
      out[q] = (*mu)[static_cast<std::size_t>(q)] +
               (*sigma)[static_cast<std::size_t>(q)] * stream.normal();
  };
  return s;
}

Sampler normal_const(int d, double mean, double var, std::string desc) {
  return normal_diag(d, std::vector<double>(static_cast<std::size_t>(d), mean),
                     std::vector<double>(static_cast<std::size_t>(d), std::sqrt(var)),
                     std::move(desc));
}

// Halved diagonal: first floor(d/2) coordinates have variance v_front, the
// rest v_back.
Sampler normal_halves(int d, double v_front, double v_back, std::string desc) {
  std::vector<double> sd(static_cast<std::size_t>(d));
  for (int q = 0; q < d; ++q)
    sd[static_cast<std::size_t>(q)] = std::sqrt(q < d / 2 ? v_front : v_back);
  return normal_diag(d, std::vector<double>(static_cast<std::size_t>(d), 0.0), std::move(sd),
                     std::move(desc));
}

// First k coordinates get the given mean (unit variance everywhere).
Sampler normal_front_mean(int d, int k, double mean, std::string desc) {
  std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
  for (int q = 0; q < k && q < d; ++q) mu[static_cast<std::size_t>(q)] = mean;
  return normal_diag(d, std::move(mu), std::vector<double>(static_cast<std::size_t>(d), 1.0),
                     std::move(desc));
}

// First k coordinates get variance v (zero mean everywhere).
Sampler normal_front_var(int d, int k, double v, std::string desc) {
  std::vector<double> sd(static_cast<std::size_t>(d), 1.0);
  for (int q = 0; q < k && q < d; ++q) sd[static_cast<std::size_t>(q)] = std::sqrt(v);
  return normal_diag(d, std::vector<double>(static_cast<std::size_t>(d), 0.0), std::move(sd),
                     std::move(desc));
}

// Stationary AR(1) with unit marginal variance: x_1 = z_1,
// x_q = r x_{q-1} + sqrt(1 - r^2) z_q, so corr(x_i, x_j) = r^|i-j|.
Sampler ar1(int d, double r, std::string desc) {
  Sampler s;
  s.descriptor = std::move(desc);
  s.dim = d;
  const double w = std::sqrt(1.0 - r * r);
  s.draw = [d, r, w](RngStream& stream, double* out) {
    double prev = stream.normal();
    out[0] = prev;
    for (int q = 1; q < d; ++q) {
      prev = r * prev + w * stream.normal();
      out[q] = prev;
    }
  };
  return s;
}

// Two-component normal location mixture with unit variances: one uniform
// picks the component, then d normals.
Sampler mixture(int d, double w1, double mu1, double mu2, std::string desc) {
  Sampler s;
  s.descriptor = std::move(desc);
  s.dim = d;
  s.draw = [d, w1, mu1, mu2](RngStream& stream, double* out) {
    const double mu = stream.uniform01() < w1 ? mu1 : mu2;
    for (int q = 0; q < d; ++q) out[q] = mu + stream.normal();
  };
  return s;
}

Sampler cauchy_iid(int d, double loc, std::string desc) {
  Sampler s;
  s.descriptor = std::move(desc);
  s.dim = d;
  s.draw = [d, loc](RngStream& stream, double* out) {
    for (int q = 0; q < d; ++q) out[q] = stream.cauchy(loc);
  };
  return s;
}

Sampler t4_iid(int d, std::string desc) {
  Sampler s;
  s.descriptor = std::move(desc);
  s.dim = d;
  s.draw = [d](RngStream& stream, double* out) {
    for (int q = 0; q < d; ++q) out[q] = stream.student_t4();
  };
  return s;
}

// First k coordinates iid t(4); the remaining ones N(0, var_rest).
Sampler t4_front_normal_rest(int d, int k, double var_rest, std::string desc) {
  Sampler s;
  s.descriptor = std::move(desc);
  s.dim = d;
  const double sd = std::sqrt(var_rest);
  s.draw = [d, k, sd](RngStream& stream, double* out) {
    for (int q = 0; q < d; ++q)
      out[q] = q < k ? stream.student_t4() : sd * stream.normal();
  };
  return s;
}

int sparse_count(int d) { return floor_pow(d, 0.7); }

std::vector<ScenarioTemplate> build_catalogue() {
  std::vector<ScenarioTemplate> all;
  auto add = [&all](std::string id, GrowthRule growth, int fixed_n, int fixed_m, int max_pow2,
                    bool has_bg,
                    std::function<std::pair<Sampler, Sampler>(int, double, double)> make) {
    ScenarioTemplate t;
    t.id = std::move(id);
    t.growth = growth;
    t.fixed_n = fixed_n;
    t.fixed_m = fixed_m;
    t.max_pow2 = max_pow2;
    t.has_beta_gamma = has_bg;
    t.make = std::move(make);
    all.push_back(std::move(t));
  };

  add("ex1", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_const(d, 0.0, 1.0, "N(0, I)"),
                          normal_const(d, 0.15, 1.0, "N(0.15*ones, I)"));
  });
  add("ex2", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_const(d, 0.0, 1.0, "N(0, I)"),
                          normal_const(d, 0.0, 1.1, "N(0, 1.1*I)"));
  });
  add("ex3", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_halves(d, 1.0, 2.0, "N(0, diag(1...,2...))"),
                          normal_halves(d, 2.0, 1.0, "N(0, diag(2...,1...))"));
  });
  add("ex4", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(cauchy_iid(d, 0.0, "Cauchy(0,1)^d"), cauchy_iid(d, 1.0, "Cauchy(1,1)^d"));
  });
  add("ex5", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    const double c = std::pow(static_cast<double>(d), -0.5);
    return std::make_pair(normal_const(d, c, 1.0, "N(+d^-1/2*ones, I)"),
                          normal_const(d, -c, 1.0, "N(-d^-1/2*ones, I)"));
  });
  add("ex6", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_const(d, 0.0, 1.0, "N(0, I)"),
                          mixture(d, 0.5, 0.5, -0.5, "0.5 N(0.5*ones,I) + 0.5 N(-0.5*ones,I)"));
  });
  add("ex7", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_const(d, 0.0, 1.0, "N(0, I)"),
                          mixture(d, 0.2, 1.0, -0.25, "0.2 N(ones,I) + 0.8 N(-0.25*ones,I)"));
  });
  add("ex8", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_const(d, 0.0, 2.0, "N(0, 2I)"), t4_iid(d, "t(4)^d"));
  });
  add("ex9", GrowthRule::SqrtPlus5, 0, 0, 8, false, [](int d, double, double) {
    const double c = std::pow(static_cast<double>(d), -0.3);
    return std::make_pair(normal_const(d, c, 1.0, "N(+d^-0.3*ones, I)"),
                          normal_const(d, -c, 1.0, "N(-d^-0.3*ones, I)"));
  });
  add("ex10", GrowthRule::DimPlus5, 0, 0, 8, false, [](int d, double, double) {
    return std::make_pair(normal_halves(d, 1.0, 5.0, "N(0, diag(1...,5...))"),
                          normal_halves(d, 5.0, 1.0, "N(0, diag(5...,1...))"));
  });
  add("ex11", GrowthRule::DimPlus5, 0, 0, 8, false, [](int d, double, double) {
    return std::make_pair(ar1(d, 0.1, "N(0, AR1(0.1))"), ar1(d, 0.5, "N(0, AR1(0.5))"));
  });
  add("ex12", GrowthRule::SqrtPlus5, 0, 0, 8, false, [](int d, double, double) {
    const int k = sparse_count(d);
    return std::make_pair(normal_front_mean(d, k, 2.0, "N(2 on first floor(d^0.7), I)"),
                          normal_const(d, 0.0, 1.0, "N(0, I)"));
  });
  add("ex13", GrowthRule::SqrtPlus5, 0, 0, 8, false, [](int d, double, double) {
    const int k = sparse_count(d);
    return std::make_pair(normal_const(d, 0.0, 1.0, "N(0, I)"),
                          normal_front_var(d, k, 5.0, "N(0, var 5 on first floor(d^0.7))"));
  });
  add("ex14", GrowthRule::SqrtPlus5, 0, 0, 8, false, [](int d, double, double) {
    const int k = sparse_count(d);
    return std::make_pair(normal_const(d, 0.0, 2.0, "N(0, 2I)"),
                          t4_front_normal_rest(d, k, 2.0, "t(4) on first floor(d^0.7), N(0,2) rest"));
  });
  add("level", GrowthRule::Fixed, 50, 50, 10, false, [](int d, double, double) {
    return std::make_pair(normal_const(d, 0.0, 1.0, "N(0, I)"),
                          normal_const(d, 0.0, 1.0, "N(0, I)"));
  });
  add("prop41", GrowthRule::PowPlus5, 0, 0, 10, true, [](int d, double beta, double) {
    const double c = std::pow(static_cast<double>(d), -beta);
    return std::make_pair(
        normal_const(d, c, 1.0, "N(+d^-" + fmt("%.3g", beta) + "*ones, I)"),
        normal_const(d, -c, 1.0, "N(-d^-" + fmt("%.3g", beta) + "*ones, I)"));
  });
  return all;
}

}  // namespace

const std::vector<ScenarioTemplate>& catalogue() {
  static const std::vector<ScenarioTemplate> all = build_catalogue();
  return all;
}

const ScenarioTemplate& find_scenario(const std::string& id) {
  for (const auto& t : catalogue())
    if (t.id == id) return t;
  throw std::invalid_argument("unknown scenario id '" + id + "'");
}

ScenarioSpec ScenarioTemplate::at(int d) const {
  if (has_beta_gamma)
    throw std::invalid_argument("scenario '" + id + "' needs beta and gamma parameters");
  return at(d, 0.0, 0.0);
}

ScenarioSpec ScenarioTemplate::at(int d, double beta, double gamma) const {
  if (d < 1) throw std::invalid_argument("scenario dimension must be positive");
  ScenarioSpec spec;
  spec.id = id;
  spec.key = id;
  spec.d = d;
  spec.beta = beta;
  spec.gamma = gamma;
  spec.has_beta_gamma = has_beta_gamma;
  if (has_beta_gamma) {
    if (beta <= 0.0) throw std::invalid_argument("scenario '" + id + "': beta must be positive");
    if (gamma < 0.0) throw std::invalid_argument("scenario '" + id + "': gamma must be >= 0");
    spec.key = id + "_b" + fmt("%.2f", beta) + "_g" + fmt("%.2f", gamma);
  }
  const auto sizes = sample_sizes(growth, d, gamma, fixed_n, fixed_m);
  spec.n = sizes.first;
  spec.m = sizes.second;
  auto fg = make(d, beta, gamma);
  spec.f = std::move(fg.first);
  spec.g = std::move(fg.second);
  return spec;
}

std::vector<int> ScenarioTemplate::full_grid() const {
  std::vector<int> dims;
  for (int k = 1; k <= max_pow2; ++k) dims.push_back(1 << k);
  return dims;
}

PooledSample draw_dataset(const ScenarioSpec& spec, std::uint64_t seed) {
  if (!spec.f.draw || !spec.g.draw)
    throw std::invalid_argument("draw_dataset: scenario has no samplers (instantiate via at())");
  DataMatrix x(spec.n, spec.d);
  DataMatrix y(spec.m, spec.d);
  for (int i = 0; i < spec.n; ++i) {
    RngStream stream(derive_seed(seed, {0, static_cast<std::uint64_t>(i)}));
    spec.f.draw(stream, x.row_ptr(i));
  }
  for (int j = 0; j < spec.m; ++j) {
    RngStream stream(derive_seed(seed, {1, static_cast<std::uint64_t>(j)}));
    spec.g.draw(stream, y.row_ptr(j));
  }
  x.check_finite();
  y.check_finite();
  return PooledSample(std::move(x), std::move(y));
}

}  // namespace balldiv
