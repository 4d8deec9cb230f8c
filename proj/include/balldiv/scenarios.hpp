#pragma once

// Catalogue of simulation scenarios: pairs of sampling distributions F, G
// with a dimension grid and a sample-size growth rule. Fourteen alternative
// scenarios (ex1..ex14), a null scenario ("level", F = G), and a
// rate-exploration scenario ("prop41", mean separation d^-beta with sample
// sizes 5 + floor(d^gamma)).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "balldiv/core.hpp"
#include "balldiv/oracle.hpp"

namespace balldiv {

enum class GrowthRule { Fixed, SqrtPlus5, DimPlus5, PowPlus5 };

// floor(d^gamma) with a relative snap guard so that mathematically integral
// powers (e.g. 1024^1.1 = 2048) are not floored down by floating-point error.
int floor_pow(int d, double gamma);

std::pair<int, int> sample_sizes(GrowthRule growth, int d, double gamma, int fixed_n, int fixed_m);

// A scenario instantiated at a concrete dimension: resolved sample sizes and
// ready-to-draw samplers.
struct ScenarioSpec {
  std::string id;
  std::string key;  // id, plus beta/gamma qualifiers where applicable
  int d = 0;
  int n = 0;
  int m = 0;
  double beta = 0.0;
  double gamma = 0.0;
  bool has_beta_gamma = false;
  Sampler f;
  Sampler g;
};

struct ScenarioTemplate {
  std::string id;
  GrowthRule growth = GrowthRule::Fixed;
  int fixed_n = 0;
  int fixed_m = 0;
  int max_pow2 = 10;  // full-preset dimension grid runs d = 2^1 .. 2^max_pow2
  bool has_beta_gamma = false;
  std::function<std::pair<Sampler, Sampler>(int d, double beta, double gamma)> make;

  ScenarioSpec at(int d) const;
  ScenarioSpec at(int d, double beta, double gamma) const;
  std::vector<int> full_grid() const;
};

const std::vector<ScenarioTemplate>& catalogue();
const ScenarioTemplate& find_scenario(const std::string& id);

// Draw a dataset: X row i uses substream derive_seed(seed, {0, i}), Y row j
// uses derive_seed(seed, {1, j}).
PooledSample draw_dataset(const ScenarioSpec& spec, std::uint64_t seed);

}  // namespace balldiv
