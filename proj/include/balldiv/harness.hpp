#pragma once

// Simulation harness: versioned study configuration, the power/level study
// runner, CSV data loading, the subsampling study, and deterministic output
// writers.
//
// Determinism contract: every repetition derives its own substreams from
// (masterSeed, scenarioKey, d, kindId, rep) through grid_seed(), so studies
// produce byte-identical output files across runs and across thread counts.
// Wall-clock timing is recorded in the tidy CSV only when the config enables
// `timing` (it is off by default precisely because wall-clock values are the
// one non-deterministic column).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "balldiv/core.hpp"
#include "balldiv/permute.hpp"
#include "balldiv/scenarios.hpp"

namespace balldiv {

inline constexpr int kConfigVersion = 1;

struct ScenarioSelection {
  std::string id;
  std::vector<int> dims;
  double beta = 0.0;
  double gamma = 0.0;
  bool has_beta_gamma = false;
};

struct StudyConfig {
  int version = kConfigVersion;
  std::string study = "power";  // "power" or "level"
  double alpha = 0.05;
  int reps = 200;
  int B = 500;
  std::uint64_t master_seed = 20170815;
  int threads = 1;
  bool timing = false;
  std::vector<DistanceKind> kinds;
  std::vector<ScenarioSelection> scenarios;
  std::string out_dir = "results";
};

// Built-in presets. "desk" runs a reduced dimension grid with reps=200;
// "full" runs the complete d = 2^1..2^max grids with reps=500.
StudyConfig default_config(const std::string& preset, const std::string& study);

// JSON on disk; unknown keys and version mismatches are rejected.
StudyConfig load_config(const std::string& path);
StudyConfig config_from_json_text(const std::string& text);
std::string config_to_json(const StudyConfig& config);
void save_config(const StudyConfig& config, const std::string& path);

struct GridRecord {
  std::string scenario_key;
  int d = 0;
  int n = 0;
  int m = 0;
  std::string kind;
  int reps = 0;
  int rejections = 0;
  double power = 0.0;
  double se = 0.0;
  double mean_p = 0.0;
  double seconds = 0.0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<GridRecord> records;
};

// Repetition rep of grid point (scenarioKey, d, kind) draws its dataset from
// grid_seed(master, key, d, kindId, rep, 0) and runs its permutation test
// with seed grid_seed(master, key, d, kindId, rep, 1).
std::uint64_t grid_seed(std::uint64_t master, const std::string& scenario_key, int d, int kind_id,
                        int rep, int salt);

StudyResult run_power_study(const StudyConfig& config);

std::string tidy_csv_text(const StudyResult& result);
// Writes <study>_results.csv plus one plot_<scenarioKey>.csv per scenario
// (x = log2(d), one power column per distance kind). Returns written paths.
std::vector<std::string> write_study_outputs(const StudyResult& result,
                                             const std::string& out_dir);

// --- CSV data input -------------------------------------------------------

struct LoadedCsv {
  DataMatrix x;
  DataMatrix y;
  std::string label_x;  // lexicographically smaller label -> first group
  std::string label_y;
  std::vector<std::string> feature_columns;
};

// Parses a header-bearing CSV of numeric features plus one label column with
// exactly two distinct values. Errors carry row/column coordinates.
LoadedCsv load_csv(const std::string& path, const std::string& label_column);

// --- subsampling study ----------------------------------------------------

// Nearest-integer proportional split of `pooled` between groups of full sizes
// (n_full, m_full), with a floor of 3 per group; exact .5 remainders round
// toward the larger group (first group on equal sizes).
std::pair<int, int> proportional_allocation(int n_full, int m_full, int pooled);

struct SubsampleConfig {
  std::vector<int> pooled_sizes;
  int reps = 100;
  int B = 500;
  double alpha = 0.05;
  std::vector<DistanceKind> kinds;
  std::uint64_t master_seed = 20170815;
  int threads = 1;
};

struct SubsampleRecord {
  int pooled = 0;
  int n_sub = 0;
  int m_sub = 0;
  std::string kind;
  int reps = 0;
  int rejections = 0;
  double power = 0.0;
  double se = 0.0;
  double mean_p = 0.0;
};

// Repeatedly subsamples without replacement (proportional allocation, indices
// sorted ascending so a full-size subsample reproduces the original data) and
// reruns the permutation test.
std::vector<SubsampleRecord> run_subsample_study(const DataMatrix& x, const DataMatrix& y,
                                                 const SubsampleConfig& config);

std::string subsample_csv_text(const std::vector<SubsampleRecord>& records);

}  // namespace balldiv
