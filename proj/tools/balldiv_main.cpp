// balldiv: command-line driver for the ball-divergence two-sample toolkit.
//
// Subcommands:
//   test       one permutation test on CSV data
//   power      power study over catalogued scenarios
//   level      null-rejection-rate study (F = G)
//   oracle     Monte Carlo divergence / expectation profile for a scenario
//   subsample  subsampling power curve on CSV data

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "balldiv/harness.hpp"
#include "balldiv/oracle.hpp"
#include "balldiv/permute.hpp"
#include "balldiv/rng.hpp"
#include "balldiv/scenarios.hpp"
#include "balldiv/statistic.hpp"

namespace {

std::vector<balldiv::DistanceKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<balldiv::DistanceKind> kinds;
  for (const auto& name : names)
    kinds.push_back(balldiv::distance_spec_from_name(name).kind);
  return kinds;
}

void print_record_table(const balldiv::StudyResult& result) {
  std::printf("%-18s %6s %5s %5s %5s %6s %8s %8s %10s\n", "scenario", "d", "n", "m", "kind",
              "reps", "power", "se", "mean_p");
  for (const auto& rec : result.records)
    std::printf("%-18s %6d %5d %5d %5s %6d %8.4f %8.4f %10.6f\n", rec.scenario_key.c_str(), rec.d,
                rec.n, rec.m, rec.kind.c_str(), rec.reps, rec.power, rec.se, rec.mean_p);
}

int run_study_command(const std::string& study, const std::string& config_path,
                      const std::string& preset, const std::vector<std::string>& scenario_ids,
                      const std::vector<int>& dims, double beta, double gamma, bool has_bg,
                      int reps, int B, double alpha, std::uint64_t seed, int threads,
                      const std::string& out_dir, bool timing,
                      const std::vector<std::string>& kind_names,
                      const std::string& write_config_path) {
  balldiv::StudyConfig config = config_path.empty()
                                    ? balldiv::default_config(preset, study)
                                    : balldiv::load_config(config_path);
  if (reps > 0) config.reps = reps;
  if (B > 0) config.B = B;
  if (alpha > 0) config.alpha = alpha;
  if (seed != 0) config.master_seed = seed;
  if (threads > 0) config.threads = threads;
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (timing) config.timing = true;
  if (!kind_names.empty()) config.kinds = parse_kinds(kind_names);
  if (!scenario_ids.empty()) {
    config.scenarios.clear();
    for (const auto& id : scenario_ids) {
      const balldiv::ScenarioTemplate& tpl = balldiv::find_scenario(id);
      balldiv::ScenarioSelection sel;
      sel.id = id;
      sel.dims = dims.empty() ? tpl.full_grid() : dims;
      if (tpl.has_beta_gamma) {
        if (!has_bg)
          throw std::invalid_argument("scenario '" + id + "' needs --beta and --gamma");
        sel.beta = beta;
        sel.gamma = gamma;
        sel.has_beta_gamma = true;
      }
      config.scenarios.push_back(std::move(sel));
    }
  } else if (!dims.empty()) {
    for (auto& sel : config.scenarios) sel.dims = dims;
  }

  if (!write_config_path.empty()) {
    balldiv::save_config(config, write_config_path);
    std::printf("wrote config to %s\n", write_config_path.c_str());
    return 0;
  }

  const balldiv::StudyResult result = balldiv::run_power_study(config);
  print_record_table(result);
  const auto written = balldiv::write_study_outputs(result, config.out_dir);
  for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-sample testing via ball divergence"};
  app.require_subcommand(1);

  // --- test ---
  auto* test_cmd = app.add_subcommand("test", "one permutation test on CSV data");
  std::string csv_path, label_column, kind_name = "l2";
  int B = 500;
  double alpha = 0.05;
  std::uint64_t seed = 20170815;
  bool exhaustive = false;
  std::uint64_t max_combinations = 100000;
  int threads = 1;
  test_cmd->add_option("--csv", csv_path, "input CSV file")->required();
  test_cmd->add_option("--label-column", label_column, "name of the group-label column")
      ->required();
  test_cmd->add_option("--kind", kind_name, "distance kind: l2|l1|exp|log");
  test_cmd->add_option("--B", B, "number of random permutation replicates");
  test_cmd->add_option("--alpha", alpha, "significance level");
  test_cmd->add_option("--seed", seed, "permutation seed");
  test_cmd->add_flag("--exhaustive", exhaustive, "enumerate all C(N,n) labelings");
  test_cmd->add_option("--max-combinations", max_combinations,
                       "cap on C(N,n) for exhaustive mode");
  test_cmd->add_option("--threads", threads, "worker threads for replicates");

  // --- power / level ---
  auto* power_cmd = app.add_subcommand("power", "power study over catalogued scenarios");
  auto* level_cmd = app.add_subcommand("level", "null rejection-rate study (F = G)");
  std::string config_path, preset = "desk", out_dir, write_config_path;
  std::vector<std::string> scenario_ids;
  std::vector<int> dims;
  std::vector<std::string> kind_names;
  double beta = 0.0, gamma = 0.0;
  int reps = 0, study_B = 0;
  double study_alpha = 0.0;
  std::uint64_t master_seed = 0;
  int study_threads = 0;
  bool timing = false;
  for (CLI::App* cmd : {power_cmd, level_cmd}) {
    cmd->add_option("--config", config_path, "JSON config file (overrides the preset)");
    cmd->add_option("--preset", preset, "desk|full grid preset")
        ->check(CLI::IsMember({"desk", "full"}));
    cmd->add_option("--dims", dims, "dimension list override")->delimiter(',');
    cmd->add_option("--kinds", kind_names, "distance kinds (comma separated)")->delimiter(',');
    cmd->add_option("--reps", reps, "repetitions per grid point");
    cmd->add_option("--B", study_B, "permutation replicates per test");
    cmd->add_option("--alpha", study_alpha, "significance level");
    cmd->add_option("--seed", master_seed, "master seed");
    cmd->add_option("--threads", study_threads, "worker threads");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--timing", timing, "record wall-clock seconds (breaks byte-identity)");
    cmd->add_option("--write-config", write_config_path,
                    "write the effective config to a file and exit");
  }
  power_cmd->add_option("--scenario", scenario_ids, "scenario ids (default: ex1..ex14)");
  power_cmd->add_option("--beta", beta, "mean-separation exponent (prop41)");
  power_cmd->add_option("--gamma", gamma, "sample-size exponent (prop41)");

  // --- oracle ---
  auto* oracle_cmd = app.add_subcommand("oracle", "Monte Carlo divergence profile for a scenario");
  std::string oracle_scenario = "ex1", oracle_kind = "l2";
  int oracle_d = 4;
  std::uint64_t oracle_M = 200000, oracle_seed = 20170815;
  double oracle_beta = 0.0, oracle_gamma = 0.0;
  int energy_rows = 0;
  oracle_cmd->add_option("--scenario", oracle_scenario, "scenario id");
  oracle_cmd->add_option("--d", oracle_d, "dimension");
  oracle_cmd->add_option("--kind", oracle_kind, "distance kind: l2|l1|exp|log");
  oracle_cmd->add_option("--replicates", oracle_M, "Monte Carlo replicates");
  oracle_cmd->add_option("--seed", oracle_seed, "seed");
  oracle_cmd->add_option("--beta", oracle_beta, "prop41 beta");
  oracle_cmd->add_option("--gamma", oracle_gamma, "prop41 gamma");
  oracle_cmd->add_option("--energy-rows", energy_rows,
                         "rows per group for an energy-distance estimate (0 = skip)");

  // --- subsample ---
  auto* sub_cmd = app.add_subcommand("subsample", "subsampling power curve on CSV data");
  std::string sub_csv, sub_label, sub_out;
  std::vector<int> sub_sizes;
  std::vector<std::string> sub_kind_names{"l2"};
  int sub_reps = 100, sub_B = 500, sub_threads = 1;
  double sub_alpha = 0.05;
  std::uint64_t sub_seed = 20170815;
  sub_cmd->add_option("--csv", sub_csv, "input CSV file")->required();
  sub_cmd->add_option("--label-column", sub_label, "name of the group-label column")->required();
  sub_cmd->add_option("--sizes", sub_sizes, "pooled subsample sizes (comma separated)")
      ->delimiter(',')
      ->required();
  sub_cmd->add_option("--reps", sub_reps, "repetitions per size");
  sub_cmd->add_option("--B", sub_B, "permutation replicates per test");
  sub_cmd->add_option("--alpha", sub_alpha, "significance level");
  sub_cmd->add_option("--kinds", sub_kind_names, "distance kinds (comma separated)")
      ->delimiter(',');
  sub_cmd->add_option("--seed", sub_seed, "master seed");
  sub_cmd->add_option("--threads", sub_threads, "worker threads");
  sub_cmd->add_option("--out", sub_out, "output directory for subsample_results.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (test_cmd->parsed()) {
      const balldiv::LoadedCsv data = balldiv::load_csv(csv_path, label_column);
      const balldiv::PooledSample pooled(data.x, data.y);
      const balldiv::DistanceSpec spec = balldiv::distance_spec_from_name(kind_name);
      const balldiv::PermutationPlan plan =
          exhaustive ? balldiv::PermutationPlan::exhaustive(max_combinations)
                     : balldiv::PermutationPlan::random(B, seed);
      const balldiv::TestResult result =
          balldiv::permutation_test(pooled, spec, plan, alpha, threads);
      std::printf("group_x        %s (n=%d)\n", data.label_x.c_str(), pooled.n());
      std::printf("group_y        %s (m=%d)\n", data.label_y.c_str(), pooled.m());
      std::printf("dim            %d\n", pooled.dim());
      std::printf("kind           %s\n", spec.name());
      std::printf("mode           %s (%zu labelings)\n", result.exhaustive ? "exhaustive" : "random",
                  result.replicates.size());
      std::printf("observed_t     %.10f\n", result.observed.t);
      std::printf("observed_v1    %.10f\n", result.observed.v1);
      std::printf("observed_v2    %.10f\n", result.observed.v2);
      std::printf("p_value        %.8f\n", result.p_value);
      std::printf("alpha          %.4f\n", result.alpha);
      std::printf("reject         %s\n", result.reject ? "yes" : "no");
      std::printf("cutoff_est     %.10f (diagnostic)\n", result.cutoff_estimate);
      std::printf("cutoff_bound   %.10f\n",
                  balldiv::cutoff_upper_bound(alpha, pooled.n(), pooled.m()));
      return result.reject ? 0 : 0;
    }

    if (power_cmd->parsed() || level_cmd->parsed()) {
      const bool is_level = level_cmd->parsed();
      return run_study_command(is_level ? "level" : "power", config_path, preset,
                               is_level ? std::vector<std::string>{} : scenario_ids, dims, beta,
                               gamma, beta > 0.0, reps, study_B, study_alpha, master_seed,
                               study_threads, out_dir, timing, kind_names, write_config_path);
    }

    if (oracle_cmd->parsed()) {
      const balldiv::ScenarioTemplate& tpl = balldiv::find_scenario(oracle_scenario);
      const balldiv::ScenarioSpec spec = tpl.has_beta_gamma
                                             ? tpl.at(oracle_d, oracle_beta, oracle_gamma)
                                             : tpl.at(oracle_d);
      const balldiv::DistanceSpec kind = balldiv::distance_spec_from_name(oracle_kind);
      const balldiv::ProbabilityProfile profile = balldiv::estimate_probability_profile(
          spec.f, spec.g, kind, oracle_M, oracle_seed);
      std::printf("scenario       %s (d=%d, n=%d, m=%d)\n", spec.key.c_str(), spec.d, spec.n,
                  spec.m);
      std::printf("f              %s\n", spec.f.descriptor.c_str());
      std::printf("g              %s\n", spec.g.descriptor.c_str());
      std::printf("kind           %s\n", kind.name());
      std::printf("replicates     %" PRIu64 "\n", profile.replicates);
      for (int k = 0; k < 6; ++k)
        std::printf("p%d             %.6f (se %.6f)\n", k, profile.p[static_cast<std::size_t>(k)],
                    profile.se[static_cast<std::size_t>(k)]);
      const balldiv::ThetaEstimate theta = balldiv::theta_estimate(profile);
      std::printf("theta          %.6f (raw %.6f, se %.6f%s)\n", theta.value, theta.raw, theta.se,
                  theta.clamped ? ", clamped" : "");
      const balldiv::ValueWithSe expect = balldiv::expected_statistic(spec.n, spec.m, profile);
      std::printf("expected_t     %.6f (se %.6f) at n=%d, m=%d\n", expect.value, expect.se, spec.n,
                  spec.m);
      std::printf("proj_bound     %.6f\n", balldiv::projection_lower_bound(profile));
      std::printf("sep_rate       %.6f\n", balldiv::separation_rate(spec.n, spec.m));
      if (energy_rows > 0) {
        balldiv::DataMatrix ex(energy_rows, spec.d), ey(energy_rows, spec.d);
        for (int i = 0; i < energy_rows; ++i) {
          balldiv::RngStream sx(balldiv::derive_seed(oracle_seed, {0xE, 0, static_cast<std::uint64_t>(i)}));
          balldiv::RngStream sy(balldiv::derive_seed(oracle_seed, {0xE, 1, static_cast<std::uint64_t>(i)}));
          spec.f.draw(sx, ex.row_ptr(i));
          spec.g.draw(sy, ey.row_ptr(i));
        }
        const balldiv::EnergyEstimate energy = balldiv::energy_distance_estimate(ex, ey, kind);
        std::printf("energy         %.6f (se %.6f) at %d rows per group\n", energy.value,
                    energy.se, energy_rows);
      }
      return 0;
    }

    if (sub_cmd->parsed()) {
      const balldiv::LoadedCsv data = balldiv::load_csv(sub_csv, sub_label);
      balldiv::SubsampleConfig config;
      config.pooled_sizes = sub_sizes;
      config.reps = sub_reps;
      config.B = sub_B;
      config.alpha = sub_alpha;
      config.kinds = parse_kinds(sub_kind_names);
      config.master_seed = sub_seed;
      config.threads = sub_threads;
      const auto records = balldiv::run_subsample_study(data.x, data.y, config);
      std::printf("%8s %6s %6s %5s %6s %8s %8s %10s\n", "pooled", "n_sub", "m_sub", "kind", "reps",
                  "power", "se", "mean_p");
      for (const auto& rec : records)
        std::printf("%8d %6d %6d %5s %6d %8.4f %8.4f %10.6f\n", rec.pooled, rec.n_sub, rec.m_sub,
                    rec.kind.c_str(), rec.reps, rec.power, rec.se, rec.mean_p);
      if (!sub_out.empty()) {
        std::filesystem::create_directories(sub_out);
        const std::string path = sub_out + "/subsample_results.csv";
        std::ofstream file(path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + path);
        file << balldiv::subsample_csv_text(records);
        std::printf("wrote %s\n", path.c_str());
      }
      return 0;
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
