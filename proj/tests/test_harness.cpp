#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "balldiv/core.hpp"
#include "balldiv/harness.hpp"
#include "balldiv/permute.hpp"
#include "balldiv/rng.hpp"
#include "doctest.h"

using namespace balldiv;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream file(path, std::ios::binary);
  file << content;
  file.close();
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file.good());
  std::string text((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return text;
}

// Two well-separated gaussian clouds, written as matrices.
std::pair<DataMatrix, DataMatrix> separated_clouds(int rows, int d, double gap,
                                                   std::uint64_t seed) {
  DataMatrix x(rows, d), y(rows, d);
  RngStream rng(seed);
  for (int i = 0; i < rows; ++i)
    for (int q = 0; q < d; ++q) x.row_ptr(i)[q] = rng.normal();
  for (int j = 0; j < rows; ++j)
    for (int q = 0; q < d; ++q) y.row_ptr(j)[q] = gap + rng.normal();
  x.check_finite();
  y.check_finite();
  return {std::move(x), std::move(y)};
}

StudyConfig tiny_level_config() {
  StudyConfig config;
  config.study = "level";
  config.reps = 12;
  config.B = 60;
  config.kinds = {DistanceKind::L2, DistanceKind::Exp};
  ScenarioSelection sel;
  sel.id = "level";
  sel.dims = {2, 4};
  config.scenarios = {sel};
  return config;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("proportional allocation") {
    CHECK(proportional_allocation(40, 22, 31) == std::pair<int, int>{20, 11});
    // Exact halves round toward the larger group, first group on ties.
    CHECK(proportional_allocation(10, 10, 7) == std::pair<int, int>{4, 3});
    CHECK(proportional_allocation(10, 14, 6) == std::pair<int, int>{3, 3});
    CHECK(proportional_allocation(10, 12, 11) == std::pair<int, int>{5, 6});
    // The floor of 3 per group overrides proportionality.
    CHECK(proportional_allocation(100, 3, 6) == std::pair<int, int>{3, 3});
    CHECK(proportional_allocation(100, 5, 8) == std::pair<int, int>{5, 3});
    // Full pooled size keeps the original split.
    CHECK(proportional_allocation(40, 22, 62) == std::pair<int, int>{40, 22});
    CHECK_THROWS_AS(proportional_allocation(3, 3, 7), std::invalid_argument);
    CHECK_THROWS_AS(proportional_allocation(40, 22, 5), std::invalid_argument);
    CHECK_THROWS_AS(proportional_allocation(2, 22, 10), std::invalid_argument);
  }

  TEST_CASE("grid seeds separate every coordinate of the grid") {
    const std::uint64_t base = grid_seed(1, "ex1", 2, 0, 0, 0);
    CHECK(base != grid_seed(2, "ex1", 2, 0, 0, 0));
    CHECK(base != grid_seed(1, "ex2", 2, 0, 0, 0));
    CHECK(base != grid_seed(1, "ex1", 4, 0, 0, 0));
    CHECK(base != grid_seed(1, "ex1", 2, 1, 0, 0));
    CHECK(base != grid_seed(1, "ex1", 2, 0, 1, 0));
    CHECK(base != grid_seed(1, "ex1", 2, 0, 0, 1));
    CHECK(base == grid_seed(1, "ex1", 2, 0, 0, 0));
  }

  TEST_CASE("study runner fills one record per grid point") {
    const StudyConfig config = tiny_level_config();
    const StudyResult result = run_power_study(config);
    REQUIRE(result.records.size() == 4);  // 2 dims x 2 kinds
    for (const auto& rec : result.records) {
      CHECK(rec.scenario_key == "level");
      CHECK(rec.n == 50);
      CHECK(rec.m == 50);
      CHECK(rec.reps == 12);
      CHECK(rec.power >= 0.0);
      CHECK(rec.power <= 1.0);
      CHECK(rec.rejections == static_cast<int>(rec.power * 12 + 0.5));
      CHECK(rec.seconds == 0.0);  // timing disabled by default
      CHECK(rec.mean_p > 0.0);
    }
    CHECK(result.records[0].kind == "l2");
    CHECK(result.records[1].kind == "exp");
    CHECK(result.records[0].d == 2);
    CHECK(result.records[2].d == 4);
  }

  TEST_CASE("studies are byte-identical across runs and thread counts") {
    StudyConfig config = tiny_level_config();
    config.threads = 1;
    const std::string once = tidy_csv_text(run_power_study(config));
    const std::string twice = tidy_csv_text(run_power_study(config));
    CHECK(once == twice);
    config.threads = 3;
    const std::string threaded = tidy_csv_text(run_power_study(config));
    CHECK(once == threaded);

    const std::string dir_a = (std::filesystem::temp_directory_path() / "bd_out_a").string();
    const std::string dir_b = (std::filesystem::temp_directory_path() / "bd_out_b").string();
    config.threads = 2;
    const auto files_a = write_study_outputs(run_power_study(config), dir_a);
    config.threads = 1;
    const auto files_b = write_study_outputs(run_power_study(config), dir_b);
    REQUIRE(files_a.size() == files_b.size());
    REQUIRE(files_a.size() == 2);  // level_results.csv + plot_level.csv
    for (std::size_t k = 0; k < files_a.size(); ++k)
      CHECK(slurp(files_a[k]) == slurp(files_b[k]));
    CHECK(files_a[0].find("level_results.csv") != std::string::npos);
    CHECK(files_a[1].find("plot_level.csv") != std::string::npos);
  }

  TEST_CASE("timing flag fills the seconds column") {
    StudyConfig config = tiny_level_config();
    config.reps = 4;
    config.scenarios[0].dims = {2};
    config.kinds = {DistanceKind::L2};
    config.timing = true;
    const StudyResult result = run_power_study(config);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].seconds > 0.0);
  }

  TEST_CASE("study runner validates its configuration") {
    StudyConfig config = tiny_level_config();
    config.reps = 0;
    CHECK_THROWS_AS(run_power_study(config), std::invalid_argument);
    config = tiny_level_config();
    config.kinds.clear();
    CHECK_THROWS_AS(run_power_study(config), std::invalid_argument);
    config = tiny_level_config();
    config.scenarios.clear();
    CHECK_THROWS_AS(run_power_study(config), std::invalid_argument);
    config = tiny_level_config();
    config.scenarios[0].dims.clear();
    CHECK_THROWS_AS(run_power_study(config), std::invalid_argument);
    config = tiny_level_config();
    config.version = 2;
    CHECK_THROWS_AS(run_power_study(config), std::invalid_argument);
    config = tiny_level_config();
    config.scenarios[0].id = "prop41";  // needs beta/gamma
    CHECK_THROWS_AS(run_power_study(config), std::invalid_argument);
  }

  TEST_CASE("null rejection rate stays near the nominal level") {
    StudyConfig config;
    config.study = "level";
    config.reps = 100;
    config.B = 99;
    config.kinds = {DistanceKind::L2};
    ScenarioSelection sel;
    sel.id = "level";
    sel.dims = {4};
    config.scenarios = {sel};
    const StudyResult result = run_power_study(config);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].power <= 0.14);  // 0.05 + 4 binomial SEs
  }

  TEST_CASE("power grows with dimension under a fixed per-coordinate shift") {
    StudyConfig config;
    config.reps = 120;
    config.B = 300;
    config.kinds = {DistanceKind::L2};
    ScenarioSelection sel;
    sel.id = "ex1";
    sel.dims = {2, 1024};
    config.scenarios = {sel};
    const StudyResult result = run_power_study(config);
    REQUIRE(result.records.size() == 2);
    const GridRecord& low = result.records[0];
    const GridRecord& high = result.records[1];
    REQUIRE(low.d == 2);
    REQUIRE(high.d == 1024);
    const double combined = std::sqrt(low.se * low.se + high.se * high.se);
    CHECK(high.power - low.power > 5.0 * combined);
    CHECK(high.power >= 0.9);
  }

  TEST_CASE("bounded distance dominates on heavy-tailed location shifts") {
    StudyConfig config;
    config.reps = 100;
    config.B = 300;
    config.kinds = {DistanceKind::L2, DistanceKind::Exp};
    ScenarioSelection sel;
    sel.id = "ex4";
    sel.dims = {64};
    config.scenarios = {sel};
    const StudyResult result = run_power_study(config);
    REQUIRE(result.records.size() == 2);
    REQUIRE(result.records[0].kind == "l2");
    REQUIRE(result.records[1].kind == "exp");
    CHECK(result.records[1].power >= 0.9);
    CHECK(result.records[0].power <= 0.2);
  }

  TEST_CASE("config JSON round-trips") {
    StudyConfig config = default_config("desk", "power");
    config.master_seed = 777;
    config.threads = 2;
    const std::string text = config_to_json(config);
    const StudyConfig parsed = config_from_json_text(text);
    CHECK(parsed.version == config.version);
    CHECK(parsed.study == "power");
    CHECK(parsed.alpha == config.alpha);
    CHECK(parsed.reps == 200);
    CHECK(parsed.B == 500);
    CHECK(parsed.master_seed == 777);
    CHECK(parsed.threads == 2);
    CHECK(parsed.timing == false);
    REQUIRE(parsed.kinds.size() == 4);
    REQUIRE(parsed.scenarios.size() == 14);
    CHECK(parsed.scenarios[0].id == "ex1");
    CHECK(parsed.scenarios[0].dims == std::vector<int>{2, 8, 32, 128, 512});
    CHECK(parsed.scenarios[8].id == "ex9");
    CHECK(parsed.scenarios[8].dims == std::vector<int>{2, 8, 32, 128});

    const std::string path = write_temp("bd_config.json", text);
    const StudyConfig loaded = load_config(path);
    CHECK(loaded.master_seed == 777);
    CHECK(config_to_json(loaded) == text);
  }

  TEST_CASE("full preset uses the complete dimension grids") {
    const StudyConfig config = default_config("full", "power");
    CHECK(config.reps == 500);
    CHECK(config.scenarios[0].dims.size() == 10);
    CHECK(config.scenarios[0].dims.back() == 1024);
    CHECK(config.scenarios[10].dims.size() == 8);  // ex11 tops out at 2^8
    const StudyConfig level = default_config("desk", "level");
    REQUIRE(level.scenarios.size() == 1);
    CHECK(level.scenarios[0].id == "level");
  }

  TEST_CASE("config parsing rejects malformed documents") {
    CHECK_THROWS_AS(config_from_json_text("not json"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json_text("[1,2]"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json_text(R"({"scenarios":[{"id":"ex1","dims":[2]}]})"),
                    std::invalid_argument);  // missing version
    CHECK_THROWS_AS(
        config_from_json_text(R"({"version":2,"scenarios":[{"id":"ex1","dims":[2]}]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json_text(
            R"({"version":1,"typo":3,"scenarios":[{"id":"ex1","dims":[2]}]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json_text(
            R"({"version":1,"scenarios":[{"id":"ex1","dims":[2],"beta":0.5}]})"),
        std::invalid_argument);  // beta without gamma
    CHECK_THROWS_AS(config_from_json_text(R"({"version":1,"scenarios":[]})"),
                    std::invalid_argument);
    const StudyConfig minimal =
        config_from_json_text(R"({"version":1,"scenarios":[{"id":"ex1","dims":[2]}]})");
    CHECK(minimal.reps == 200);
    CHECK(minimal.kinds.size() == 4);
    const StudyConfig with_bg = config_from_json_text(
        R"({"version":1,"scenarios":[{"id":"prop41","dims":[4],"beta":0.5,"gamma":1.1}]})");
    CHECK(with_bg.scenarios[0].has_beta_gamma);
    CHECK(with_bg.scenarios[0].beta == 0.5);
  }

  TEST_CASE("csv loading splits groups by lexicographic label") {
    const std::string path = write_temp("bd_ok.csv",
                                        "f1,f2,grp\n"
                                        "1.0,2.0,b\n"
                                        "3.0,4.0,a\n"
                                        "5.0,6.0,b\n"
                                        "7.0,8.0,a\n"
                                        "9.0,10.0,a\n"
                                        "\n");
    const LoadedCsv data = load_csv(path, "grp");
    CHECK(data.label_x == "a");
    CHECK(data.label_y == "b");
    REQUIRE(data.x.rows() == 3);
    REQUIRE(data.y.rows() == 2);
    CHECK(data.x.dim() == 2);
    // Rows keep file order within each group.
    CHECK(data.x.row(0)[0] == 3.0);
    CHECK(data.x.row(1)[0] == 7.0);
    CHECK(data.x.row(2)[0] == 9.0);
    CHECK(data.y.row(0)[0] == 1.0);
    CHECK(data.y.row(1)[0] == 5.0);
    REQUIRE(data.feature_columns.size() == 2);
    CHECK(data.feature_columns[0] == "f1");
    CHECK(data.feature_columns[1] == "f2");
    // The label column can sit anywhere, not just last.
    const std::string mid = write_temp("bd_mid.csv",
                                       "f1,grp,f2\n"
                                       "1.0,x,2.0\n"
                                       "3.0,y,4.0\n"
                                       "5.0,x,6.0\n");
    const LoadedCsv data2 = load_csv(mid, "grp");
    CHECK(data2.x.rows() == 2);
    CHECK(data2.x.row(0)[1] == 2.0);
  }

  TEST_CASE("csv loading reports precise errors") {
    auto error_text = [](const std::string& path, const std::string& label) {
      try {
        load_csv(path, label);
      } catch (const std::runtime_error& err) {
        return std::string(err.what());
      }
      return std::string();
    };
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "grp"), std::runtime_error);
    const std::string no_col = write_temp("bd_nocol.csv", "a,b\n1,2\n");
    CHECK(error_text(no_col, "grp").find("no column named 'grp'") != std::string::npos);
    // Errors point at file lines (the header is line 1).
    const std::string bad_cell = write_temp("bd_badcell.csv", "a,grp\n1,x\noops,y\n1,x\n");
    CHECK(error_text(bad_cell, "grp").find("line 3") != std::string::npos);
    CHECK(error_text(bad_cell, "grp").find("'oops'") != std::string::npos);
    const std::string ragged = write_temp("bd_ragged.csv", "a,b,grp\n1,2,x\n1,2\n");
    CHECK(error_text(ragged, "grp").find("line 3") != std::string::npos);
    const std::string one_label = write_temp("bd_onelabel.csv", "a,grp\n1,x\n2,x\n");
    CHECK_THROWS_AS(load_csv(one_label, "grp"), std::runtime_error);
    const std::string three_labels =
        write_temp("bd_threelabels.csv", "a,grp\n1,x\n2,y\n3,z\n");
    CHECK_THROWS_AS(load_csv(three_labels, "grp"), std::runtime_error);
    const std::string no_rows = write_temp("bd_norows.csv", "a,grp\n");
    CHECK_THROWS_AS(load_csv(no_rows, "grp"), std::runtime_error);
    const std::string non_finite = write_temp("bd_nan.csv", "a,grp\nnan,x\n2,y\n");
    CHECK_THROWS_AS(load_csv(non_finite, "grp"), std::runtime_error);
    const std::string only_label = write_temp("bd_onlylabel.csv", "grp\nx\ny\n");
    CHECK_THROWS_AS(load_csv(only_label, "grp"), std::runtime_error);
  }

  TEST_CASE("subsampling power grows with the subsample size") {
    auto [x, y] = separated_clouds(120, 2, 0.75, 0xCAFE);
    SubsampleConfig config;
    config.pooled_sizes = {16, 120};
    config.reps = 60;
    config.B = 150;
    config.kinds = {DistanceKind::L2};
    config.master_seed = 5;
    const auto records = run_subsample_study(x, y, config);
    REQUIRE(records.size() == 2);
    CHECK(records[0].pooled == 16);
    CHECK(records[0].n_sub == 8);
    CHECK(records[0].m_sub == 8);
    CHECK(records[1].pooled == 120);
    CHECK(records[1].power > records[0].power + 0.2);
    CHECK(records[1].power >= 0.9);
    const std::string text = subsample_csv_text(records);
    CHECK(text.rfind("pooled,n_sub,m_sub,kind,reps,rejections,power,se,mean_p\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }

  TEST_CASE("a full-size subsample reproduces the direct test bit for bit") {
    auto [x, y] = separated_clouds(12, 2, 0.8, 0xBEEF);
    SubsampleConfig config;
    config.pooled_sizes = {24};
    config.reps = 1;
    config.B = 200;
    config.kinds = {DistanceKind::L2};
    config.master_seed = 99;
    const auto records = run_subsample_study(x, y, config);
    REQUIRE(records.size() == 1);
    CHECK(records[0].n_sub == 12);
    CHECK(records[0].m_sub == 12);

    const std::uint64_t perm_seed =
        derive_seed(99, {hash_string("subsample"), 24, 0, 0, 1});
    DistanceSpec l2;
    const TestResult direct = permutation_test(PooledSample(x, y), l2,
                                               PermutationPlan::random(200, perm_seed), 0.05);
    CHECK(records[0].mean_p == direct.p_value);
    CHECK(records[0].rejections == (direct.reject ? 1 : 0));
  }

  TEST_CASE("subsample study validation") {
    auto [x, y] = separated_clouds(10, 2, 1.0, 1);
    SubsampleConfig config;
    config.kinds = {DistanceKind::L2};
    config.pooled_sizes = {};
    CHECK_THROWS_AS(run_subsample_study(x, y, config), std::invalid_argument);
    config.pooled_sizes = {21};  // exceeds 20 available rows
    CHECK_THROWS_AS(run_subsample_study(x, y, config), std::invalid_argument);
    config.pooled_sizes = {16};
    config.kinds.clear();
    CHECK_THROWS_AS(run_subsample_study(x, y, config), std::invalid_argument);
  }
}
