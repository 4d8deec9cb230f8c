#include "balldiv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "balldiv/rng.hpp"
#include "balldiv/statistic.hpp"

namespace balldiv {

std::uint64_t grid_seed(std::uint64_t master, const std::string& scenario_key, int d, int kind_id,
                        int rep, int salt) {
  return derive_seed(master, {hash_string(scenario_key), static_cast<std::uint64_t>(d),
                              static_cast<std::uint64_t>(kind_id),
                              static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(salt)});
}

namespace {

struct GridPoint {
  ScenarioSpec spec;
  DistanceSpec kind;
};

std::string format_double(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

void validate_common(double alpha, int reps, int B, int threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must be in (0,1)");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (B < 1) throw std::invalid_argument("config: B must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

// Runs `count` tasks over a small worker pool. Task results must be written
// to disjoint slots so the outcome is independent of scheduling.
void run_tasks(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

StudyResult run_power_study(const StudyConfig& config) {
  if (config.version != kConfigVersion)
    throw std::invalid_argument("config: unsupported version");
  if (config.study != "power" && config.study != "level")
    throw std::invalid_argument("config: study must be 'power' or 'level'");
  validate_common(config.alpha, config.reps, config.B, config.threads);
  if (config.kinds.empty()) throw std::invalid_argument("config: at least one distance kind");
  if (config.scenarios.empty()) throw std::invalid_argument("config: at least one scenario");

  // Resolve the whole grid up front so invalid points fail before any work.
  std::vector<GridPoint> grid;
  for (const auto& sel : config.scenarios) {
    const ScenarioTemplate& tpl = find_scenario(sel.id);
    if (sel.dims.empty())
      throw std::invalid_argument("config: scenario '" + sel.id + "' has an empty dims list");
    for (int d : sel.dims) {
      ScenarioSpec spec =
          sel.has_beta_gamma ? tpl.at(d, sel.beta, sel.gamma) : tpl.at(d);
      if (spec.n < 3 || spec.m < 3)
        throw std::invalid_argument("config: grid point " + spec.key + " d=" + std::to_string(d) +
                                    " yields a group smaller than 3");
      for (const DistanceKind kind : config.kinds) {
        DistanceSpec ds;
        ds.kind = kind;
        grid.push_back({spec, ds});
      }
    }
  }

  const std::size_t reps = static_cast<std::size_t>(config.reps);
  const std::size_t tasks = grid.size() * reps;
  std::vector<double> pvals(tasks, 0.0);
  std::vector<std::uint8_t> rejects(tasks, 0);
  std::vector<std::atomic<std::int64_t>> nanos(grid.size());
  for (auto& a : nanos) a.store(0);

  run_tasks(tasks, config.threads, [&](std::size_t idx) {
    const std::size_t g = idx / reps;
    const int rep = static_cast<int>(idx % reps);
    const GridPoint& point = grid[g];
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t data_seed =
        grid_seed(config.master_seed, point.spec.key, point.spec.d, point.kind.id(), rep, 0);
    const std::uint64_t perm_seed =
        grid_seed(config.master_seed, point.spec.key, point.spec.d, point.kind.id(), rep, 1);
    const PooledSample data = draw_dataset(point.spec, data_seed);
    const TestResult result = permutation_test(
        data, point.kind, PermutationPlan::random(config.B, perm_seed), config.alpha, 1);
    pvals[idx] = result.p_value;
    rejects[idx] = result.reject ? 1 : 0;
    if (config.timing) {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      nanos[g].fetch_add(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
    }
  });

  StudyResult out;
  out.config = config;
  out.records.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GridPoint& point = grid[g];
    GridRecord rec;
    rec.scenario_key = point.spec.key;
    rec.d = point.spec.d;
    rec.n = point.spec.n;
    rec.m = point.spec.m;
    rec.kind = point.kind.name();
    rec.reps = config.reps;
    double sum_p = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      rec.rejections += rejects[g * reps + r];
      sum_p += pvals[g * reps + r];
    }
    rec.power = static_cast<double>(rec.rejections) / static_cast<double>(config.reps);
    rec.se = std::sqrt(rec.power * (1.0 - rec.power) / static_cast<double>(config.reps));
    rec.mean_p = sum_p / static_cast<double>(config.reps);
    rec.seconds = config.timing ? static_cast<double>(nanos[g].load()) * 1e-9 : 0.0;
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string tidy_csv_text(const StudyResult& result) {
  std::string text = "scenario,d,n,m,kind,reps,rejections,power,se,mean_p,seconds\n";
  for (const auto& rec : result.records) {
    text += rec.scenario_key;
    text += ',' + std::to_string(rec.d) + ',' + std::to_string(rec.n) + ',' +
            std::to_string(rec.m) + ',' + rec.kind + ',' + std::to_string(rec.reps) + ',' +
            std::to_string(rec.rejections) + ',' + format_double("%.6f", rec.power) + ',' +
            format_double("%.6f", rec.se) + ',' + format_double("%.8f", rec.mean_p) + ',' +
            format_double("%.6f", rec.seconds) + '\n';
  }
  return text;
}

std::vector<std::string> write_study_outputs(const StudyResult& result,
                                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const std::string results_path = out_dir + "/" + result.config.study + "_results.csv";
  {
    std::ofstream file(results_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + results_path);
    file << tidy_csv_text(result);
  }
  written.push_back(results_path);

  // Group records per scenario panel: rows indexed by d, one column per kind.
  std::vector<std::string> panel_order;
  std::map<std::string, std::map<int, std::map<std::string, double>>> panels;
  std::vector<std::string> kind_order;
  for (const auto& rec : result.records) {
    if (!panels.count(rec.scenario_key)) panel_order.push_back(rec.scenario_key);
    panels[rec.scenario_key][rec.d][rec.kind] = rec.power;
    if (std::find(kind_order.begin(), kind_order.end(), rec.kind) == kind_order.end())
      kind_order.push_back(rec.kind);
  }
  for (const auto& key : panel_order) {
    const std::string path = out_dir + "/plot_" + key + ".csv";
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << "log2d";
    for (const auto& kind : kind_order) file << ',' << kind;
    file << '\n';
    for (const auto& [d, by_kind] : panels[key]) {
      file << format_double("%.4f", std::log2(static_cast<double>(d)));
      for (const auto& kind : kind_order) {
        auto it = by_kind.find(kind);
        file << ',' << (it == by_kind.end() ? "" : format_double("%.6f", it->second));
      }
      file << '\n';
    }
    written.push_back(path);
  }
  return written;
}

std::pair<int, int> proportional_allocation(int n_full, int m_full, int pooled) {
  if (n_full < 3 || m_full < 3)
    throw std::invalid_argument("proportional_allocation: full groups need at least 3 rows");
  if (pooled < 6)
    throw std::invalid_argument("proportional_allocation: pooled size must be at least 6");
  if (pooled > n_full + m_full)
    throw std::invalid_argument("proportional_allocation: pooled size exceeds available rows");
  // Exact integer arithmetic: a0 = round(pooled * n_full / (n_full + m_full)),
  // remainders of exactly one half rounding toward the larger group.
  const long long num = static_cast<long long>(pooled) * n_full;
  const long long den = n_full + m_full;
  long long a0 = num / den;
  const long long rem2 = 2 * (num - a0 * den);
  if (rem2 > den || (rem2 == den && n_full >= m_full)) ++a0;
  long long a1 = pooled - a0;
  if (a0 > n_full) {
    a0 = n_full;
    a1 = pooled - a0;
  }
  if (a1 > m_full) {
    a1 = m_full;
    a0 = pooled - a1;
  }
  if (a0 < 3) {
    a0 = 3;
    a1 = pooled - 3;
  }
  if (a1 < 3) {
    a1 = 3;
    a0 = pooled - 3;
  }
  if (a0 < 3 || a1 < 3 || a0 > n_full || a1 > m_full)
    throw std::invalid_argument(
        "proportional_allocation: cannot allocate at least 3 per group within the data");
  return {static_cast<int>(a0), static_cast<int>(a1)};
}

namespace {

// k distinct indices from 0..size-1 (partial Fisher–Yates), sorted ascending
// so that k == size reproduces the original row order.
std::vector<int> sample_indices(RngStream& stream, int size, int k) {
  std::vector<int> idx(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(stream.uniform_index(static_cast<std::uint64_t>(size - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

DataMatrix take_rows(const DataMatrix& src, const std::vector<int>& rows) {
  DataMatrix out(static_cast<int>(rows.size()), src.dim());
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy_n(src.row_ptr(rows[r]), src.dim(), out.row_ptr(static_cast<int>(r)));
  return out;
}

}  // namespace

std::vector<SubsampleRecord> run_subsample_study(const DataMatrix& x, const DataMatrix& y,
                                                 const SubsampleConfig& config) {
  validate_common(config.alpha, config.reps, config.B, config.threads);
  if (config.kinds.empty())
    throw std::invalid_argument("subsample: at least one distance kind");
  if (config.pooled_sizes.empty())
    throw std::invalid_argument("subsample: at least one pooled size");

  struct Point {
    int pooled, n_sub, m_sub;
    DistanceSpec kind;
  };
  std::vector<Point> grid;
  for (int pooled : config.pooled_sizes) {
    const auto alloc = proportional_allocation(x.rows(), y.rows(), pooled);
    for (const DistanceKind kind : config.kinds) {
      DistanceSpec ds;
      ds.kind = kind;
      grid.push_back({pooled, alloc.first, alloc.second, ds});
    }
  }

  const std::size_t reps = static_cast<std::size_t>(config.reps);
  const std::size_t tasks = grid.size() * reps;
  std::vector<double> pvals(tasks, 0.0);
  std::vector<std::uint8_t> rejects(tasks, 0);
  const std::uint64_t tag = hash_string("subsample");

  run_tasks(tasks, config.threads, [&](std::size_t idx) {
    const std::size_t g = idx / reps;
    const int rep = static_cast<int>(idx % reps);
    const Point& point = grid[g];
    RngStream stream(derive_seed(config.master_seed,
                                 {tag, static_cast<std::uint64_t>(point.pooled),
                                  static_cast<std::uint64_t>(point.kind.id()),
                                  static_cast<std::uint64_t>(rep), 0}));
    const auto rows_x = sample_indices(stream, x.rows(), point.n_sub);
    const auto rows_y = sample_indices(stream, y.rows(), point.m_sub);
    PooledSample data(take_rows(x, rows_x), take_rows(y, rows_y));
    const std::uint64_t perm_seed =
        derive_seed(config.master_seed, {tag, static_cast<std::uint64_t>(point.pooled),
                                         static_cast<std::uint64_t>(point.kind.id()),
                                         static_cast<std::uint64_t>(rep), 1});
    const TestResult result = permutation_test(
        data, point.kind, PermutationPlan::random(config.B, perm_seed), config.alpha, 1);
    pvals[idx] = result.p_value;
    rejects[idx] = result.reject ? 1 : 0;
  });

  std::vector<SubsampleRecord> out;
  out.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Point& point = grid[g];
    SubsampleRecord rec;
    rec.pooled = point.pooled;
    rec.n_sub = point.n_sub;
    rec.m_sub = point.m_sub;
    rec.kind = point.kind.name();
    rec.reps = config.reps;
    double sum_p = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      rec.rejections += rejects[g * reps + r];
      sum_p += pvals[g * reps + r];
    }
    rec.power = static_cast<double>(rec.rejections) / static_cast<double>(config.reps);
    rec.se = std::sqrt(rec.power * (1.0 - rec.power) / static_cast<double>(config.reps));
    rec.mean_p = sum_p / static_cast<double>(config.reps);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string subsample_csv_text(const std::vector<SubsampleRecord>& records) {
  std::string text = "pooled,n_sub,m_sub,kind,reps,rejections,power,se,mean_p\n";
  for (const auto& rec : records) {
    text += std::to_string(rec.pooled) + ',' + std::to_string(rec.n_sub) + ',' +
            std::to_string(rec.m_sub) + ',' + rec.kind + ',' + std::to_string(rec.reps) + ',' +
            std::to_string(rec.rejections) + ',' + format_double("%.6f", rec.power) + ',' +
            format_double("%.6f", rec.se) + ',' + format_double("%.8f", rec.mean_p) + '\n';
  }
  return text;
}

}  // namespace balldiv
