#pragma once

// Experiment runner behind the `stars` command line tool: dataset generation,
// single selection runs, repeated benchmarks against a known truth, and the
// concentration check. Everything is driven by one ExperimentConfig, read from
// JSON with command-line overrides merged on top.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stars/concentration.hpp"
#include "stars/error.hpp"
#include "stars/glasso.hpp"
#include "stars/selection.hpp"
#include "stars/synth.hpp"

namespace stars {

enum class Command { Generate, Select, Benchmark, Concentration };

std::string_view to_string(Command c);

inline constexpr int kDefaultRepetitions = 20;
inline constexpr int kDefaultGridSize = 30;
inline constexpr double kDefaultGridRatio = 0.05;

struct ExperimentConfig {
  GraphKind graph = GraphKind::Hub;
  double rho = kNeighborhoodRho;
  // Hub group size; 20 for datasets, 4 for the concentration check.
  std::optional<int> group_size;
  // Sample size and dimension; 400 x 100 unless set. The concentration
  // check uses n_values and p = 8 instead.
  std::optional<int> n;
  std::optional<int> p;
  // Benchmark: all five unless set. Select: exactly one, stars unless set.
  std::optional<std::vector<Method>> methods;
  // Grid of 30 points down to 0.05 lambda_max; 10 points down to 0.1 for the
  // concentration check.
  std::optional<int> grid_size;
  std::optional<double> grid_ratio;
  // Replaces the log-spaced grid when given (descending penalties).
  std::optional<std::vector<double>> lambdas;
  // StARS subsample count N; 100 for selection, 50 for the concentration check.
  std::optional<int> subsamples;
  std::optional<int> block_size;
  double beta = 0.05;
  bool refit_full = false;
  // On for benchmark, off for select (which reports the full curve).
  std::optional<bool> stop_when_unstable;
  int folds = 10;
  int repetitions = kDefaultRepetitions;
  std::uint64_t seed = 1;
  int threads = 0;
  GlassoConfig glasso;

  std::filesystem::path out = "out";
  // select: input data and, for the oracle, the truth directory.
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> truth;
  bool dot = false;

  // Concentration check.
  std::vector<int> n_values{100, 400, 1600};
  int trials = 200;
  int mc_datasets = 200;
  double delta = 0.05;

  int resolved_n() const { return n.value_or(400); }
  int resolved_p(Command c) const { return p.value_or(c == Command::Concentration ? 8 : 100); }
  int resolved_group_size(Command c) const {
    return group_size.value_or(c == Command::Concentration ? 4 : kHubGroupSize);
  }

  int resolved_grid_size(Command c) const {
    return grid_size.value_or(c == Command::Concentration ? 10 : kDefaultGridSize);
  }
  double resolved_grid_ratio(Command c) const {
    return grid_ratio.value_or(c == Command::Concentration ? 0.1 : kDefaultGridRatio);
  }
  std::vector<Method> resolved_methods(Command c) const;
  bool resolved_stop_when_unstable(Command c) const {
    return stop_when_unstable.value_or(c == Command::Benchmark);
  }

  // Throws Error(Config) naming the offending key.
  void validate(Command c) const;
};

// Builds a config from a JSON object. Unknown keys and ill-typed values are
// Config errors. `source` prefixes the messages (usually the file name).
ExperimentConfig config_from_json(const nlohmann::json& j, Command c,
                                  const std::string& source = "config");
// Parses JSON text; syntax errors are reported with line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& source);
// File values first, then `overrides` (an object of the same keys) on top.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const nlohmann::json& overrides, Command c);
nlohmann::json config_to_json(const ExperimentConfig& cfg, Command c);

// 0 success, 2 configuration or invalid input, 3 numerical failure, 4 IO.
int exit_code(ErrorCode code);

// Benchmark repetition r sees exactly the truth and data that `generate`
// writes for seed cfg.seed + r.
GroundTruth make_truth(const ExperimentConfig& cfg, std::uint64_t seed);
DataMatrix make_data(const GroundTruth& truth, int n, std::uint64_t seed);

RegularizationGrid make_grid(const ExperimentConfig& cfg, const SymMatrix& sigma_hat);

// Writes omega.csv, edges.tsv, meta.json and data.csv into cfg.out.
void cmd_generate(const ExperimentConfig& cfg);

struct SelectOutput {
  RegularizationGrid grid;
  SelectionResult result;
  int n = 0;
  int p = 0;
};

SelectOutput run_select(const ExperimentConfig& cfg, const DataMatrix& data,
                        const GroundTruth* truth);
std::string selection_json(const SelectOutput& out, const ExperimentConfig& cfg);
// Reads cfg.data, writes selection.json, edges.tsv and optionally graph.dot.
SelectOutput cmd_select(const ExperimentConfig& cfg);

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

struct BenchmarkRow {
  int rep = 0;
  Method method = Method::Stars;
  // "ok" or the error code name; failed rows are left out of the summary.
  std::string status = "ok";
  std::string message;
  EdgeMetrics metrics;
  long long edges = 0;
  long long edge_distance = 0;
  int chosen_index = -1;
  double chosen_capital_lambda = 0.0;
  bool contains_truth = false;
  double seconds = 0.0;
};

struct MethodSummary {
  Method method = Method::Stars;
  int reps_ok = 0;
  int exclusions = 0;
  Stat precision;
  Stat recall;
  Stat f1;
  Stat edge_distance;
  // Fraction of successful repetitions whose graph contains every true edge.
  double containment_fraction = 0.0;
};

struct BenchmarkReport {
  ExperimentConfig config;
  std::vector<BenchmarkRow> rows;
  std::vector<MethodSummary> summary;

  const MethodSummary* find(Method m) const;
};

Stat summarize_values(const std::vector<double>& v);
std::vector<MethodSummary> summarize(const std::vector<BenchmarkRow>& rows,
                                     const std::vector<Method>& methods);

// Runs every repetition; `progress` receives one line per repetition.
BenchmarkReport run_benchmark(const ExperimentConfig& cfg, std::ostream* progress = nullptr);
std::string per_rep_csv(const BenchmarkReport& report);
std::string summary_json(const BenchmarkReport& report);
std::string timings_csv(const BenchmarkReport& report);
// Writes per_rep.csv, summary.json and timings.csv into cfg.out.
BenchmarkReport cmd_benchmark(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

ConcentrationConfig concentration_config(const ExperimentConfig& cfg);
std::string concentration_csv(const ConcentrationReport& report);
// Writes concentration.csv into cfg.out.
ConcentrationReport cmd_concentration(const ExperimentConfig& cfg);

}  // namespace stars
