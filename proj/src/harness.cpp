#include "stars/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "stars/io.hpp"
#include "stars/selectors.hpp"
#include "stars/stability.hpp"

namespace stars {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kStarsStream = 0x57a5;
constexpr std::uint64_t kCvStream = 0xcf;

const std::set<std::string> kGlassoKeys{"max_outer_iters", "tol", "inner_max_iters", "inner_tol",
                                        "penalize_diagonal"};
const std::set<std::string> kKeys{
    "graph", "rho",          "group_size", "n",      "p",          "methods",     "grid_size",
    "grid_ratio", "lambdas", "subsamples", "block_size", "beta",   "refit_full",
    "stop_when_unstable", "folds", "repetitions", "seed", "threads", "glasso", "out",
    "data", "truth", "dot", "n_values", "trials", "mc_datasets", "delta"};

Error config_error(const std::string& source, const std::string& key, const std::string& what) {
  return Error(ErrorCode::Config, source + ": '" + key + "' " + what);
}

template <class T>
T get_value(const json& j, const std::string& key, const std::string& source) {
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw config_error(source, key, "must be true or false");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw config_error(source, key, "must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return v.get<T>();
      if (v.get<long long>() < 0) throw config_error(source, key, "must be nonnegative");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw config_error(source, key, "must be a number");
  } else {
    if (!v.is_string()) throw config_error(source, key, "must be a string");
  }
  return v.get<T>();
}

template <class T>
std::vector<T> get_list(const json& j, const std::string& key, const std::string& source) {
  const json& v = j.at(key);
  if (!v.is_array()) throw config_error(source, key, "must be a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    json wrapped = {{key, v[i]}};
    out.push_back(get_value<T>(wrapped, key, source));
  }
  return out;
}

template <class Fn>
auto rethrow_as_config(const std::string& source, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw config_error(source, key, e.what());
  }
}

std::string format(double v) { return io::format_double(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json stat_json(const Stat& s) { return json{{"mean", s.mean}, {"sd", s.sd}, {"se", s.se}}; }

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Generate: return "generate";
    case Command::Select: return "select";
    case Command::Benchmark: return "benchmark";
    case Command::Concentration: return "concentration";
  }
  return "?";
}

std::vector<Method> ExperimentConfig::resolved_methods(Command c) const {
  if (methods) return *methods;
  if (c == Command::Select) return {Method::Stars};
  return {Method::Stars, Method::Aic, Method::Bic, Method::Kcv, Method::Oracle};
}

void ExperimentConfig::validate(Command c) const {
  const std::string src = "config";
  const int pp = resolved_p(c);
  if (pp < 2) throw config_error(src, "p", "must be >= 2");
  if (graph == GraphKind::Hub) {
    const int s = resolved_group_size(c);
    if (s < 2 || s >= pp) throw config_error(src, "group_size", "must satisfy 2 <= group_size < p");
  } else if (!(rho > 0.0 && rho < 1.0)) {
    throw config_error(src, "rho", "must lie in (0, 1)");
  }
  if (threads < 0) throw config_error(src, "threads", "must be >= 0");
  if (resolved_grid_size(c) < (c == Command::Concentration ? 1 : 2)) {
    throw config_error(src, "grid_size", "is too small");
  }
  const double ratio = resolved_grid_ratio(c);
  if (!(ratio > 0.0 && ratio < 1.0)) throw config_error(src, "grid_ratio", "must lie in (0, 1)");
  rethrow_as_config(src, "glasso", [&] { glasso.validate(); });

  if (c == Command::Concentration) {
    rethrow_as_config(src, "concentration", [&] { concentration_config(*this).validate(); });
    for (int v : n_values) {
      if (v < 2) throw config_error(src, "n_values", "entries must be >= 2");
      if (block_size && (*block_size <= 1 || *block_size >= v)) {
        throw config_error(src, "block_size", "must satisfy 1 < block_size < n for every n");
      }
    }
    if (lambdas) {
      for (std::size_t k = 0; k < lambdas->size(); ++k) {
        if (!((*lambdas)[k] > 0.0) || (k > 0 && !((*lambdas)[k] < (*lambdas)[k - 1]))) {
          throw config_error(src, "lambdas", "must be positive and strictly descending");
        }
      }
    }
    return;
  }

  if (n && *n < (c == Command::Generate ? 1 : 4)) {
    throw config_error(src, "n", c == Command::Generate ? "must be >= 1" : "must be >= 4");
  }
  if (lambdas) {
    rethrow_as_config(src, "lambdas", [&] { return RegularizationGrid::from_lambdas(*lambdas); });
  }
  if (subsamples && *subsamples < 1) throw config_error(src, "subsamples", "must be >= 1");
  if (!(beta > 0.0 && beta < 0.5)) throw config_error(src, "beta", "must lie in (0, 0.5)");
  if (folds < 2) throw config_error(src, "folds", "must be >= 2");
  if (repetitions < 1) throw config_error(src, "repetitions", "must be >= 1");

  const auto ms = resolved_methods(c);
  if (ms.empty()) throw config_error(src, "methods", "must name at least one method");
  if (c == Command::Select) {
    if (ms.size() != 1) throw config_error(src, "methods", "select runs exactly one method");
    if (!data) throw config_error(src, "data", "is required for select");
    if (ms.front() == Method::Oracle && !truth) {
      throw config_error(src, "truth", "is required for the oracle selector");
    }
  }
  if (c == Command::Benchmark) {
    const int nn = resolved_n();
    const int b = block_size.value_or(default_block_size(nn));
    if (b <= 1 || b >= nn) throw config_error(src, "block_size", "must satisfy 1 < block_size < n");
    if (std::find(ms.begin(), ms.end(), Method::Kcv) != ms.end() && nn < folds) {
      throw config_error(src, "folds", "must not exceed n");
    }
  }
}

ExperimentConfig config_from_json(const json& j, Command c, const std::string& source) {
  if (!j.is_object()) {
    throw Error(ErrorCode::Config, source + ": top level must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (kKeys.count(key) == 0) throw config_error(source, key, "is not a known setting");
  }
  ExperimentConfig cfg;
  auto has = [&](const char* key) { return j.contains(key) && !j.at(key).is_null(); };
  if (has("graph")) {
    const auto name = get_value<std::string>(j, "graph", source);
    cfg.graph = rethrow_as_config(source, "graph", [&] { return parse_graph_kind(name); });
  }
  if (has("rho")) cfg.rho = get_value<double>(j, "rho", source);
  if (has("group_size")) cfg.group_size = get_value<int>(j, "group_size", source);
  if (has("n")) cfg.n = get_value<int>(j, "n", source);
  if (has("p")) cfg.p = get_value<int>(j, "p", source);
  if (has("methods")) {
    std::vector<Method> ms;
    for (const auto& name : get_list<std::string>(j, "methods", source)) {
      ms.push_back(rethrow_as_config(source, "methods", [&] { return parse_method(name); }));
    }
    cfg.methods = ms;
  }
  if (has("grid_size")) cfg.grid_size = get_value<int>(j, "grid_size", source);
  if (has("grid_ratio")) cfg.grid_ratio = get_value<double>(j, "grid_ratio", source);
  if (has("lambdas")) cfg.lambdas = get_list<double>(j, "lambdas", source);
  if (has("subsamples")) cfg.subsamples = get_value<int>(j, "subsamples", source);
  if (has("block_size")) cfg.block_size = get_value<int>(j, "block_size", source);
  if (has("beta")) cfg.beta = get_value<double>(j, "beta", source);
  if (has("refit_full")) cfg.refit_full = get_value<bool>(j, "refit_full", source);
  if (has("stop_when_unstable")) {
    cfg.stop_when_unstable = get_value<bool>(j, "stop_when_unstable", source);
  }
  if (has("folds")) cfg.folds = get_value<int>(j, "folds", source);
  if (has("repetitions")) cfg.repetitions = get_value<int>(j, "repetitions", source);
  if (has("seed")) cfg.seed = get_value<std::uint64_t>(j, "seed", source);
  if (has("threads")) cfg.threads = get_value<int>(j, "threads", source);
  if (has("glasso")) {
    const json& g = j.at("glasso");
    if (!g.is_object()) throw config_error(source, "glasso", "must be an object");
    const std::string gsrc = source + ": glasso";
    for (const auto& [key, value] : g.items()) {
      if (kGlassoKeys.count(key) == 0) throw config_error(gsrc, key, "is not a known setting");
    }
    if (g.contains("max_outer_iters")) {
      cfg.glasso.max_outer_iters = get_value<int>(g, "max_outer_iters", gsrc);
    }
    if (g.contains("tol")) cfg.glasso.tol = get_value<double>(g, "tol", gsrc);
    if (g.contains("inner_max_iters")) {
      cfg.glasso.inner_max_iters = get_value<int>(g, "inner_max_iters", gsrc);
    }
    if (g.contains("inner_tol")) cfg.glasso.inner_tol = get_value<double>(g, "inner_tol", gsrc);
    if (g.contains("penalize_diagonal")) {
      cfg.glasso.penalize_diagonal = get_value<bool>(g, "penalize_diagonal", gsrc);
    }
  }
  if (has("out")) cfg.out = get_value<std::string>(j, "out", source);
  if (has("data")) cfg.data = std::filesystem::path(get_value<std::string>(j, "data", source));
  if (has("truth")) cfg.truth = std::filesystem::path(get_value<std::string>(j, "truth", source));
  if (has("dot")) cfg.dot = get_value<bool>(j, "dot", source);
  if (has("n_values")) cfg.n_values = get_list<int>(j, "n_values", source);
  if (has("trials")) cfg.trials = get_value<int>(j, "trials", source);
  if (has("mc_datasets")) cfg.mc_datasets = get_value<int>(j, "mc_datasets", source);
  if (has("delta")) cfg.delta = get_value<double>(j, "delta", source);

  try {
    cfg.validate(c);
  } catch (const Error& e) {
    const std::string msg = e.what();
    // validate() names keys as "config: 'key' ..."; point at the real source.
    throw Error(ErrorCode::Config,
                msg.rfind("config: ", 0) == 0 ? source + msg.substr(6) : source + ": " + msg);
  }
  return cfg;
}

json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    const std::size_t last_nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const std::size_t col = last_nl == std::string::npos ? upto + 1 : upto - last_nl;
    throw Error(ErrorCode::Config, source + ":" + std::to_string(line) + ":" +
                                       std::to_string(col) + ": invalid JSON");
  }
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const json& overrides, Command c) {
  json merged = json::object();
  std::string source = "command line";
  if (file) {
    merged = parse_config_text(io::read_text(*file), file->string());
    if (!merged.is_object()) {
      throw Error(ErrorCode::Config, file->string() + ": top level must be a JSON object");
    }
    source = file->string();
  }
  if (!overrides.is_null()) {
    for (const auto& [key, value] : overrides.items()) merged[key] = value;
  }
  return config_from_json(merged, c, source);
}

json config_to_json(const ExperimentConfig& cfg, Command c) {
  ordered_json j;
  j["command"] = to_string(c);
  j["graph"] = to_string(cfg.graph);
  if (cfg.graph == GraphKind::Hub) {
    j["group_size"] = cfg.resolved_group_size(c);
  } else {
    j["rho"] = cfg.rho;
  }
  j["p"] = cfg.resolved_p(c);
  j["seed"] = cfg.seed;
  if (c == Command::Concentration) {
    const ConcentrationConfig cc = concentration_config(cfg);
    j["n_values"] = cc.n_values;
    j["trials"] = cc.trials;
    j["mc_datasets"] = cc.mc_datasets;
    j["subsamples"] = cc.subsamples;
    j["block_size"] = cc.block_size ? json(*cc.block_size) : json("auto");
    j["delta"] = cc.delta;
    if (cc.lambdas) {
      j["lambdas"] = *cc.lambdas;
    } else {
      j["grid_size"] = cc.grid_size;
      j["grid_ratio"] = cc.grid_ratio;
    }
    return j;
  }
  j["n"] = cfg.resolved_n();
  std::vector<std::string> ms;
  for (Method m : cfg.resolved_methods(c)) ms.emplace_back(to_string(m));
  j["methods"] = ms;
  if (cfg.lambdas) {
    j["lambdas"] = *cfg.lambdas;
  } else {
    j["grid_size"] = cfg.resolved_grid_size(c);
    j["grid_ratio"] = cfg.resolved_grid_ratio(c);
  }
  j["subsamples"] = cfg.subsamples.value_or(kDefaultSubsamples);
  j["block_size"] = cfg.block_size ? json(*cfg.block_size) : json("auto");
  j["beta"] = cfg.beta;
  j["refit_full"] = cfg.refit_full;
  j["stop_when_unstable"] = cfg.resolved_stop_when_unstable(c);
  j["folds"] = cfg.folds;
  if (c == Command::Benchmark) j["repetitions"] = cfg.repetitions;
  j["glasso"] = {{"max_outer_iters", cfg.glasso.max_outer_iters},
                 {"tol", cfg.glasso.tol},
                 {"inner_max_iters", cfg.glasso.inner_max_iters},
                 {"inner_tol", cfg.glasso.inner_tol},
                 {"penalize_diagonal", cfg.glasso.penalize_diagonal}};
  return j;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::NonFinite:
      return 3;
    case ErrorCode::Io:
      return 4;
    default:
      return 2;
  }
}

GroundTruth make_truth(const ExperimentConfig& cfg, std::uint64_t seed) {
  const int p = cfg.resolved_p(Command::Generate);
  return cfg.graph == GraphKind::Hub ? gen_hub(p, cfg.resolved_group_size(Command::Generate), seed)
                                     : gen_neighborhood(p, cfg.rho, seed);
}

DataMatrix make_data(const GroundTruth& truth, int n, std::uint64_t seed) {
  return sample_gaussian(truth.sigma, n, derive_seed(seed, kDataStream));
}

RegularizationGrid make_grid(const ExperimentConfig& cfg, const SymMatrix& sigma_hat) {
  if (cfg.lambdas) return RegularizationGrid::from_lambdas(*cfg.lambdas);
  return RegularizationGrid::log_spaced(lambda_max(sigma_hat), cfg.resolved_grid_ratio(Command::Benchmark),
                                        cfg.resolved_grid_size(Command::Benchmark));
}

void cmd_generate(const ExperimentConfig& cfg) {
  cfg.validate(Command::Generate);
  const GroundTruth truth = make_truth(cfg, cfg.seed);
  write_ground_truth(truth, cfg.out);
  io::write_data_csv(cfg.out / "data.csv", make_data(truth, cfg.resolved_n(), cfg.seed));
}

SelectOutput run_select(const ExperimentConfig& cfg, const DataMatrix& data,
                        const GroundTruth* truth) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  const Method method = cfg.resolved_methods(Command::Select).front();
  if (n < 4 || p < 2) {
    throw Error(ErrorCode::InvalidArgument, "data must have at least 4 rows and 2 columns");
  }
  if (truth != nullptr && truth->omega.dim() != p) {
    throw Error(ErrorCode::DimensionMismatch, "truth has p = " + std::to_string(truth->omega.dim()) +
                                                  " but data has " + std::to_string(p) +
                                                  " columns");
  }
  const SymMatrix s = sample_covariance(data);
  const RegularizationGrid grid = make_grid(cfg, s);
  SelectOutput out{grid, {}, n, p};
  switch (method) {
    case Method::Stars: {
      StarsConfig sc;
      sc.subsamples = cfg.subsamples.value_or(kDefaultSubsamples);
      sc.block_size = cfg.block_size;
      sc.beta = cfg.beta;
      sc.stop_when_unstable = cfg.resolved_stop_when_unstable(Command::Select);
      sc.refit_full = cfg.refit_full;
      sc.seed = derive_seed(cfg.seed, kStarsStream);
      sc.threads = cfg.threads;
      out.result = run_stars(data, grid, cfg.glasso, sc).selection;
      break;
    }
    case Method::Aic:
    case Method::Bic: {
      const auto path = glasso_path(s, grid, cfg.glasso);
      out.result = method == Method::Aic ? aic_select(path, s, grid, n) : bic_select(path, s, grid, n);
      break;
    }
    case Method::Kcv:
      out.result = kcv_select(data, grid, cfg.folds, cfg.glasso, derive_seed(cfg.seed, kCvStream),
                              nullptr, cfg.threads);
      break;
    case Method::Oracle: {
      if (truth == nullptr) throw Error(ErrorCode::Config, "the oracle selector needs a truth");
      const auto path = glasso_path(s, grid, cfg.glasso);
      out.result = oracle_select(path, truth->edges, grid);
      break;
    }
  }
  return out;
}

std::string selection_json(const SelectOutput& out, const ExperimentConfig& cfg) {
  const SelectionResult& r = out.result;
  ordered_json j;
  j["method"] = to_string(r.method);
  j["n"] = out.n;
  j["p"] = out.p;
  j["seed"] = cfg.seed;
  j["chosen_index"] = r.chosen_index;
  j["chosen_lambda"] = r.chosen_lambda;
  j["chosen_capital_lambda"] = r.chosen_capital_lambda;
  j["edge_count"] = r.edge_set.count();
  ordered_json edges = ordered_json::array();
  for (const Edge& e : r.edge_set.edges()) edges.push_back({e.i, e.j});
  j["edges"] = edges;
  j["grid"] = {{"lambda", out.grid.lambdas()}, {"capital_lambda", out.grid.capital_lambdas()}};
  ordered_json diag = ordered_json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  ordered_json curves = ordered_json::object();
  for (const auto& [k, v] : r.curves) curves[k] = v;
  j["curves"] = curves;
  return j.dump(2) + "\n";
}

SelectOutput cmd_select(const ExperimentConfig& cfg) {
  cfg.validate(Command::Select);
  const DataMatrix data = io::read_data_csv(*cfg.data);
  std::optional<GroundTruth> truth;
  if (cfg.truth) truth = read_ground_truth(*cfg.truth);
  SelectOutput out = run_select(cfg, data, truth ? &*truth : nullptr);
  io::write_text(cfg.out / "selection.json", selection_json(out, cfg));
  io::write_edges_tsv(cfg.out / "edges.tsv", out.result.edge_set);
  if (cfg.dot) {
    io::write_edges_dot(cfg.out / "graph.dot", out.result.edge_set,
                        std::string(to_string(out.result.method)));
  }
  return out;
}

const MethodSummary* BenchmarkReport::find(Method m) const {
  for (const auto& s : summary) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

Stat summarize_values(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

std::vector<MethodSummary> summarize(const std::vector<BenchmarkRow>& rows,
                                     const std::vector<Method>& methods) {
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> prec, rec, f1, dist;
    int contained = 0;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      if (r.status != "ok") {
        ++s.exclusions;
        continue;
      }
      ++s.reps_ok;
      prec.push_back(r.metrics.precision);
      rec.push_back(r.metrics.recall);
      f1.push_back(r.metrics.f1);
      dist.push_back(static_cast<double>(r.edge_distance));
      contained += r.contains_truth ? 1 : 0;
    }
    s.precision = summarize_values(prec);
    s.recall = summarize_values(rec);
    s.f1 = summarize_values(f1);
    s.edge_distance = summarize_values(dist);
    s.containment_fraction = s.reps_ok > 0 ? static_cast<double>(contained) / s.reps_ok : 0.0;
    out.push_back(s);
  }
  return out;
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate(Command::Benchmark);
  const auto methods = cfg.resolved_methods(Command::Benchmark);
  const int n = cfg.resolved_n();
  BenchmarkReport report;
  report.config = cfg;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(rep);
    std::optional<GroundTruth> truth;
    DataMatrix data;
    std::optional<SymMatrix> s_full;
    std::optional<RegularizationGrid> grid;
    std::exception_ptr setup_failure;
    try {
      truth = make_truth(cfg, rep_seed);
      data = make_data(*truth, n, rep_seed);
      s_full = sample_covariance(data);
      grid = make_grid(cfg, *s_full);
    } catch (...) {
      setup_failure = std::current_exception();
    }

    // Shared pieces are computed on first use; a failure is remembered and
    // reported for every method that needs the piece.
    std::optional<std::vector<PrecisionEstimate>> full_path;
    std::exception_ptr full_failure;
    auto get_full_path = [&]() -> const std::vector<PrecisionEstimate>& {
      if (full_failure) std::rethrow_exception(full_failure);
      if (!full_path) {
        try {
          full_path = glasso_path(*s_full, *grid, cfg.glasso);
        } catch (const Error& e) {
          full_failure = std::make_exception_ptr(e.annotated("full-data path"));
          std::rethrow_exception(full_failure);
        }
      }
      return *full_path;
    };
    const SubsamplePlan plan =
        setup_failure ? SubsamplePlan{}
                      : make_plan(n, cfg.subsamples.value_or(kDefaultSubsamples),
                                  derive_seed(rep_seed, kStarsStream), cfg.block_size);
    // The oracle and the StARS graph are both read off this path, fitted on
    // one size-b subsample (so the oracle is never beaten on edge distance).
    std::optional<std::vector<PrecisionEstimate>> eval_path;
    std::exception_ptr eval_failure;
    auto get_eval_path = [&]() -> const std::vector<PrecisionEstimate>& {
      if (eval_failure) std::rethrow_exception(eval_failure);
      if (!eval_path) {
        try {
          eval_path = glasso_path(sample_covariance(data, refit_subsample(plan)), *grid, cfg.glasso);
        } catch (const Error& e) {
          eval_failure = std::make_exception_ptr(e.annotated("evaluation-subsample path"));
          std::rethrow_exception(eval_failure);
        }
      }
      return *eval_path;
    };

    std::ostringstream line;
    line << "rep " << rep + 1 << "/" << cfg.repetitions << " (seed " << rep_seed << ")";
    for (Method m : methods) {
      BenchmarkRow row;
      row.rep = rep;
      row.method = m;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (setup_failure) std::rethrow_exception(setup_failure);
        SelectionResult sel;
        switch (m) {
          case Method::Aic:
            sel = aic_select(get_full_path(), *s_full, *grid, n);
            break;
          case Method::Bic:
            sel = bic_select(get_full_path(), *s_full, *grid, n);
            break;
          case Method::Kcv:
            sel = kcv_select(data, *grid, cfg.folds, cfg.glasso, derive_seed(rep_seed, kCvStream),
                             &get_full_path(), cfg.threads);
            break;
          case Method::Oracle:
            sel = oracle_select(get_eval_path(), truth->edges, *grid);
            break;
          case Method::Stars: {
            const StabilityProfile profile =
                stability_profile(data, plan, *grid, cfg.glasso, cfg.beta,
                                  cfg.resolved_stop_when_unstable(Command::Benchmark), cfg.threads);
            sel = stars_select(profile, cfg.beta);
            const auto& path = cfg.refit_full ? get_full_path() : get_eval_path();
            sel.edge_set = edge_set(path[static_cast<std::size_t>(sel.chosen_index)]);
            break;
          }
        }
        row.metrics = edge_metrics(sel.edge_set, truth->edges);
        row.edges = sel.edge_set.count();
        row.edge_distance = sel.edge_set.distance(truth->edges);
        row.contains_truth = sel.edge_set.contains(truth->edges);
        row.chosen_index = sel.chosen_index;
        row.chosen_capital_lambda = sel.chosen_capital_lambda;
        char f1[16];
        std::snprintf(f1, sizeof f1, "%.4f", row.metrics.f1);
        line << " | " << to_string(m) << " F1 " << f1;
      } catch (const Error& e) {
        row.status = to_string(e.code());
        row.message = e.what();
        line << " | " << to_string(m) << " failed";
      }
      row.seconds = seconds_since(t0);
      report.rows.push_back(row);
    }
    if (progress != nullptr) *progress << line.str() << std::endl;
  }
  report.summary = summarize(report.rows, methods);
  return report;
}

std::string per_rep_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "rep,seed,method,status,precision,recall,f1,edges,edge_distance,contains_truth,"
         "chosen_index,chosen_capital_lambda\n";
  for (const auto& r : report.rows) {
    out << r.rep << ',' << report.config.seed + static_cast<std::uint64_t>(r.rep) << ','
        << to_string(r.method) << ',' << r.status << ',';
    if (r.status == "ok") {
      out << format(r.metrics.precision) << ',' << format(r.metrics.recall) << ','
          << format(r.metrics.f1) << ',' << r.edges << ',' << r.edge_distance << ','
          << (r.contains_truth ? 1 : 0) << ',' << r.chosen_index << ','
          << format(r.chosen_capital_lambda);
    } else {
      out << ",,,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string summary_json(const BenchmarkReport& report) {
  ordered_json j;
  j["config"] = config_to_json(report.config, Command::Benchmark);
  ordered_json methods = ordered_json::array();
  for (const auto& s : report.summary) {
    methods.push_back({{"method", to_string(s.method)},
                       {"reps_ok", s.reps_ok},
                       {"exclusions", s.exclusions},
                       {"precision", stat_json(s.precision)},
                       {"recall", stat_json(s.recall)},
                       {"f1", stat_json(s.f1)},
                       {"edge_distance", stat_json(s.edge_distance)},
                       {"containment_fraction", s.containment_fraction}});
  }
  j["methods"] = methods;
  ordered_json failures = ordered_json::array();
  for (const auto& r : report.rows) {
    if (r.status == "ok") continue;
    failures.push_back(
        {{"rep", r.rep}, {"method", to_string(r.method)}, {"status", r.status}, {"message", r.message}});
  }
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

std::string timings_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "rep,method,seconds\n";
  for (const auto& r : report.rows) {
    out << r.rep << ',' << to_string(r.method) << ',' << format(r.seconds) << '\n';
  }
  return out.str();
}

BenchmarkReport cmd_benchmark(const ExperimentConfig& cfg, std::ostream* progress) {
  BenchmarkReport report = run_benchmark(cfg, progress);
  io::write_text(cfg.out / "per_rep.csv", per_rep_csv(report));
  io::write_text(cfg.out / "summary.json", summary_json(report));
  io::write_text(cfg.out / "timings.csv", timings_csv(report));
  return report;
}

ConcentrationConfig concentration_config(const ExperimentConfig& cfg) {
  ConcentrationConfig cc;
  cc.p = cfg.resolved_p(Command::Concentration);
  cc.kind = cfg.graph;
  cc.group_size = cfg.resolved_group_size(Command::Concentration);
  cc.rho = cfg.rho;
  cc.n_values = cfg.n_values;
  cc.trials = cfg.trials;
  cc.mc_datasets = cfg.mc_datasets;
  cc.subsamples = cfg.subsamples.value_or(cc.subsamples);
  if (cfg.block_size) cc.block_size = cfg.block_size;
  cc.grid_size = cfg.resolved_grid_size(Command::Concentration);
  cc.grid_ratio = cfg.resolved_grid_ratio(Command::Concentration);
  cc.lambdas = cfg.lambdas;
  cc.delta = cfg.delta;
  cc.seed = cfg.seed;
  cc.threads = cfg.threads;
  cc.glasso = cfg.glasso;
  return cc;
}

std::string concentration_csv(const ConcentrationReport& report) {
  std::ostringstream out;
  out << "n,p,b,K,trials,delta,bound,median_dev,mean_dev,max_dev,violation_fraction,xi_bound,"
         "median_xi_dev,max_xi_dev,xi_violation_fraction\n";
  for (const auto& c : report.cells) {
    out << c.n << ',' << c.p << ',' << c.b << ',' << c.k << ',' << c.trials << ','
        << format(c.delta) << ',' << format(c.bound_d) << ',' << format(c.median_dev) << ','
        << format(c.mean_dev) << ',' << format(c.max_dev) << ',' << format(c.violation_fraction)
        << ',' << format(c.bound_xi) << ',' << format(c.median_xi_dev) << ','
        << format(c.max_xi_dev) << ',' << format(c.xi_violation_fraction) << '\n';
  }
  return out.str();
}

ConcentrationReport cmd_concentration(const ExperimentConfig& cfg) {
  cfg.validate(Command::Concentration);
  ConcentrationReport report = check_concentration(concentration_config(cfg));
  io::write_text(cfg.out / "concentration.csv", concentration_csv(report));
  return report;
}

}  // namespace stars
