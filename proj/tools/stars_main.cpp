// Command line front end: stars generate | select | benchmark | concentration.

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stars/harness.hpp"

namespace {

using nlohmann::json;

// Flags are gathered into a JSON object with the same keys as the config
// file so both go through one parser and one set of checks.
struct Overrides {
  json j = json::object();

  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, std::optional<T>& slot,
           const std::string& help) {
    app->add_option(flag, slot, help);
    setters.push_back([this, key, &slot] {
      if (slot) j[key] = *slot;
    });
  }

  void flag(CLI::App* app, const std::string& name, const std::string& key, bool& slot,
            const std::string& help) {
    app->add_flag(name, slot, help);
    setters.push_back([this, key, &slot] {
      if (slot) j[key] = true;
    });
  }

  json collect() {
    for (auto& s : setters) s();
    return j;
  }

  std::vector<std::function<void()>> setters;
};

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> graph;
  std::optional<double> rho;
  std::optional<int> group_size;
  std::optional<int> p;
  std::optional<int> n;
  std::optional<std::vector<double>> lambdas;
  std::optional<int> grid_size;
  std::optional<double> grid_ratio;
  std::optional<int> subsamples;
  std::optional<int> block_size;
  std::optional<double> beta;
  std::optional<bool> stop_when_unstable;
  std::optional<int> folds;
  bool refit_full = false;
};

void add_dataset_flags(CLI::App* app, Overrides& o, CommonFlags& f) {
  o.add(app, "--graph", "graph", f.graph, "hub or neighborhood");
  o.add(app, "--rho", "rho", f.rho, "neighborhood link weight");
  o.add(app, "--group-size", "group_size", f.group_size, "hub group size");
  o.add(app, "-p,--p", "p", f.p, "number of variables");
}

void add_grid_flags(CLI::App* app, Overrides& o, CommonFlags& f) {
  o.add(app, "--grid-size", "grid_size", f.grid_size, "number of grid points K");
  o.add(app, "--grid-ratio", "grid_ratio", f.grid_ratio, "smallest lambda / lambda_max");
  o.add(app, "--lambdas", "lambdas", f.lambdas, "explicit descending penalties");
}

void add_stars_flags(CLI::App* app, Overrides& o, CommonFlags& f) {
  o.add(app, "--subsamples", "subsamples", f.subsamples, "number of subsamples N");
  o.add(app, "--block-size", "block_size", f.block_size, "subsample size b");
  o.add(app, "--beta", "beta", f.beta, "instability cut point");
  o.add(app, "--stop-when-unstable", "stop_when_unstable", f.stop_when_unstable,
        "stop the profile after the first unstable point (true/false)");
  o.flag(app, "--refit-full", "refit_full", f.refit_full,
         "estimate the reported StARS graph on all rows");
  o.add(app, "--folds", "folds", f.folds, "cross-validation folds");
}

void add_common_flags(CLI::App* app, Overrides& o, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  o.add(app, "-o,--out", "out", f.out, "output directory");
  o.add(app, "--seed", "seed", f.seed, "base seed");
  o.add(app, "--threads", "threads", f.threads, "worker threads (0 = all cores)");
}

std::optional<std::filesystem::path> config_path(const CommonFlags& f) {
  if (!f.config) return std::nullopt;
  return std::filesystem::path(*f.config);
}

void print_summary(const stars::BenchmarkReport& report) {
  std::cout << std::left << std::setw(8) << "method" << std::right << std::setw(18) << "precision"
            << std::setw(18) << "recall" << std::setw(18) << "F1" << std::setw(10) << "E in E^"
            << std::setw(6) << "ok" << std::setw(6) << "fail" << "\n";
  char buf[64];
  auto cell = [&](const stars::Stat& s) {
    std::snprintf(buf, sizeof buf, "%.4f (%.4f)", s.mean, s.sd);
    return std::string(buf);
  };
  for (const auto& s : report.summary) {
    char frac[16];
    std::snprintf(frac, sizeof frac, "%.2f", s.containment_fraction);
    std::cout << std::left << std::setw(8) << stars::to_string(s.method) << std::right
              << std::setw(18) << cell(s.precision) << std::setw(18) << cell(s.recall)
              << std::setw(18) << cell(s.f1) << std::setw(10) << frac << std::setw(6) << s.reps_ok
              << std::setw(6) << s.exclusions << "\n";
  }
  std::cout << "(mean (sd) over repetitions; summary.json also has standard errors)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability-based regularization selection for the graphical lasso"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write a synthetic truth and data.csv");
  auto* sel = app.add_subcommand("select", "choose the regularization for one data file");
  auto* bench = app.add_subcommand("benchmark", "repeated comparison of selectors on synthetic data");
  auto* conc = app.add_subcommand("concentration", "Monte-Carlo check of the concentration bounds");

  Overrides gen_o, sel_o, bench_o, conc_o;
  CommonFlags gen_f, sel_f, bench_f, conc_f;

  add_common_flags(gen, gen_o, gen_f);
  add_dataset_flags(gen, gen_o, gen_f);
  gen_o.add(gen, "-n,--n", "n", gen_f.n, "sample size");

  add_common_flags(sel, sel_o, sel_f);
  std::optional<std::string> data_path, truth_path, method;
  bool dot = false;
  sel_o.add(sel, "--data", "data", data_path, "CSV data file (rows are samples)");
  sel_o.add(sel, "--truth", "truth", truth_path, "truth directory, needed by the oracle");
  sel->add_option("-m,--method", method, "stars, aic, bic, kcv or oracle");
  sel_o.flag(sel, "--dot", "dot", dot, "also write graph.dot");
  add_grid_flags(sel, sel_o, sel_f);
  add_stars_flags(sel, sel_o, sel_f);

  add_common_flags(bench, bench_o, bench_f);
  add_dataset_flags(bench, bench_o, bench_f);
  bench_o.add(bench, "-n,--n", "n", bench_f.n, "sample size");
  std::optional<std::vector<std::string>> methods;
  std::optional<int> reps;
  bool quiet = false;
  bench_o.add(bench, "--methods", "methods", methods, "subset of stars aic bic kcv oracle");
  bench_o.add(bench, "--repetitions", "repetitions", reps, "number of repetitions");
  bench->add_flag("-q,--quiet", quiet, "no per-repetition progress");
  add_grid_flags(bench, bench_o, bench_f);
  add_stars_flags(bench, bench_o, bench_f);

  add_common_flags(conc, conc_o, conc_f);
  add_dataset_flags(conc, conc_o, conc_f);
  std::optional<std::vector<int>> n_values;
  std::optional<int> trials, mc;
  std::optional<double> delta;
  conc_o.add(conc, "--n-values", "n_values", n_values, "sample sizes to test");
  conc_o.add(conc, "--trials", "trials", trials, "trials per sample size");
  conc_o.add(conc, "--mc-datasets", "mc_datasets", mc, "datasets averaged for the expectation");
  conc_o.add(conc, "--delta", "delta", delta, "bound confidence level");
  conc_o.add(conc, "--subsamples", "subsamples", conc_f.subsamples, "subsamples per dataset");
  conc_o.add(conc, "--block-size", "block_size", conc_f.block_size, "subsample size b");
  add_grid_flags(conc, conc_o, conc_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto cfg = stars::load_config(config_path(gen_f), gen_o.collect(),
                                          stars::Command::Generate);
      stars::cmd_generate(cfg);
      std::cout << "wrote " << (cfg.out / "data.csv").string() << " and the truth files in "
                << cfg.out.string() << "\n";
    } else if (*sel) {
      json o = sel_o.collect();
      if (method) o["methods"] = json::array({*method});
      const auto cfg = stars::load_config(config_path(sel_f), o, stars::Command::Select);
      const auto out = stars::cmd_select(cfg);
      std::cout << stars::to_string(out.result.method) << ": grid index "
                << out.result.chosen_index << " of " << out.grid.size() << ", Lambda "
                << out.result.chosen_capital_lambda << " (lambda " << out.result.chosen_lambda
                << "), " << out.result.edge_set.count() << " edges; wrote "
                << (cfg.out / "selection.json").string() << "\n";
    } else if (*bench) {
      const auto cfg = stars::load_config(config_path(bench_f), bench_o.collect(),
                                          stars::Command::Benchmark);
      const auto report = stars::cmd_benchmark(cfg, quiet ? nullptr : &std::cerr);
      print_summary(report);
      int failed = 0;
      for (const auto& s : report.summary) failed += s.exclusions;
      if (failed > 0) {
        std::cerr << failed << " (method, repetition) runs failed; see summary.json\n";
      }
      bool any_ok = false;
      for (const auto& s : report.summary) any_ok = any_ok || s.reps_ok > 0;
      if (!any_ok) return 3;
    } else if (*conc) {
      const auto cfg = stars::load_config(config_path(conc_f), conc_o.collect(),
                                          stars::Command::Concentration);
      const auto report = stars::cmd_concentration(cfg);
      std::cout << stars::concentration_csv(report);
    }
  } catch (const stars::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stars::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
