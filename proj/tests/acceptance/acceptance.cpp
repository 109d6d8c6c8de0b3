// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// The benchmark settings are the defaults of the `stars benchmark` command
// (20 repetitions, 30-point grid, N = 100, beta = 0.05, 10 folds, seed 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stars/error.hpp"
#include "stars/harness.hpp"
#include "stars/stability.hpp"

using namespace stars;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "" : "!") + what);
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

BenchmarkReport benchmark(GraphKind graph, int n, int p) {
  ExperimentConfig cfg;
  cfg.graph = graph;
  cfg.n = n;
  cfg.p = p;
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkReport r = run_benchmark(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "benchmark " << to_string(graph) << " n=" << n << " p=" << p << " ("
            << fmt(secs, 1) << " s)\n";
  for (const auto& s : r.summary) {
    std::cout << "  " << to_string(s.method) << ": precision " << fmt(s.precision.mean)
              << " recall " << fmt(s.recall.mean) << " F1 " << fmt(s.f1.mean) << " (sd "
              << fmt(s.f1.sd) << ") contains-truth " << fmt(s.containment_fraction, 2) << " ok "
              << s.reps_ok << "/" << r.config.repetitions << "\n";
  }
  return r;
}

const MethodSummary& get(const BenchmarkReport& r, Method m) {
  const MethodSummary* s = r.find(m);
  if (s == nullptr) throw Error(ErrorCode::InvalidArgument, "method missing from report");
  return *s;
}

bool all_ok(const BenchmarkReport& r) {
  return std::all_of(r.summary.begin(), r.summary.end(),
                     [&](const MethodSummary& s) { return s.exclusions == 0; });
}

Outcome criterion_1(const BenchmarkReport& hub) {
  Outcome o;
  const auto& st = get(hub, Method::Stars);
  o.require(all_ok(hub), "no failed repetitions");
  o.require(st.recall.mean >= 0.95, "StARS recall " + fmt(st.recall.mean) + " >= 0.95");
  o.require(std::abs(st.precision.mean - 0.4572) <= 0.12,
            "StARS precision " + fmt(st.precision.mean) + " within 0.12 of 0.4572");
  for (Method m : {Method::Kcv, Method::Bic, Method::Aic}) {
    const double gap = st.f1.mean - get(hub, m).f1.mean;
    o.require(gap >= 0.15, "F1 gap over " + std::string(to_string(m)) + " " + fmt(gap) + " >= 0.15");
  }
  return o;
}

Outcome criterion_2(const BenchmarkReport& nb) {
  Outcome o;
  const auto& st = get(nb, Method::Stars);
  o.require(all_ok(nb), "no failed repetitions");
  o.require(std::abs(st.f1.mean - 0.7352) <= 0.12,
            "StARS F1 " + fmt(st.f1.mean) + " within 0.12 of 0.7352");
  for (Method m : {Method::Kcv, Method::Bic, Method::Aic}) {
    const double f1 = get(nb, m).f1.mean;
    o.require(st.f1.mean > f1, "StARS F1 > " + std::string(to_string(m)) + " F1 " + fmt(f1));
  }
  return o;
}

Outcome criterion_3(const BenchmarkReport& low) {
  Outcome o;
  const double bic = get(low, Method::Bic).f1.mean;
  const double st = get(low, Method::Stars).f1.mean;
  o.require(all_ok(low), "no failed repetitions");
  o.require(bic >= st, "BIC F1 " + fmt(bic) + " >= StARS F1 " + fmt(st));
  return o;
}

Outcome criterion_4(const BenchmarkReport& hub, const BenchmarkReport& nb) {
  Outcome o;
  for (const auto* r : {&hub, &nb}) {
    const auto& cv = get(*r, Method::Kcv);
    const std::string tag = std::string(to_string(r->config.graph));
    o.require(cv.recall.mean >= 0.99, tag + " K-CV recall " + fmt(cv.recall.mean) + " >= 0.99");
    o.require(cv.precision.mean <= 0.30,
              tag + " K-CV precision " + fmt(cv.precision.mean) + " <= 0.30");
  }
  return o;
}

Outcome criterion_5(const BenchmarkReport& hub) {
  Outcome o;
  const auto& st = get(hub, Method::Stars);
  o.require(st.reps_ok == 20, "20 successful repetitions");
  o.require(st.containment_fraction >= 0.9,
            "fraction with E in E_hat " + fmt(st.containment_fraction, 2) + " >= 0.9");
  return o;
}

Outcome criterion_6() {
  Outcome o;
  ExperimentConfig cfg;
  const ConcentrationReport rep = check_concentration(concentration_config(cfg));
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& c : rep.cells) {
    std::cout << "  concentration n=" << c.n << " p=" << c.p << " b=" << c.b << " K=" << c.k
              << ": bound " << fmt(c.bound_d) << " median dev " << fmt(c.median_dev)
              << " violations " << fmt(c.violation_fraction, 3) << " | xi bound "
              << fmt(c.bound_xi) << " median dev " << fmt(c.median_xi_dev) << " violations "
              << fmt(c.xi_violation_fraction, 3) << "\n";
    const std::string tag = "n=" + std::to_string(c.n);
    o.require(c.delta == 0.05, tag + " delta 0.05");
    o.require(c.violation_fraction <= 0.05,
              tag + " D_hat violation fraction " + fmt(c.violation_fraction, 3) + " <= 0.05");
    o.require(c.xi_violation_fraction <= 0.05,
              tag + " xi_hat violation fraction " + fmt(c.xi_violation_fraction, 3) + " <= 0.05");
    o.require(c.median_dev <= prev, tag + " median deviation " + fmt(c.median_dev) + " nonincreasing");
    prev = c.median_dev;
  }
  return o;
}

SymMatrix sigma_hat(int p, int n, std::uint64_t seed) {
  const GroundTruth t = gen_neighborhood(p, kNeighborhoodRho, seed);
  return sample_covariance(sample_gaussian(t.sigma, n, seed + 1000));
}

double objective_2x2(double w, double v, double s_diag, double s_off, double lambda) {
  const double det = w * w - v * v;
  if (det <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * w * s_diag + 2.0 * v * s_off - std::log(det) + lambda * (2.0 * w + 2.0 * std::abs(v));
}

Outcome criterion_7() {
  Outcome o;
  // KKT on every converged fit along several paths.
  int fits = 0;
  int failing = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int p : {10, 30}) {
      const SymMatrix s = sigma_hat(p, 2 * p, seed);
      const auto grid = RegularizationGrid::log_spaced(lambda_max(s), 0.05, 20);
      for (bool pen_diag : {true, false}) {
        GlassoConfig cfg;
        cfg.penalize_diagonal = pen_diag;
        for (const auto& est : glasso_path(s, grid, cfg)) {
          if (!est.converged) continue;
          ++fits;
          if (kkt_residual(est, s, pen_diag) > 1e-4) ++failing;
        }
      }
    }
  }
  o.require(fits > 0 && failing == 0,
            "KKT <= 1e-4 on " + std::to_string(fits - failing) + "/" + std::to_string(fits) + " fits");

  // 2x2 problem against a zooming grid search.
  double worst = 0.0;
  for (const auto& [s_off, lambda] : std::vector<std::pair<double, double>>{{0.5, 0.1}, {-0.3, 0.05}, {0.8, 0.3}}) {
    Matrix sm(2, 2);
    sm << 1.0, s_off, s_off, 1.0;
    const PrecisionEstimate est = glasso_fit(SymMatrix::from_dense(sm), lambda, GlassoConfig{});
    double w_lo = 0.05, w_hi = 5.0, v_lo = -5.0, v_hi = 5.0, bw = 0.0, bv = 0.0;
    for (int round = 0; round < 8; ++round) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a <= 400; ++a) {
        const double w = w_lo + (w_hi - w_lo) * a / 400;
        for (int b = 0; b <= 400; ++b) {
          const double v = v_lo + (v_hi - v_lo) * b / 400;
          const double f = objective_2x2(w, v, 1.0, s_off, lambda);
          if (f < best) {
            best = f;
            bw = w;
            bv = v;
          }
        }
      }
      const double dw = (w_hi - w_lo) / 20.0, dv = (v_hi - v_lo) / 20.0;
      w_lo = bw - dw;
      w_hi = bw + dw;
      v_lo = bv - dv;
      v_hi = bv + dv;
    }
    worst = std::max({worst, std::abs(est.omega(0, 0) - bw), std::abs(est.omega(1, 1) - bw),
                      std::abs(est.omega(0, 1) - bv)});
  }
  o.require(worst <= 1e-3, "2x2 grid-search agreement " + fmt(worst, 6) + " <= 1e-3");

  bool empty = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SymMatrix s = sigma_hat(20, 50, seed);
    for (double f : {1.0, 2.0}) empty = empty && edge_set(glasso_fit(s, f * lambda_max(s), GlassoConfig{})).count() == 0;
  }
  o.require(empty, "lambda >= lambda_max gives the empty graph");

  double inv_err = 0.0;
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const Matrix m = oracle::random_pd(6, seed);
    const PrecisionEstimate est = glasso_fit(SymMatrix::from_dense(m), 0.0, GlassoConfig{});
    const auto prod = oracle::product(oracle::to_rows(m), oracle::to_rows(est.omega.dense()));
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) inv_err = std::max(inv_err, std::abs(prod[i][j] - (i == j ? 1.0 : 0.0)));
    }
    inv_err = std::max(inv_err, (est.omega.dense() - inverse(SymMatrix::from_dense(m)).dense()).cwiseAbs().maxCoeff());
  }
  o.require(inv_err <= 1e-6, "lambda = 0 matches inversion " + fmt(inv_err, 9) + " <= 1e-6");
  return o;
}

Outcome criterion_8() {
  Outcome o;
  const GroundTruth t = gen_neighborhood(15, kNeighborhoodRho, 3);
  const DataMatrix x = sample_gaussian(t.sigma, 120, 4);
  const auto grid = RegularizationGrid::log_spaced(lambda_max(sample_covariance(x)), 0.05, 12);
  StarsConfig sc;
  sc.subsamples = 30;
  sc.seed = 9;
  sc.threads = 1;
  const StarsRun run = run_stars(x, grid, GlassoConfig{}, sc);
  const auto& prof = run.profile;

  bool xi_exact = true;
  bool xi_range = true;
  for (int k = 0; k < prof.evaluated(); ++k) {
    const Matrix& th = prof.theta_hat[k];
    const Matrix& xi = prof.xi_hat[k];
    for (int i = 0; i < 15; ++i) {
      for (int j = 0; j < 15; ++j) {
        if (i == j) continue;
        xi_exact = xi_exact && xi(i, j) == 2.0 * th(i, j) * (1.0 - th(i, j));
        xi_range = xi_range && xi(i, j) >= 0.0 && xi(i, j) <= 0.5;
      }
    }
  }
  o.require(xi_exact, "xi_hat = 2 theta_hat (1 - theta_hat) exactly");
  o.require(xi_range, "xi_hat in [0, 1/2]");

  // D_bar against a direct scan: D_bar(k) = max over l <= k of D_hat(l), with
  // D_hat(l) the mean of xi_hat over the p(p-1)/2 pairs.
  bool scan = true;
  double running = 0.0;
  for (int k = 0; k < prof.evaluated(); ++k) {
    double sum = 0.0;
    for (int i = 0; i < 15; ++i) {
      for (int j = i + 1; j < 15; ++j) sum += prof.xi_hat[k](i, j);
    }
    const double d = sum / (15.0 * 14.0 / 2.0);
    running = std::max(running, d);
    scan = scan && std::abs(prof.d_hat[k] - d) <= 1e-12 && std::abs(prof.d_bar[k] - running) <= 1e-12;
  }
  o.require(scan, "D_bar equals the running maximum of D_hat");

  // sup semantics: the largest index whose D_bar is at most beta, index 0 if none.
  bool sup = true;
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 10);
    std::vector<double> lambdas;
    std::vector<double> d;
    double level = 0.0;
    for (int i = 0; i < k; ++i) {
      lambdas.push_back(1.0 / (i + 1));
      level += 0.02 * unif(gen);
      d.push_back(level);
    }
    StabilityProfile hand{RegularizationGrid::from_lambdas(lambdas), {}, {}, d, d};
    for (int i = 0; i < k; ++i) {
      hand.theta_hat.push_back(Matrix::Zero(3, 3));
      hand.xi_hat.push_back(Matrix::Zero(3, 3));
    }
    const double beta = 0.01 + 0.04 * unif(gen);
    int expected = 0;
    for (int i = 0; i < k; ++i) {
      if (d[i] <= beta) expected = i;
    }
    const SelectionResult r = stars_select(hand, beta);
    sup = sup && r.chosen_index == expected &&
          r.chosen_capital_lambda == hand.grid.capital_lambda(expected);
  }
  o.require(sup, "stars_select picks the supremum on hand-built profiles");

  StarsConfig sc2 = sc;
  sc2.threads = 3;
  const StarsRun again = run_stars(x, grid, GlassoConfig{}, sc);
  const StarsRun threaded = run_stars(x, grid, GlassoConfig{}, sc2);
  bool same = true;
  for (const StarsRun* r : {&again, &threaded}) {
    same = same && r->selection.chosen_index == run.selection.chosen_index &&
           r->selection.edge_set == run.selection.edge_set && r->profile.d_hat == prof.d_hat &&
           r->plan.index_sets == run.plan.index_sets;
  }
  o.require(same, "run_stars is deterministic per seed (threads 1 and 3)");
  return o;
}

void report(int id, const Outcome& o, bool& all) {
  std::ostringstream detail;
  for (std::size_t i = 0; i < o.notes.size(); ++i) detail << (i ? "; " : "") << o.notes[i];
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail.str() << std::endl;
  all = all && o.pass;
}

}  // namespace

int main() {
  std::map<int, Outcome> outcomes;
  try {
    outcomes[7] = criterion_7();
    outcomes[8] = criterion_8();
    outcomes[6] = criterion_6();
    const BenchmarkReport hub = benchmark(GraphKind::Hub, 400, 100);
    const BenchmarkReport nb = benchmark(GraphKind::Neighborhood, 400, 100);
    const BenchmarkReport low = benchmark(GraphKind::Neighborhood, 800, 40);
    outcomes[1] = criterion_1(hub);
    outcomes[2] = criterion_2(nb);
    outcomes[3] = criterion_3(low);
    outcomes[4] = criterion_4(hub, nb);
    outcomes[5] = criterion_5(hub);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  bool all = true;
  for (const auto& [id, o] : outcomes) report(id, o, all);
  return all ? 0 : 1;
}
