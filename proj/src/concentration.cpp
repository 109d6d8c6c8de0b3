#include "stars/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stars/error.hpp"
#include "stars/parallel.hpp"
#include "stars/stability.hpp"

namespace stars {

namespace {

// theta_hat over a plain list of penalties: [k][pair], pairs in row-major
// upper-triangle order.
std::vector<std::vector<double>> subsample_theta(const DataMatrix& data, const SubsamplePlan& plan,
                                                 const std::vector<double>& lambdas,
                                                 const GlassoConfig& cfg) {
  const int p = static_cast<int>(data.cols());
  const auto pairs = static_cast<std::size_t>(EdgeSet::pair_count(p));
  std::vector<std::vector<int>> counts(lambdas.size(), std::vector<int>(pairs, 0));
  for (const auto& rows : plan.index_sets) {
    const SymMatrix s = sample_covariance(data, rows);
    PrecisionEstimate prev{SymMatrix(p), 0.0, false, 0};
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      prev = glasso_fit(s, lambdas[k], cfg, k == 0 ? nullptr : &prev);
      const EdgeSet e = edge_set(prev);
      std::size_t idx = 0;
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j, ++idx) counts[k][idx] += e.has(i, j) ? 1 : 0;
      }
    }
  }
  std::vector<std::vector<double>> theta(lambdas.size(), std::vector<double>(pairs));
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    for (std::size_t q = 0; q < pairs; ++q) {
      theta[k][q] = static_cast<double>(counts[k][q]) / plan.count;
    }
  }
  return theta;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void ConcentrationConfig::validate() const {
  if (p < 2 || p > 10) {
    throw Error(ErrorCode::Config, "concentration check is meant for 2 <= p <= 10");
  }
  if (n_values.empty() || trials < 1 || mc_datasets < 1 || subsamples < 1) {
    throw Error(ErrorCode::Config, "concentration needs n values, trials, datasets, subsamples");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::Config, "delta must lie in (0, 1)");
  }
  if (lambdas && lambdas->empty()) {
    throw Error(ErrorCode::Config, "explicit lambda list is empty");
  }
  glasso.validate();
}

double d_hat_bound(int n, int b, int k, int p, double delta) {
  return std::sqrt(18.0 * b * (std::log(k) + 4.0 * std::log(p) + std::log(1.0 / delta)) / n);
}

double xi_bound(int n, int b, int p, double delta) {
  return std::sqrt(18.0 * b * (2.0 * std::log(p) + std::log(2.0 / delta)) / n);
}

ConcentrationReport check_concentration(const ConcentrationConfig& cfg) {
  cfg.validate();
  const GroundTruth truth = cfg.kind == GraphKind::Hub ? gen_hub(cfg.p, cfg.group_size, cfg.seed)
                                                       : gen_neighborhood(cfg.p, cfg.rho, cfg.seed);
  ConcentrationReport report;
  if (cfg.lambdas) {
    report.lambdas = *cfg.lambdas;
  } else {
    // Fixed across datasets so D_b(lambda) is a single population quantity.
    report.lambdas = RegularizationGrid::log_spaced(lambda_max(truth.sigma), cfg.grid_ratio,
                                                    cfg.grid_size)
                         .lambdas();
  }
  const auto& lambdas = report.lambdas;
  const std::size_t k_count = lambdas.size();
  const auto pairs = static_cast<std::size_t>(EdgeSet::pair_count(cfg.p));

  for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
    const int n = cfg.n_values[ni];
    const int b = cfg.block_size.value_or(default_block_size(n));
    const int total = cfg.mc_datasets + cfg.trials;
    std::vector<std::vector<std::vector<double>>> theta(static_cast<std::size_t>(total));
    parallel_for(total, cfg.threads, [&](int d) {
      const std::uint64_t ds_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                                                static_cast<std::uint64_t>(d));
      const DataMatrix data = sample_gaussian(truth.sigma, n, ds_seed);
      const SubsamplePlan plan = make_plan(n, cfg.subsamples, derive_seed(ds_seed, 0x51), b);
      theta[static_cast<std::size_t>(d)] = subsample_theta(data, plan, lambdas, cfg.glasso);
    });

    auto d_hat_of = [&](const std::vector<std::vector<double>>& th, std::size_t k) {
      double sum = 0.0;
      for (double t : th[k]) sum += 2.0 * t * (1.0 - t);
      return sum / static_cast<double>(pairs);
    };

    // Population stand-ins from the first mc_datasets datasets: D_b = E D_hat
    // and theta_b = E theta_hat (theta_hat is unbiased), xi_b = 2 theta_b (1 - theta_b).
    std::vector<double> d_pop(k_count, 0.0);
    std::vector<std::vector<double>> theta_pop(k_count, std::vector<double>(pairs, 0.0));
    for (int d = 0; d < cfg.mc_datasets; ++d) {
      const auto& th = theta[static_cast<std::size_t>(d)];
      for (std::size_t k = 0; k < k_count; ++k) {
        d_pop[k] += d_hat_of(th, k);
        for (std::size_t q = 0; q < pairs; ++q) theta_pop[k][q] += th[k][q];
      }
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      d_pop[k] /= cfg.mc_datasets;
      for (double& t : theta_pop[k]) t /= cfg.mc_datasets;
    }

    ConcentrationCell cell;
    cell.n = n;
    cell.p = cfg.p;
    cell.b = b;
    cell.k = static_cast<int>(k_count);
    cell.trials = cfg.trials;
    cell.delta = cfg.delta;
    cell.bound_d = d_hat_bound(n, b, cell.k, cfg.p, cfg.delta);
    cell.bound_xi = xi_bound(n, b, cfg.p, cfg.delta);
    std::vector<double> devs;
    std::vector<double> xi_devs;
    int violations = 0;
    int xi_violations = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      const auto& th = theta[static_cast<std::size_t>(cfg.mc_datasets + t)];
      double dev = 0.0;
      double xi_dev = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        dev = std::max(dev, std::abs(d_hat_of(th, k) - d_pop[k]));
        for (std::size_t q = 0; q < pairs; ++q) {
          const double xi_hat = 2.0 * th[k][q] * (1.0 - th[k][q]);
          const double xi_pop = 2.0 * theta_pop[k][q] * (1.0 - theta_pop[k][q]);
          xi_dev = std::max(xi_dev, std::abs(xi_hat - xi_pop));
        }
      }
      devs.push_back(dev);
      xi_devs.push_back(xi_dev);
      violations += dev > cell.bound_d ? 1 : 0;
      xi_violations += xi_dev > cell.bound_xi ? 1 : 0;
    }
    cell.median_dev = median(devs);
    cell.max_dev = *std::max_element(devs.begin(), devs.end());
    double sum = 0.0;
    for (double v : devs) sum += v;
    cell.mean_dev = sum / cfg.trials;
    cell.violation_fraction = static_cast<double>(violations) / cfg.trials;
    cell.median_xi_dev = median(xi_devs);
    cell.max_xi_dev = *std::max_element(xi_devs.begin(), xi_devs.end());
    cell.xi_violation_fraction = static_cast<double>(xi_violations) / cfg.trials;
    report.cells.push_back(cell);
  }
  return report;
}

}  // namespace stars
