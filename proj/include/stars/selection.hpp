#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stars/edge_set.hpp"

namespace stars {

enum class Method { Stars, Aic, Bic, Kcv, Oracle };

std::string_view to_string(Method m);
// Accepts "stars", "aic", "bic", "kcv", "oracle".
Method parse_method(std::string_view name);

// Outcome of any selector: a grid index plus the graph reported for it.
struct SelectionResult {
  Method method = Method::Stars;
  int chosen_index = 0;
  double chosen_capital_lambda = 0.0;
  double chosen_lambda = 0.0;
  EdgeSet edge_set;
  std::map<std::string, double> diagnostics;
  std::map<std::string, std::vector<double>> curves;
};

// First index attaining the minimum. Grid index 0 is the sparsest end, so
// ties go to the smaller capital lambda.
int argmin_prefer_sparse(const std::vector<double>& scores);

}  // namespace stars
