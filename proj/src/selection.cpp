#include "stars/selection.hpp"

#include <string>

#include "stars/error.hpp"

namespace stars {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Stars: return "stars";
    case Method::Aic: return "aic";
    case Method::Bic: return "bic";
    case Method::Kcv: return "kcv";
    case Method::Oracle: return "oracle";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Stars, Method::Aic, Method::Bic, Method::Kcv, Method::Oracle}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::Config, "unknown method '" + std::string(name) +
                                     "' (expected stars, aic, bic, kcv, or oracle)");
}

int argmin_prefer_sparse(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no scores to minimize");
  }
  int best = 0;
  for (int k = 1; k < static_cast<int>(scores.size()); ++k) {
    if (scores[static_cast<std::size_t>(k)] < scores[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

}  // namespace stars
