#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cramer/fiber_geometry.hpp"
#include "cramer/lp_bridge.hpp"
#include "cramer/problem.hpp"

namespace cramer {

/// Round-trip decimal form of a double ("%.17g"); non-finite values as nan/inf/-inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string identity_rows_csv(const std::vector<IdentityRow>& rows) {
  std::string out = "epsilon,tau_eps,eps_theta,residual\n";
  for (const auto& r : rows)
    out += format_number(r.epsilon) + ',' + format_number(r.tau_eps) + ',' + format_number(r.eps_theta) + ',' +
           format_number(r.residual) + '\n';
  return out;
}

/// Columns y1..ym, value, std_error, method; std_error is empty for exact methods.
inline std::string density_csv(const DensityEstimate& est) {
  std::string out;
  const Index m = est.grid.empty() ? 1 : est.grid.front().size();
  for (Index k = 0; k < m; ++k) out += "y" + std::to_string(k + 1) + ',';
  out += "value,std_error,method\n";
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    for (Index k = 0; k < m; ++k) out += format_number(est.grid[i](k)) + ',';
    out += format_number(est.values[i]) + ',';
    if (est.std_errors) out += format_number((*est.std_errors)[i]);
    out += ',' + std::string(to_string(est.method)) + '\n';
  }
  return out;
}

inline nlohmann::ordered_json to_json(const Vector& v) {
  auto arr = nlohmann::ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline nlohmann::ordered_json to_json(const DualResult& r) {
  nlohmann::ordered_json j;
  j["lambda_star"] = to_json(r.lambda_star);
  j["theta"] = r.theta;
  j["log_Z"] = r.log_Z_at_star;
  j["grad_residual"] = r.grad_residual;
  j["iterations"] = r.iterations;
  j["status"] = std::string(to_string(r.status));
  return j;
}

}  // namespace cramer
