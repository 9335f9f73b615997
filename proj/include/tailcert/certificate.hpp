#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tailcert {

enum class Method {
  lemma1_generic,
  theorem2,
  corollary_subgauss,
  corollary_subexp,
  polyhedral,
  linf_gaussian,
  pushforward,
  psd_sum,
  sample_cov,
  matrix_series,
  coupling
};

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Empirical stand-in for an unspecified absolute constant, with provenance.
struct CalibrationConstant {
  double C = 1.0;
  std::string family = "unit";
  std::uint64_t seed = 0;
};

enum class ConstantMode { explicit_constants, calibrated };

struct BoundCertificate {
  double bound_value = 0.0;
  double confidence_t = 0.0;
  /// Subset of {p, kappa0, rho0, tau, k, b}. Infinite parameters are stored
  /// as +inf.
  std::map<std::string, double> optimal_params;
  Method method = Method::lemma1_generic;
  ConstantMode constant_mode = ConstantMode::explicit_constants;
  std::optional<CalibrationConstant> calibration;
  std::vector<std::string> flags;
  std::map<std::string, double> diagnostics;

  bool has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
  void flag(const std::string& f) {
    if (!has_flag(f)) flags.push_back(f);
  }
};

}  // namespace tailcert
