#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailcert/certificate.hpp"
#include "tailcert/models.hpp"
#include "tailcert/verify.hpp"

namespace tailcert {

using Json = nlohmann::json;

/// Named coupling for method "coupling": identity, shifted-gaussian or
/// example2.
struct CouplingJob {
  std::string builtin;
  std::vector<double> sigmas;  // example2
  double b = 0;                // example2
  int theta = 0;               // example2
  int n_x = 200;
  int n_y = 2000;
  int n_y_moment = 20000;
};

struct JobSpec {
  Method method = Method::linf_gaussian;
  std::optional<NormSpec> norm;
  std::shared_ptr<const CovarianceSpec> cov;
  std::optional<MomentProfile> profile;
  std::optional<SamplerSpec> sampler;
  std::optional<CalibrationConstant> calibration;
  std::optional<CouplingJob> coupling;
  std::vector<double> t_grid;
  std::vector<int> k_range;
  std::int64_t n_mc = 10000;
  double conf = 0.99;
  std::uint64_t seed = 0;
  bool halve_bound = false;
};

enum class OutputFormat { csv, json };

struct OutputSpec {
  std::string path;
  OutputFormat format = OutputFormat::csv;
};

struct ExperimentConfig {
  std::vector<JobSpec> jobs;
  std::optional<OutputSpec> output;
};

/// One output row: a report, or an error for a job (or t value) whose
/// computation failed.
struct ReportRow {
  VerificationReport report;
  std::string method;
  double t = 0;
  std::string error;  // non-empty for error rows (verdict column "error")
};

// Each parser throws SchemaError carrying the JSON path of the offending
// field.
NormSpec parse_norm(const Json& j, const std::string& path);
std::shared_ptr<const CovarianceSpec> parse_cov(const Json& j, const std::string& path);
MomentProfile parse_profile(const Json& j, const std::string& path);
SamplerSpec parse_sampler(const Json& j, std::shared_ptr<const CovarianceSpec> cov, const std::string& path);
CalibrationConstant parse_calibration(const Json& j, const std::string& path);
Matrix parse_matrix(const Json& j, const std::string& path);
JobSpec parse_job(const Json& j, const std::string& path);
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& file);

Json to_json(const Matrix& m);
Json to_json(const CalibrationConstant& c);
Json to_json(const BoundCertificate& c);
Json to_json(const VerificationReport& r);
Json to_json(const ReportRow& r);
BoundCertificate certificate_from_json(const Json& j);
VerificationReport report_from_json(const Json& j);
ReportRow row_from_json(const Json& j);

/// Non-finite doubles are encoded as the strings "inf", "-inf", "nan".
Json number_to_json(double v);
double number_from_json(const Json& j, const std::string& path);

/// %.9g, with inf/-inf/nan spelled out.
std::string format_g9(double v);

inline constexpr const char* kCsvHeader = "method,d,n,t,bound,q_emp,ci_lo,ci_hi,verdict,seed";

void write_csv(std::ostream& os, const std::vector<ReportRow>& rows);
void write_json(std::ostream& os, const std::vector<ReportRow>& rows);
/// Overwrites `path`; throws IoError when it cannot be written.
void emit_report(const std::vector<ReportRow>& rows, const OutputSpec& out);
std::vector<ReportRow> read_json_report(const std::string& path);

}  // namespace tailcert
