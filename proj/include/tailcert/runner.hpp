#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tailcert/io.hpp"

namespace tailcert {

enum ExitCode : int { kExitOk = 0, kExitViolations = 1, kExitUsage = 2, kExitNumeric = 3 };

struct RunOptions {
  unsigned workers = 1;
  std::optional<std::uint64_t> seed_override;
};

struct RunResult {
  std::vector<ReportRow> rows;  // input order: jobs, then t_grid
  int exit_code = kExitOk;
};

/// Bound certificate of `job` at confidence t (before any halve_bound hook).
BoundCertificate compute_bound(const JobSpec& job, double t);

/// All rows of one job; failures become error rows.
std::vector<ReportRow> run_job(const JobSpec& job);

RunResult run_config(const ExperimentConfig& config, const RunOptions& opt = {});

}  // namespace tailcert
