#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tailcert/errors.hpp"
#include "tailcert/runner.hpp"

int main(int argc, char** argv) {
  using namespace tailcert;
  CLI::App app{"Variational tail bounds with Monte Carlo certification"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  std::string config_path, out_path, format;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed_override;
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Report path (default: config output.path, else stdout)");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--jobs", jobs, "Concurrent jobs")->check(CLI::Range(1u, 1024u));
  run->add_option("--seed-override", seed_override, "Mix this value into every job seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const SchemaError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  OutputSpec out = cfg.output.value_or(OutputSpec{});
  if (!out_path.empty()) out.path = out_path;
  if (format == "csv") out.format = OutputFormat::csv;
  if (format == "json") out.format = OutputFormat::json;

  RunOptions opt;
  opt.workers = jobs;
  opt.seed_override = seed_override;
  const RunResult result = run_config(cfg, opt);

  try {
    if (out.path.empty()) {
      if (out.format == OutputFormat::csv) write_csv(std::cout, result.rows);
      else write_json(std::cout, result.rows);
    } else {
      emit_report(result.rows, out);
    }
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }
  for (const ReportRow& r : result.rows)
    if (!r.error.empty()) std::cerr << r.method << " t=" << r.t << ": " << r.error << '\n';
  return result.exit_code;
}
