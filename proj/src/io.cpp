#include "tailcert/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tailcert/errors.hpp"

namespace tailcert {

namespace {

std::string at(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(at(path, key), "required field is missing");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

std::int64_t get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t get_seed(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  // Seeds above 2^63 may also be given as decimal strings.
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t pos = 0;
    try {
      const auto v = std::stoull(s, &pos, 10);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw SchemaError(path, "expected a non-negative integer seed");
}

bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
  return j.get<bool>();
}

std::vector<double> get_reals(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number_from_json(j[i], at(path, i)));
  return v;
}

int get_dim(const Json& j, const std::string& key, const std::string& path) {
  const auto v = get_int(require(j, key, path), at(path, key));
  if (v < 1 || v > 1'000'000) throw SchemaError(at(path, key), "dimension must lie in [1, 1e6]");
  return static_cast<int>(v);
}

// Library validation errors become schema errors at the object's path.
template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

CoreDist parse_core(const Json& j, const std::string& path) {
  const std::string s = get_string(j, path);
  if (s == "gaussian") return CoreDist::gaussian;
  if (s == "laplace") return CoreDist::laplace;
  if (s == "rademacher") return CoreDist::rademacher;
  throw SchemaError(path, "unknown core '" + s + "' (gaussian, laplace, rademacher)");
}

}  // namespace

Json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw SchemaError(path, "expected a number");
}

std::string format_g9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Matrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw SchemaError(at(path, 0), "expected a non-empty row");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = at(path, r);
    if (!j[r].is_array() || j[r].size() != cols) throw SchemaError(rp, "rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = number_from_json(j[r][c], at(rp, c));
  }
  return m;
}

NormSpec parse_norm(const Json& j, const std::string& path) {
  const std::string kind = get_string(require(j, "kind", path), at(path, "kind"));
  return wrap(path, [&]() -> NormSpec {
    if (kind == "euclidean") return NormSpec::euclidean(get_dim(j, "d", path));
    if (kind == "sup") return NormSpec::sup(get_dim(j, "d", path));
    if (kind == "polyhedral") return NormSpec::polyhedral(parse_matrix(require(j, "vertices", path), at(path, "vertices")));
    if (kind == "matrix_operator") return NormSpec::matrix_operator(get_dim(j, "rows", path), get_dim(j, "cols", path));
    if (kind == "symmetric_operator") return NormSpec::symmetric_operator(get_dim(j, "d", path));
    throw SchemaError(at(path, "kind"), "unknown norm kind '" + kind + "'");
  });
}

std::shared_ptr<const CovarianceSpec> parse_cov(const Json& j, const std::string& path) {
  const std::string kind = get_string(require(j, "kind", path), at(path, "kind"));
  return wrap(path, [&]() -> std::shared_ptr<const CovarianceSpec> {
    if (kind == "identity") {
      const int d = get_dim(j, "d", path);
      double scale = 1;
      if (const Json* s = optional_field(j, "scale")) scale = number_from_json(*s, at(path, "scale"));
      if (!(scale >= 0)) throw SchemaError(at(path, "scale"), "must be >= 0");
      return std::make_shared<CovarianceSpec>(CovarianceSpec::identity(d).scaled(scale));
    }
    if (kind == "diagonal") {
      const auto v = get_reals(require(j, "diag", path), at(path, "diag"));
      if (v.empty()) throw SchemaError(at(path, "diag"), "must be non-empty");
      return std::make_shared<CovarianceSpec>(CovarianceSpec::diagonal(Eigen::Map<const Vector>(v.data(), v.size())));
    }
    if (kind == "dense") return std::make_shared<CovarianceSpec>(parse_matrix(require(j, "matrix", path), at(path, "matrix")));
    throw SchemaError(at(path, "kind"), "unknown covariance kind '" + kind + "'");
  });
}

MomentProfile parse_profile(const Json& j, const std::string& path) {
  const std::string kind = get_string(require(j, "kind", path), at(path, "kind"));
  auto real = [&](const char* key) { return number_from_json(require(j, key, path), at(path, key)); };
  MomentProfile m = wrap(path, [&]() -> MomentProfile {
    if (kind == "sub_gaussian") return MomentProfile::sub_gaussian(real("eta"));
    if (kind == "sub_exponential") return MomentProfile::sub_exponential(real("eta"));
    if (kind == "sub_gamma") return MomentProfile::sub_gamma(real("eta1"), real("eta2"));
    if (kind == "power") return MomentProfile::power(real("eta"), real("alpha"));
    if (kind == "constant") return MomentProfile::constant(real("c"));
    if (kind == "table")
      return MomentProfile::table(get_reals(require(j, "p", path), at(path, "p")),
                                  get_reals(require(j, "h", path), at(path, "h")));
    throw SchemaError(at(path, "kind"), "unknown profile kind '" + kind + "'");
  });
  if (const Json* g = optional_field(j, "gaussian_relative")) m.gaussian_relative = get_bool(*g, at(path, "gaussian_relative"));
  wrap(path, [&] { m.validate(); });
  return m;
}

SamplerSpec parse_sampler(const Json& j, std::shared_ptr<const CovarianceSpec> cov, const std::string& path) {
  const std::string family = get_string(require(j, "family", path), at(path, "family"));
  auto need_cov = [&] {
    if (!cov) throw SchemaError(at(path, "family"), "family '" + family + "' needs the job's cov");
    return cov;
  };
  auto core = [&] {
    const Json* c = optional_field(j, "core");
    return c ? parse_core(*c, at(path, "core")) : CoreDist::gaussian;
  };
  SamplerSpec s = wrap(path, [&]() -> SamplerSpec {
    if (family == "gaussian_vector") return SamplerSpec::gaussian(need_cov(), 0);
    if (family == "product_subexp_vector") return SamplerSpec::subexp(need_cov(), 0);
    if (family == "rademacher_vector") return SamplerSpec::rademacher(get_dim(j, "d", path), 0);
    if (family == "psd_rank_one") return SamplerSpec::rank_one(need_cov(), core(), 0);
    if (family == "empirical_cov") {
      const auto n = get_int(require(j, "n", path), at(path, "n"));
      if (n < 1) throw SchemaError(at(path, "n"), "must be >= 1");
      return SamplerSpec::empirical(need_cov(), static_cast<int>(n), core(), 0);
    }
    if (family == "matrix_series") {
      const Json& a = require(j, "A_list", path);
      if (!a.is_array() || a.empty()) throw SchemaError(at(path, "A_list"), "expected a non-empty array of matrices");
      std::vector<Matrix> list;
      for (std::size_t i = 0; i < a.size(); ++i) list.push_back(parse_matrix(a[i], at(at(path, "A_list"), i)));
      return SamplerSpec::series(std::move(list), core(), 0);
    }
    throw SchemaError(at(path, "family"), "unknown sampler family '" + family + "'");
  });
  wrap(path, [&] { s.validate(); });
  return s;
}

CalibrationConstant parse_calibration(const Json& j, const std::string& path) {
  CalibrationConstant c;
  c.C = number_from_json(require(j, "C", path), at(path, "C"));
  if (!(c.C > 0) || !std::isfinite(c.C)) throw SchemaError(at(path, "C"), "must be finite and > 0");
  if (const Json* f = optional_field(j, "family")) c.family = get_string(*f, at(path, "family"));
  if (const Json* s = optional_field(j, "seed")) c.seed = get_seed(*s, at(path, "seed"));
  return c;
}

namespace {

CouplingJob parse_coupling(const Json& j, const std::string& path) {
  CouplingJob c;
  c.builtin = get_string(require(j, "builtin", path), at(path, "builtin"));
  if (c.builtin != "identity" && c.builtin != "shifted-gaussian" && c.builtin != "example2")
    throw SchemaError(at(path, "builtin"), "unknown coupling '" + c.builtin + "' (identity, shifted-gaussian, example2)");
  if (c.builtin == "example2") {
    c.sigmas = get_reals(require(j, "sigmas", path), at(path, "sigmas"));
    if (c.sigmas.empty()) throw SchemaError(at(path, "sigmas"), "must be non-empty");
    c.b = number_from_json(require(j, "b", path), at(path, "b"));
    c.theta = static_cast<int>(get_int(require(j, "theta", path), at(path, "theta")));
    if (c.theta < 0 || c.theta >= static_cast<int>(c.sigmas.size()))
      throw SchemaError(at(path, "theta"), "must index sigmas");
  }
  auto count = [&](const char* key, int& dst, int lo) {
    if (const Json* v = optional_field(j, key)) {
      const auto x = get_int(*v, at(path, key));
      if (x < lo) throw SchemaError(at(path, key), "must be >= " + std::to_string(lo));
      dst = static_cast<int>(x);
    }
  };
  count("n_x", c.n_x, 100);
  count("n_y", c.n_y, 100);
  count("n_y_moment", c.n_y_moment, 100);
  return c;
}

}  // namespace

JobSpec parse_job(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  JobSpec job;
  const std::string mp = at(path, "method");
  const std::string method = get_string(require(j, "method", path), mp);
  try {
    job.method = method_from_string(method);
  } catch (const Error&) {
    throw SchemaError(mp, "unknown method '" + method + "'");
  }
  if (job.method == Method::lemma1_generic) throw SchemaError(mp, "lemma1_generic is library-only");

  job.seed = get_seed(require(j, "seed", path), at(path, "seed"));
  job.t_grid = get_reals(require(j, "t_grid", path), at(path, "t_grid"));
  if (job.t_grid.empty()) throw SchemaError(at(path, "t_grid"), "must be non-empty");
  for (std::size_t i = 0; i < job.t_grid.size(); ++i)
    if (!(job.t_grid[i] > 0) || !std::isfinite(job.t_grid[i]))
      throw SchemaError(at(at(path, "t_grid"), i), "t must be finite and > 0");
  if (const Json* v = optional_field(j, "n_mc")) {
    job.n_mc = get_int(*v, at(path, "n_mc"));
    if (job.n_mc < 100) throw SchemaError(at(path, "n_mc"), "must be >= 100");
  }
  if (const Json* v = optional_field(j, "conf")) {
    job.conf = number_from_json(*v, at(path, "conf"));
    if (!(job.conf > 0 && job.conf < 1)) throw SchemaError(at(path, "conf"), "must lie in (0, 1)");
  }
  if (const Json* v = optional_field(j, "halve_bound")) job.halve_bound = get_bool(*v, at(path, "halve_bound"));
  if (const Json* v = optional_field(j, "k_range")) {
    for (double k : get_reals(*v, at(path, "k_range"))) {
      if (k < 1 || k != std::floor(k)) throw SchemaError(at(path, "k_range"), "entries must be integers >= 1");
      job.k_range.push_back(static_cast<int>(k));
    }
  }

  if (const Json* v = optional_field(j, "norm")) job.norm = parse_norm(*v, at(path, "norm"));
  if (const Json* v = optional_field(j, "cov")) job.cov = parse_cov(*v, at(path, "cov"));
  if (const Json* v = optional_field(j, "profile")) job.profile = parse_profile(*v, at(path, "profile"));
  if (const Json* v = optional_field(j, "sampler")) job.sampler = parse_sampler(*v, job.cov, at(path, "sampler"));
  if (const Json* v = optional_field(j, "calibration")) job.calibration = parse_calibration(*v, at(path, "calibration"));
  if (const Json* v = optional_field(j, "coupling")) job.coupling = parse_coupling(*v, at(path, "coupling"));
  if (job.sampler && job.profile) job.sampler->declared_profile = *job.profile;

  // Per-method sufficiency, checked before anything runs.
  auto need = [&](bool ok, const char* field, const std::string& why) {
    if (!ok) throw SchemaError(at(path, field), why);
  };
  auto need_norm_kind = [&](std::initializer_list<NormKind> kinds) {
    need(job.norm.has_value(), "norm", "required for method " + method);
    for (NormKind k : kinds)
      if (job.norm->kind() == k) return;
    throw SchemaError(at(at(path, "norm"), "kind"), "norm kind " + to_string(job.norm->kind()) + " is not valid for " + method);
  };
  auto need_dims = [&] {
    if (job.sampler && job.norm && job.sampler->out_dim() != job.norm->dim())
      throw SchemaError(at(path, "sampler"), "sampler output dimension does not match the norm");
    if (job.cov && job.norm && !job.norm->is_matrix() && job.cov->dim() != job.norm->dim())
      throw SchemaError(at(path, "cov"), "covariance dimension does not match the norm");
  };
  switch (job.method) {
    case Method::linf_gaussian:
      need_norm_kind({NormKind::sup});
      break;
    case Method::polyhedral:
      need_norm_kind({NormKind::sup, NormKind::polyhedral});
      break;
    case Method::theorem2:
    case Method::corollary_subgauss:
    case Method::corollary_subexp:
      need_norm_kind({NormKind::euclidean});
      need(job.cov != nullptr, "cov", "required for method " + method);
      need(job.profile.has_value(), "profile", "required for method " + method);
      if (job.method == Method::corollary_subgauss)
        need(job.profile->kind == ProfileKind::sub_gaussian, "profile", "corollary_subgauss needs a sub_gaussian profile");
      if (job.method == Method::corollary_subexp)
        need(job.profile->kind == ProfileKind::sub_exponential, "profile", "corollary_subexp needs a sub_exponential profile");
      need(job.sampler.has_value(), "sampler", "required for method " + method);
      break;
    case Method::pushforward:
      need_norm_kind({NormKind::euclidean, NormKind::sup, NormKind::polyhedral});
      need(job.cov != nullptr, "cov", "required for method " + method);
      need(job.profile.has_value(), "profile", "required for method " + method);
      need(job.profile->kind == ProfileKind::sub_gaussian || job.profile->kind == ProfileKind::sub_gamma ||
               job.profile->kind == ProfileKind::sub_exponential,
           "profile", "pushforward needs a sub_gaussian, sub_exponential or sub_gamma profile");
      need(job.sampler.has_value(), "sampler", "required for method " + method);
      break;
    case Method::psd_sum:
    case Method::sample_cov:
      need_norm_kind({NormKind::symmetric_operator, NormKind::matrix_operator});
      need(job.cov != nullptr, "cov", "required for method " + method);
      need(job.profile.has_value(), "profile", "required for method " + method);
      need(job.sampler.has_value() && job.sampler->family == SamplerFamily::empirical_cov, "sampler",
           method + " needs an empirical_cov sampler");
      need(job.calibration.has_value(), "calibration", "required for method " + method);
      break;
    case Method::matrix_series:
      need_norm_kind({NormKind::matrix_operator, NormKind::symmetric_operator});
      need(job.profile.has_value() && job.profile->gaussian_relative, "profile",
           "matrix_series needs a gaussian_relative profile");
      need(job.sampler.has_value() && job.sampler->family == SamplerFamily::matrix_series, "sampler",
           "matrix_series needs a matrix_series sampler");
      need(job.calibration.has_value(), "calibration", "required for method " + method);
      break;
    case Method::coupling:
      need(job.coupling.has_value(), "coupling", "required for method coupling");
      if (job.coupling->builtin == "identity") {
        need(job.sampler.has_value() && !job.sampler->is_matrix(), "sampler", "identity coupling needs a vector sampler");
        need(job.norm.has_value(), "norm", "identity coupling takes F = the norm");
      }
      break;
    case Method::lemma1_generic:
      break;
  }
  need_dims();
  return job;
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  ExperimentConfig cfg;
  const Json& jobs = require(j, "jobs", "$");
  if (!jobs.is_array()) throw SchemaError("$.jobs", "expected an array");
  for (std::size_t i = 0; i < jobs.size(); ++i) cfg.jobs.push_back(parse_job(jobs[i], at("$.jobs", i)));
  if (const Json* o = optional_field(j, "output")) {
    OutputSpec out;
    out.path = get_string(require(*o, "path", "$.output"), "$.output.path");
    if (const Json* f = optional_field(*o, "format")) {
      const std::string s = get_string(*f, "$.output.format");
      if (s == "csv") out.format = OutputFormat::csv;
      else if (s == "json") out.format = OutputFormat::json;
      else throw SchemaError("$.output.format", "expected csv or json");
    }
    cfg.output = out;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config '" + file + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const CalibrationConstant& c) {
  return Json{{"C", number_to_json(c.C)}, {"family", c.family}, {"seed", c.seed}};
}

Json to_json(const BoundCertificate& c) {
  Json j;
  j["bound_value"] = number_to_json(c.bound_value);
  j["confidence_t"] = number_to_json(c.confidence_t);
  j["method"] = to_string(c.method);
  j["constant_mode"] = c.constant_mode == ConstantMode::calibrated ? "calibrated" : "explicit";
  Json params = Json::object();
  for (const auto& [k, v] : c.optimal_params) params[k] = number_to_json(v);
  j["optimal_params"] = params;
  Json diag = Json::object();
  for (const auto& [k, v] : c.diagnostics) diag[k] = number_to_json(v);
  j["diagnostics"] = diag;
  j["flags"] = c.flags;
  if (c.calibration) j["calibration"] = to_json(*c.calibration);
  return j;
}

BoundCertificate certificate_from_json(const Json& j) {
  const std::string p = "$.certificate";
  BoundCertificate c;
  c.bound_value = number_from_json(require(j, "bound_value", p), at(p, "bound_value"));
  c.confidence_t = number_from_json(require(j, "confidence_t", p), at(p, "confidence_t"));
  c.method = method_from_string(get_string(require(j, "method", p), at(p, "method")));
  const std::string mode = get_string(require(j, "constant_mode", p), at(p, "constant_mode"));
  c.constant_mode = mode == "calibrated" ? ConstantMode::calibrated : ConstantMode::explicit_constants;
  for (const auto& [k, v] : require(j, "optimal_params", p).items()) c.optimal_params[k] = number_from_json(v, at(p, k));
  for (const auto& [k, v] : require(j, "diagnostics", p).items()) c.diagnostics[k] = number_from_json(v, at(p, k));
  for (const auto& f : require(j, "flags", p)) c.flags.push_back(get_string(f, at(p, "flags")));
  if (const Json* cal = optional_field(j, "calibration")) c.calibration = parse_calibration(*cal, at(p, "calibration"));
  return c;
}

Json to_json(const VerificationReport& r) {
  return Json{{"certificate", to_json(r.certificate)},
              {"empirical_quantile", number_to_json(r.empirical_quantile)},
              {"quantile_ci", Json::array({number_to_json(r.ci_lo), number_to_json(r.ci_hi)})},
              {"n_samples", r.n_samples},
              {"verdict", to_string(r.verdict)},
              {"seed", r.seed},
              {"d", r.d},
              {"n", r.n}};
}

VerificationReport report_from_json(const Json& j) {
  const std::string p = "$";
  VerificationReport r;
  r.certificate = certificate_from_json(require(j, "certificate", p));
  r.empirical_quantile = number_from_json(require(j, "empirical_quantile", p), "$.empirical_quantile");
  const Json& ci = require(j, "quantile_ci", p);
  if (!ci.is_array() || ci.size() != 2) throw SchemaError("$.quantile_ci", "expected [lo, hi]");
  r.ci_lo = number_from_json(ci[0], "$.quantile_ci[0]");
  r.ci_hi = number_from_json(ci[1], "$.quantile_ci[1]");
  r.n_samples = get_int(require(j, "n_samples", p), "$.n_samples");
  r.verdict = verdict_from_string(get_string(require(j, "verdict", p), "$.verdict"));
  r.seed = get_seed(require(j, "seed", p), "$.seed");
  r.d = static_cast<int>(get_int(require(j, "d", p), "$.d"));
  r.n = static_cast<int>(get_int(require(j, "n", p), "$.n"));
  return r;
}

Json to_json(const ReportRow& r) {
  Json j = to_json(r.report);
  j["method"] = r.method;
  j["t"] = number_to_json(r.t);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

ReportRow row_from_json(const Json& j) {
  ReportRow r;
  r.report = report_from_json(j);
  r.method = get_string(require(j, "method", "$"), "$.method");
  r.t = number_from_json(require(j, "t", "$"), "$.t");
  if (const Json* e = optional_field(j, "error")) r.error = get_string(*e, "$.error");
  return r;
}

void write_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << kCsvHeader << '\n';
  for (const ReportRow& r : rows) {
    const VerificationReport& v = r.report;
    os << r.method << ',' << v.d << ',' << v.n << ',' << format_g9(r.t) << ',' << format_g9(v.certificate.bound_value)
       << ',' << format_g9(v.empirical_quantile) << ',' << format_g9(v.ci_lo) << ',' << format_g9(v.ci_hi) << ','
       << (r.error.empty() ? to_string(v.verdict) : "error") << ',' << v.seed << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<ReportRow>& rows) {
  Json arr = Json::array();
  for (const ReportRow& r : rows) arr.push_back(to_json(r));
  os << Json{{"reports", arr}}.dump(2) << '\n';
}

void emit_report(const std::vector<ReportRow>& rows, const OutputSpec& out) {
  std::ostringstream buf;
  if (out.format == OutputFormat::csv) write_csv(buf, rows);
  else write_json(buf, rows);
  std::ofstream f(out.path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + out.path + "'");
  f << buf.str();
  if (!f) throw IoError("write to '" + out.path + "' failed");
}

std::vector<ReportRow> read_json_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  std::vector<ReportRow> rows;
  const Json& arr = require(j, "reports", "$");
  for (const Json& r : arr) rows.push_back(row_from_json(r));
  return rows;
}

}  // namespace tailcert
