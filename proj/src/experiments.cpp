#include "hitrun/experiments.hpp"

#include "hitrun/coupling.hpp"
#include "hitrun/errors.hpp"
#include "hitrun/hit_and_run.hpp"
#include "hitrun/kaczmarz.hpp"
#include "hitrun/overlap.hpp"
#include "hitrun/rates.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#ifndef HITRUN_VERSION
#define HITRUN_VERSION "hitrun"
#endif

namespace hitrun {

std::string_view version() { return HITRUN_VERSION; }

namespace {

using Json = nlohmann::ordered_json;

/// Typed access to the parameter map. Every key must be read by the
/// experiment, otherwise finish() rejects it.
class Params {
public:
  explicit Params(const ExperimentConfig &config) : config_(config) {}

  std::optional<std::string> text(const std::string &key) {
    used_.insert(key);
    const auto it = config_.params.find(key);
    if (it == config_.params.end())
      return std::nullopt;
    return it->second;
  }

  std::string text(const std::string &key, const std::string &fallback) {
    return text(key).value_or(fallback);
  }

  std::string required(const std::string &key) {
    auto v = text(key);
    if (!v)
      fail(ErrorCode::ConfigInvalid,
           config_.kind + ": missing required option '" + key + "'");
    return *v;
  }

  double number(const std::string &key, double fallback) {
    const auto v = text(key);
    return v ? parse_double(*v) : fallback;
  }

  std::optional<double> number(const std::string &key) {
    const auto v = text(key);
    if (!v)
      return std::nullopt;
    return parse_double(*v);
  }

  std::uint64_t count(const std::string &key, std::uint64_t fallback) {
    const auto v = text(key);
    if (!v)
      return fallback;
    const std::int64_t n = parse_int(*v);
    if (n < 0)
      fail(ErrorCode::ConfigInvalid, "option '" + key + "' must be >= 0");
    return static_cast<std::uint64_t>(n);
  }

  void finish() const {
    for (const auto &[k, v] : config_.params)
      if (!used_.count(k))
        fail(ErrorCode::ConfigInvalid,
             config_.kind + ": unknown option '" + k + "'");
  }

private:
  const ExperimentConfig &config_;
  std::set<std::string> used_;
};

ParallelOptions parallel_of(const ExperimentConfig &config) {
  ParallelOptions p;
  p.workers = config.workers;
  return p;
}

/// Stream indices below are fixed per purpose so that adding an option never
/// shifts another stream.
constexpr std::uint64_t stream_chain = 0;
constexpr std::uint64_t stream_estimator = 1;
constexpr std::uint64_t stream_replicas = 2;

Estimator make_estimator(const std::string &name, const DirectionLaw &law,
                         std::uint64_t samples, const ExperimentConfig &config) {
  MonteCarlo mc;
  mc.seed = derive_seed(config.seed, stream_estimator);
  mc.parallel = parallel_of(config);
  if (samples > 0)
    mc.samples = samples;
  if (name == "default") {
    Estimator e = default_estimator(law);
    if (std::holds_alternative<MonteCarlo>(e))
      return mc;
    return e;
  }
  if (name == "exact")
    return ExactDiscrete{};
  if (name == "quadrature")
    return SphereQuadrature{};
  if (name == "radial")
    return RadialIntegral{};
  if (name == "mc")
    return mc;
  fail(ErrorCode::ConfigInvalid, "estimator '" + name +
                                     "' is not default, exact, quadrature, "
                                     "radial or mc");
}

Json vector_json(const Vector &v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(v(i));
  return out;
}

Json fit_json(const DecayFit &fit) {
  Json j;
  j["slope"] = fit.slope;
  j["slope_se"] = fit.slope_se;
  j["factor"] = fit.factor();
  j["begin"] = fit.begin;
  j["end"] = fit.end;
  return j;
}

ResultTable run_sample(const ExperimentConfig &config) {
  Params p(config);
  const CovarianceSpec c = parse_covariance(p.required("cov"));
  const int d = static_cast<int>(c.dim());
  const DirectionLaw law = parse_direction_law(p.text("tau", "uniform"), d);
  const std::string x0_text = p.text("x0", "target");
  const std::uint64_t steps = p.count("steps", 1000);
  p.finish();

  Rng rng(derive_seed(config.seed, stream_chain));
  const Vector x0 = x0_text == "target" ? sample_target(c, rng)
                                        : parse_vector(x0_text);
  require_dim(x0, d, "x0");
  const Trajectory t = run_chain(c, law, x0, steps, rng);

  ResultTable table;
  table.kind = "sample";
  table.columns.push_back("step");
  for (int i = 1; i <= d; ++i)
    table.columns.push_back("x_" + std::to_string(i));
  table.columns.push_back("nat_norm");
  for (std::size_t i = 0; i < t.positions.size(); ++i) {
    std::vector<Cell> row;
    row.emplace_back(static_cast<std::int64_t>(t.stored_steps[i]));
    for (Eigen::Index j = 0; j < d; ++j)
      row.emplace_back(t.positions[i](j));
    row.emplace_back(t.natural_norms[t.stored_steps[i]]);
    table.add_row(std::move(row));
  }
  table.summary["stride"] = t.stride;
  table.summary["mean"] = vector_json(t.mean);
  Json cov = Json::array();
  for (Eigen::Index i = 0; i < d; ++i)
    cov.push_back(vector_json(t.covariance.row(i).transpose()));
  table.summary["sample_covariance"] = cov;
  return table;
}

std::pair<long long, long long> parse_window(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    fail(ErrorCode::ConfigInvalid, "window '" + text + "' is not begin:end");
  return {parse_int(text.substr(0, colon)), parse_int(text.substr(colon + 1))};
}

ResultTable run_couple(const ExperimentConfig &config) {
  Params p(config);
  const CovarianceSpec c = parse_covariance(p.required("cov"));
  const int d = static_cast<int>(c.dim());
  const DirectionLaw law = parse_direction_law(p.text("tau", "uniform"), d);
  const Vector a0 = parse_vector(p.required("a0"));
  const Vector b0 = parse_vector(p.required("b0"));
  const std::uint64_t steps = p.count("steps", 100);
  const std::uint64_t replicas = p.count("replicas", 10000);
  const auto window = p.text("window");
  p.finish();

  ContractionOptions opts;
  opts.parallel = parallel_of(config);
  if (window)
    std::tie(opts.window_begin, opts.window_end) = parse_window(*window);
  const ContractionResult r =
      contraction_experiment(c, law, a0, b0, steps, replicas,
                             derive_seed(config.seed, stream_replicas), opts);
  const RateReport rate =
      rho_general(law, c, make_estimator("default", law, 0, config));

  ResultTable table;
  table.kind = "couple";
  table.columns = {"step", "mean_sq_gap", "se", "mean_gap"};
  for (std::size_t k = 0; k < r.mean_sq_gap.size(); ++k)
    table.add_row({static_cast<std::int64_t>(k), r.mean_sq_gap[k], r.se[k],
                   r.mean_gap[k]});
  table.summary["rho"] = rate.rho;
  table.summary["rho_method"] = rate.method;
  table.summary["one_step_factor_bound"] = 1.0 - 2.0 * rate.rho;
  table.summary["fit"] = fit_json(r.fit);
  table.summary["coalesced"] = r.coalesced;
  table.summary["replicas"] = r.replicas;
  return table;
}

ResultTable run_rates(const ExperimentConfig &config) {
  Params p(config);
  const std::string case_name = p.text("case", "general");
  const std::string estimator_name_text = p.text("estimator", "default");
  const std::uint64_t samples = p.count("samples", 0);

  ResultTable table;
  table.kind = "rates";
  table.columns = {"case",      "kappa",     "rho",   "rho_formula",
                   "std_error", "eig_mult",  "method"};

  if (case_name == "general") {
    const CovarianceSpec c = parse_covariance(p.required("cov"));
    const DirectionLaw law =
        parse_direction_law(p.text("tau", "uniform"), static_cast<int>(c.dim()));
    p.finish();
    const RateReport r = rho_general(
        law, c, make_estimator(estimator_name_text, law, samples, config));
    table.add_row({std::string("general"), c.kappa(), r.rho,
                   std::nan(""), r.std_error,
                   static_cast<std::int64_t>(r.eigenspace_dim), r.method});
    table.summary["minimizer"] = vector_json(r.minimizer);
    table.summary["tau"] = law.describe();
    return table;
  }

  const RateCase rc = parse_rate_case(case_name);
  const std::vector<double> kappas = parse_double_list(p.required("kappa"));
  const int d1 = static_cast<int>(p.count("d1", 0));
  const int d2 = static_cast<int>(p.count("d2", 0));
  p.finish();
  for (double kappa : kappas) {
    const CovarianceSpec c = case_covariance(rc, kappa, d1, d2);
    const DirectionLaw law = DirectionLaw::uniform(static_cast<int>(c.dim()));
    const RateReport r = rho_general(
        law, c, make_estimator(estimator_name_text, law, samples, config));
    table.add_row({to_string(rc), kappa, r.rho,
                   rho_case_formula(rc, kappa, d1, d2), r.std_error,
                   static_cast<std::int64_t>(r.eigenspace_dim), r.method});
  }
  return table;
}

ResultTable run_table1(const ExperimentConfig &config) {
  Params p(config);
  const std::vector<double> kappas =
      parse_double_list(p.text("kappas", "100,1000,10000,100000"));
  p.finish();
  const Table1 t = table1(kappas);

  ResultTable table;
  table.kind = "table1";
  table.columns = {"case", "kappa", "rho", "rho_formula", "method"};
  for (const Table1Row &row : t.rows)
    table.add_row({to_string(row.rate_case), row.kappa, row.rho,
                   row.rho_formula, row.method});
  Json slopes = Json::object();
  for (const Table1Slope &s : t.slopes)
    slopes[to_string(s.rate_case)] = {{"slope", s.slope},
                                      {"slope_se", s.slope_se}};
  table.summary["slopes"] = slopes;
  Json comp = Json::array();
  for (double v : t.compensated)
    comp.push_back(v);
  table.summary["compensated_3d_low"] = comp;
  table.summary["compensated_spread"] = t.compensated_spread;
  return table;
}

ResultTable run_overlap(const ExperimentConfig &config) {
  Params p(config);
  const CovarianceSpec c = parse_covariance(p.required("cov"));
  const Vector x = parse_vector(p.required("x"));
  const Vector xt = parse_vector(p.required("xt"));
  const double eps = p.number("eps", 0.1);
  const PolarGrid grid = parse_polar_grid(p.text("grid", "r:2048,theta:4096"));
  p.finish();

  const OverlapConstants k = overlap_constants(c, x, eps);
  const TvBound bound = tv_bound_pointwise(c, x, xt, eps);

  ResultTable table;
  table.kind = "overlap";
  table.columns = {"quantity", "value"};
  Json &s = table.summary;
  if (c.dim() == 2) {
    const TvQuadrature q = tv_quadrature_2d(c, x, xt, grid, parallel_of(config));
    s["tv_quadrature"] = q.tv;
    s["mass_x"] = q.mass_x;
    s["mass_xt"] = q.mass_xt;
    s["radius"] = q.radius;
    s["tail_bound"] = q.tail_bound;
  } else {
    s["tv_quadrature"] = nullptr;
  }
  s["tv_bound_raw"] = bound.raw;
  s["tv_bound_clamped"] = bound.clamped;
  s["natural_distance"] = natural_norm(c, x - xt);
  s["constants"] = {{"c1", k.c1}, {"c2", k.c2}, {"c3", k.c3}};
  for (const auto &[key, v] : s.items())
    if (v.is_number())
      table.add_row({key, v.get<double>()});
  for (const auto &[key, v] : s["constants"].items())
    table.add_row({key, v.get<double>()});
  return table;
}

ResultTable run_mix_bound(const ExperimentConfig &config) {
  Params p(config);
  const CovarianceSpec c = parse_covariance(p.required("cov"));
  const DirectionLaw law =
      parse_direction_law(p.text("tau", "uniform"), static_cast<int>(c.dim()));
  const std::optional<double> rho_given = p.number("rho");
  const double eps = p.number("eps", 0.01);
  const double w2 = p.number("w2", 1.0);
  const double cc = p.number("c", 1.0);
  const double cp = p.number("cprime", 1.0);
  p.finish();

  const double rho =
      rho_given ? *rho_given
                : rho_general(law, c, make_estimator("default", law, 0, config))
                      .rho;
  const std::int64_t n = mixing_time_bound(c, rho, eps, w2, cc, cp);
  const double peps = proof_epsilon(c, eps, cc);

  ResultTable table;
  table.kind = "mix-bound";
  table.columns = {"quantity", "value"};
  table.add_row({std::string("n_bound"), n});
  table.add_row({std::string("rho"), rho});
  table.add_row({std::string("proof_epsilon"), peps});
  table.summary["n_bound"] = n;
  table.summary["rho"] = rho;
  table.summary["rho_source"] = rho_given ? "given" : "computed";
  table.summary["proof_epsilon"] = peps;
  table.summary["note"] = "up to unspecified absolute constants";
  return table;
}

Matrix parse_system_matrix(const std::string &spec) {
  const std::string prefix = "example:a=";
  if (spec.rfind(prefix, 0) == 0) {
    const double a = parse_double(spec.substr(prefix.size()));
    if (!(a > 0.0 && a < 1.0))
      fail(ErrorCode::BadA, "a must lie in (0, 1)");
    return example_matrix(a);
  }
  return read_csv_matrix(spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec);
}

Vector parse_rhs(const std::string &spec, Eigen::Index d) {
  if (spec == "zero")
    return Vector::Zero(d);
  const Matrix m =
      read_csv_matrix(spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec);
  if (m.rows() != 1 && m.cols() != 1)
    fail(ErrorCode::ConfigInvalid, "right-hand side must be one row or column");
  return Eigen::Map<const Vector>(m.data(), m.size());
}

DirectionLaw kaczmarz_law(const Matrix &a, const std::string &variant) {
  const int d = static_cast<int>(a.rows());
  if (variant == "classical")
    return DirectionLaw::rows(a);
  if (variant == "free")
    return DirectionLaw::uniform(d);
  if (variant.rfind("tau:", 0) == 0)
    return parse_direction_law(variant.substr(4), d);
  fail(ErrorCode::ConfigInvalid,
       "variant '" + variant + "' is not classical, free or tau:<spec>");
}

void add_curve(ResultTable &table, const std::string &variant,
               const KaczmarzCurve &curve) {
  for (std::size_t i = 0; i < curve.iters.size(); ++i) {
    std::vector<Cell> row;
    if (!variant.empty())
      row.emplace_back(variant);
    row.emplace_back(static_cast<std::int64_t>(curve.iters[i]));
    row.emplace_back(curve.mean_error[i]);
    row.emplace_back(curve.mean_sq_error[i]);
    row.emplace_back(curve.se[i]);
    table.add_row(std::move(row));
  }
}

ResultTable run_kaczmarz(const ExperimentConfig &config) {
  Params p(config);
  const Matrix a = parse_system_matrix(p.text("matrix", "example:a=0.1"));
  const Vector b = parse_rhs(p.text("b", "zero"), a.rows());
  const std::string variant = p.text("variant", "classical");
  const auto x0_text = p.text("x0");
  const std::uint64_t iters = p.count("iters", 0);
  const std::uint64_t replicas = p.count("replicas", 10000);
  p.finish();

  const KaczmarzProblem problem = build_problem(a, b);
  const DirectionLaw law = kaczmarz_law(a, variant);
  const RateReport rate =
      variant == "classical"
          ? rate_classical(a)
          : rate_general(a, law, make_estimator("default", law, 0, config));

  Vector x0 = problem.x_star;
  x0(0) -= 10.0;
  if (x0_text)
    x0 = parse_vector(*x0_text);
  const std::uint64_t n =
      iters > 0 ? iters
                : static_cast<std::uint64_t>(std::ceil(6.0 / rate.rho));

  EnsembleOptions opts;
  opts.parallel = parallel_of(config);
  const KaczmarzCurve curve =
      kaczmarz_ensemble(problem, law, x0, n, replicas,
                        derive_seed(config.seed, stream_replicas), opts);

  ResultTable table;
  table.kind = "kaczmarz";
  table.columns = {"iter", "mean_error", "mean_sq_error", "se"};
  add_curve(table, "", curve);
  table.summary["rho"] = rate.rho;
  table.summary["rho_method"] = rate.method;
  table.summary["iters"] = n;
  table.summary["decay"] = curve.fit.rate();
  table.summary["fit"] = fit_json(curve.fit);
  return table;
}

ResultTable run_kaczmarz_figure(const ExperimentConfig &config) {
  Params p(config);
  const double a = p.number("a", 0.1);
  const std::uint64_t replicas = p.count("replicas", 10000);
  p.finish();

  EnsembleOptions opts;
  opts.parallel = parallel_of(config);
  const std::uint64_t seed = derive_seed(config.seed, stream_replicas);
  const ConvergenceResult cl = convergence_experiment(
      a, KaczmarzVariant::classical, replicas, 0, seed, opts);
  const ConvergenceResult fr = convergence_experiment(
      a, KaczmarzVariant::coordinate_free, replicas, 0, seed, opts);

  ResultTable table;
  table.kind = "kaczmarz-figure";
  table.columns = {"variant", "iter", "mean_error", "mean_sq_error", "se"};
  add_curve(table, to_string(cl.variant), cl.curve);
  add_curve(table, to_string(fr.variant), fr.curve);

  Json &s = table.summary;
  s["a"] = a;
  s["rho_classical"] = cl.rate.rho;
  s["rho_free"] = fr.rate.rho;
  s["decay_classical"] = cl.decay;
  s["decay_free"] = fr.decay;
  s["iters_classical"] = cl.iters;
  s["iters_free"] = fr.iters;
  s["speedup"] = fr.decay / cl.decay;
  s["rate_ratio"] = fr.rate.rho / cl.rate.rho;
  s["order_classical"] = a * a / 4.0;
  s["order_free"] = a / 4.0;
  return table;
}

} // namespace

ResultTable run(const ExperimentConfig &config) {
  ResultTable table;
  if (config.kind == "sample")
    table = run_sample(config);
  else if (config.kind == "couple")
    table = run_couple(config);
  else if (config.kind == "rates")
    table = run_rates(config);
  else if (config.kind == "table1")
    table = run_table1(config);
  else if (config.kind == "overlap")
    table = run_overlap(config);
  else if (config.kind == "mix-bound")
    table = run_mix_bound(config);
  else if (config.kind == "kaczmarz")
    table = run_kaczmarz(config);
  else if (config.kind == "kaczmarz-figure")
    table = run_kaczmarz_figure(config);
  else
    fail(ErrorCode::ConfigInvalid, "unknown experiment '" + config.kind + "'");

  table.provenance = {{"version", std::string(version())},
                      {"rng", std::string(Rng::algorithm)},
                      {"experiment", config.kind},
                      {"seed", std::to_string(config.seed)},
                      {"workers", std::to_string(config.workers)}};
  for (const auto &[k, v] : config.params)
    table.provenance.emplace_back("config." + k, v);
  return table;
}

std::string output_format(const ExperimentConfig &config) {
  std::string f = config.format;
  if (f.empty()) {
    const auto dot = config.out.rfind('.');
    f = dot != std::string::npos && config.out.substr(dot) == ".json" ? "json"
                                                                      : "csv";
  }
  if (f != "csv" && f != "json")
    fail(ErrorCode::ConfigInvalid, "format '" + f + "' is not csv or json");
  return f;
}

std::string render(const ResultTable &table, const std::string &format) {
  std::ostringstream out;
  if (format == "json")
    write_json(table, out);
  else
    write_csv(table, out);
  return out.str();
}

void write_result(const ResultTable &table, const ExperimentConfig &config) {
  const std::string text = render(table, output_format(config));
  if (config.out.empty() || config.out == "-")
    std::cout << text << std::flush;
  else
    write_file_atomic(config.out, text);
}

} // namespace hitrun
