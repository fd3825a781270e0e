#include "homog/cli.hpp"

#include "homog/matrix_market.hpp"
#include "homog/problem_io.hpp"
#include "homog/report_io.hpp"
#include "homog/scenarios.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <ostream>
#include <sstream>

namespace homog {

namespace {

namespace fs = std::filesystem;

// Problem plus the defaults that come with it.
struct Loaded {
  CoefficientSet cs;
  std::optional<DivergenceFormSpec> form;
  std::vector<std::string> rhs;
  std::vector<int> periods;
  int n_cell = 128;
  int n_slow = 1;
  nlohmann::json run = nlohmann::json::object();
  std::string id;
};

Loaded load(const RunConfig& cfg) {
  Loaded l;
  if (!cfg.preset.empty()) {
    Preset p = make_preset(cfg.preset);
    l.cs = std::move(p.cs);
    l.form = std::move(p.form);
    l.rhs = std::move(p.rhs);
    l.periods = std::move(p.periods);
    l.n_cell = p.n_cell;
    l.n_slow = p.n_slow;
    l.id = "preset:" + cfg.preset;
    return l;
  }
  if (!fs::exists(cfg.config_path)) throw ProblemError("cannot open '" + cfg.config_path + "'");
  Problem p = load_problem_file(cfg.config_path);
  l.cs = std::move(p.cs);
  l.run = std::move(p.run);
  l.id = l.cs.name.empty() ? fs::path(cfg.config_path).filename().string() : l.cs.name;
  const int d = l.cs.d();
  l.rhs.assign(static_cast<std::size_t>(l.cs.n()), d == 1 ? "sin(x1)" : "sin(x1)*cos(x2)");
  l.periods = d == 1 ? std::vector<int>{8, 16, 32, 64, 128} : std::vector<int>{2, 4, 8};
  l.n_cell = d == 1 ? 128 : 32;
  l.n_slow = l.cs.depends_on_x() ? (d == 1 ? 16 : 4) : 1;
  return l;
}

// Fills parameters from the problem's [run] table unless given on the command line.
void merge_run_table(RunConfig& cfg, const nlohmann::json& run, const CLI::App& app) {
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  auto take_int = [&](const char* key, const char* flag, int& dst) {
    if (!run.contains(key) || given(flag)) return;
    if (!run[key].is_number_integer()) throw ProblemError(std::string("[run] ") + key + " must be an integer");
    dst = run[key].get<int>();
  };
  take_int("n_cell", "--n-cell", cfg.n_cell);
  take_int("n_slow", "--n-slow", cfg.n_slow);
  take_int("points_per_period", "--points-per-period", cfg.points_per_period);
  take_int("n_phys", "--n-phys", cfg.n_phys);
  take_int("k", "--k", cfg.k);
  if (run.contains("seed") && !given("--seed")) cfg.seed = run["seed"].get<std::uint64_t>();
  if (run.contains("periods") && !given("--periods")) cfg.periods = run["periods"].get<std::vector<int>>();
  if (run.contains("eps") && !given("--eps")) cfg.eps = run["eps"].get<std::vector<double>>();
  if (run.contains("lambda") && !given("--lambda")) {
    const auto& v = run["lambda"];
    if (v.is_number()) {
      cfg.lambda = Complex(v.get<double>(), 0.0);
    } else if (v.is_array() && v.size() == 2) {
      cfg.lambda = Complex(v[0].get<double>(), v[1].get<double>());
    } else {
      throw ProblemError("[run] lambda must be a number or [re, im]");
    }
  }
  if (run.contains("rhs") && !given("--rhs")) {
    const auto& v = run["rhs"];
    cfg.rhs = v.is_string() ? std::vector<std::string>{v.get<std::string>()}
                            : v.get<std::vector<std::string>>();
  }
  if (run.contains("format") && !given("--format")) cfg.format = run["format"].get<std::string>();
  if (run.contains("cell_backend") && !given("--cell-backend")) {
    cfg.cell_backend = run["cell_backend"].get<std::string>();
  }
  if (run.contains("cell_accept_residual") && !given("--cell-accept-residual")) {
    cfg.cell_accept_residual = run["cell_accept_residual"].get<double>();
  }
}

CellSolverOptions cell_options(const RunConfig& cfg) {
  CellSolverOptions o;
  if (cfg.cell_backend == "cg") {
    o.backend = CellBackend::ConjugateGradient;
  } else if (cfg.cell_backend == "direct") {
    o.backend = CellBackend::Direct;
  } else if (cfg.cell_backend != "auto") {
    throw ProblemError("unknown cell backend '" + cfg.cell_backend + "'");
  }
  o.accept_residual = cfg.cell_accept_residual;
  return o;
}

std::vector<double> eps_list(const RunConfig& cfg, const Loaded& l) {
  std::vector<double> e;
  if (!cfg.eps.empty()) {
    for (double v : cfg.eps) e.push_back(EpsilonChoice::from_eps(v, l.cs.length).eps);
  } else {
    const std::vector<int>& p = cfg.periods.empty() ? l.periods : cfg.periods;
    for (int v : p) {
      if (v < 1) throw ProblemError("period counts must be positive");
    }
    e = eps_sweep(p, l.cs.length);
  }
  if (e.size() < 3) throw ProblemError("the eps list needs at least 3 values");
  return e;
}

std::vector<ScalarField> rhs_fields(const RunConfig& cfg, const Loaded& l) {
  const std::vector<std::string>& src = cfg.rhs.empty() ? l.rhs : cfg.rhs;
  if (static_cast<int>(src.size()) != l.cs.n()) {
    throw ProblemError("need one right-hand side expression per component (" +
                       std::to_string(l.cs.n()) + ")");
  }
  std::vector<ScalarField> f;
  for (const auto& s : src) {
    ScalarField v = ScalarField::parse(s);
    if (v.depends_on_xi()) throw ProblemError("the right-hand side must not depend on xi");
    f.push_back(std::move(v));
  }
  return f;
}

std::string rhs_id(const RunConfig& cfg, const Loaded& l) {
  const std::vector<std::string>& src = cfg.rhs.empty() ? l.rhs : cfg.rhs;
  std::string s;
  for (std::size_t i = 0; i < src.size(); ++i) s += (i ? "; " : "") + src[i];
  return s;
}

Json header(const RunConfig& cfg, const Loaded& l) {
  Json j;
  j["command"] = cfg.command;
  j["problem"] = l.id;
  j["seed"] = cfg.seed;
  j["d"] = l.cs.d();
  j["n"] = l.cs.n();
  j["m"] = l.cs.m();
  j["length"] = number_json(l.cs.length);
  return j;
}

void emit(const RunConfig& cfg, const std::string& name, const Json& j, const std::string* csv,
          std::ostream& out) {
  const std::string text = dump(j);
  if (!cfg.out_dir.empty()) {
    write_text(fs::path(cfg.out_dir) / (name + ".json"), text);
    if (csv) write_text(fs::path(cfg.out_dir) / (name + ".csv"), *csv);
  }
  if (csv && cfg.format == "csv") {
    out << *csv;
  } else {
    out << text;
  }
}

ValidationReport checked(const RunConfig& cfg, const Loaded& l) {
  ProbePlan plan;
  plan.seed = cfg.seed;
  if (l.form) validate(*l.form, plan);
  return validate(l.cs, plan);
}

int cmd_validate(const RunConfig& cfg, const Loaded& l, std::ostream& out, std::ostream& err) {
  ProbePlan plan;
  plan.seed = cfg.seed;
  ValidationReport rep = inspect(l.cs, plan);
  if (rep.valid() && l.form) {
    try {
      validate(*l.form, plan);
    } catch (const ValidationFailed& ex) {
      rep.offending = ex.report().offending;
      rep.hermitian_ok = ex.report().hermitian_ok;
      rep.c1 = std::min(rep.c1, ex.report().c1);
    }
  }
  Json j = header(cfg, l);
  j["report"] = to_json(rep);
  emit(cfg, "validate", j, nullptr, out);
  if (!rep.valid()) {
    err << "validation failed: " << rep.offending << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_effective(const RunConfig& cfg, const Loaded& l, std::ostream& out, std::ostream& err) {
  checked(cfg, l);
  const int n_cell = cfg.n_cell > 0 ? cfg.n_cell : l.n_cell;
  const int n_slow = cfg.n_slow > 0 ? cfg.n_slow : l.n_slow;
  const CellGrid grid(l.cs.d(), n_cell);
  const CellSolverOptions opts = cell_options(cfg);
  CrossCheckPolicy policy;
  policy.enforce = false;
  policy.tolerance = cfg.cross_check_tolerance;
  const HomogenizedCoefficients hc = homogenize(l.cs, n_slow, grid, policy, opts);
  Json j = header(cfg, l);
  j["cross_check_tolerance"] = number_json(cfg.cross_check_tolerance);
  j["coefficients"] = to_json(hc);
  emit(cfg, "effective", j, nullptr, out);
  if (cfg.export_correctors && !cfg.out_dir.empty()) {
    Json c = Json::array();
    for (const auto& x : hc.x_nodes) c.push_back(to_json(solve_correctors(l.cs, x, grid, opts)));
    write_text(fs::path(cfg.out_dir) / "correctors.json", dump(c));
  }
  if (hc.max_discrepancy() > cfg.cross_check_tolerance) {
    err << "cross-check failed: max discrepancy " << hc.max_discrepancy() << " exceeds "
        << cfg.cross_check_tolerance << "\n";
    return kExitCrossCheck;
  }
  return kExitOk;
}

GridPlan grid_plan(const RunConfig& cfg) {
  GridPlan plan;
  plan.points_per_period = cfg.points_per_period;
  plan.n_phys = cfg.n_phys;
  plan.n_cell = cfg.n_cell;
  plan.cell = cell_options(cfg);
  plan.cross_check.tolerance = cfg.cross_check_tolerance;
  plan.fd_probe = cfg.fd_probe;
  return plan;
}

void export_first_leg(const RunConfig& cfg, const Loaded& l, const GridPlan& plan, double eps) {
  if (!cfg.export_matrices || cfg.out_dir.empty()) return;
  const LegGrids g = plan_leg(l.cs, plan, eps);
  fs::create_directories(cfg.out_dir);
  write_matrix_market(fs::path(cfg.out_dir) / "H_eps.mtx", assemble_H_eps(l.cs, g.torus, g.eps).matrix);
  write_matrix_market(fs::path(cfg.out_dir) / "G_eps.mtx", assemble_G_eps(l.cs, g.torus, g.eps).matrix);
}

int cmd_converge(const RunConfig& cfg, const Loaded& l, std::ostream& out, std::ostream& err) {
  checked(cfg, l);
  const std::vector<double> eps = eps_list(cfg, l);
  const std::vector<ScalarField> f = rhs_fields(cfg, l);
  const GridPlan plan = grid_plan(cfg);
  const ConvergenceReport rep =
      run_resolvent_convergence(l.cs, plan, cfg.lambda, f, eps, rhs_id(cfg, l));
  export_first_leg(cfg, l, plan, eps.front());
  Json j = header(cfg, l);
  j["points_per_period"] = cfg.points_per_period;
  j["report"] = to_json(rep);
  const std::string csv = convergence_csv(rep);
  emit(cfg, "converge", j, &csv, out);
  for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
  if (!rep.passed()) {
    err << "convergence criteria not met (rate_L2 = " << rep.rate_L2 << ", rate_W1 = " << rep.rate_W1
        << ")\n";
    return kExitCriteria;
  }
  return kExitOk;
}

int cmd_spectrum(const RunConfig& cfg, const Loaded& l, std::ostream& out, std::ostream& err) {
  if (cfg.k < 1 || cfg.k > 10) throw ProblemError("k must be between 1 and 10");
  checked(cfg, l);
  const std::vector<double> eps = eps_list(cfg, l);
  const GridPlan plan = grid_plan(cfg);
  const SpectrumReport rep = run_spectrum_convergence(l.cs, plan, cfg.k, eps);
  export_first_leg(cfg, l, plan, eps.front());
  Json j = header(cfg, l);
  j["points_per_period"] = cfg.points_per_period;
  j["report"] = to_json(rep);
  const std::string csv = spectrum_csv(rep);
  emit(cfg, "spectrum", j, &csv, out);
  if (!rep.passed()) {
    err << "spectral gaps did not shrink by the required factor\n";
    return kExitCriteria;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Numerical homogenization of periodic elliptic systems"};
  app.set_version_flag("--version", "homog 1.0");
  app.add_option("command", cfg.command, "validate | effective | converge | spectrum")
      ->required()
      ->check(CLI::IsMember({"validate", "effective", "converge", "spectrum"}));
  auto* config = app.add_option("--config", cfg.config_path, "problem file (.toml or .json)");
  auto* preset = app.add_option("--preset", cfg.preset, "bundled problem name");
  config->excludes(preset);
  app.add_option("--out", cfg.out_dir, "directory for report files");
  app.add_option("--format", cfg.format, "stdout format for converge/spectrum")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", cfg.seed, "probe sampling seed");
  app.add_option("--n-cell", cfg.n_cell, "cell grid points per axis");
  app.add_option("--n-slow", cfg.n_slow, "slow grid nodes per axis (effective)");
  app.add_option("--points-per-period", cfg.points_per_period, "torus points per fast period");
  app.add_option("--n-phys", cfg.n_phys, "fixed torus points per axis");
  auto* periods = app.add_option("--periods", cfg.periods, "fast periods per leg, eps = L / N");
  auto* eps = app.add_option("--eps", cfg.eps, "eps values (L / eps must be an integer)");
  periods->excludes(eps);
  std::vector<double> lambda;
  app.add_option("--lambda", lambda, "spectral parameter: re [im]")->expected(1, 2)->allow_extra_args(false);
  app.add_option("--k", cfg.k, "number of eigenvalues (1..10)");
  app.add_option("--rhs", cfg.rhs, "right-hand side expression per component");
  app.add_option("--cell-backend", cfg.cell_backend, "auto | cg | direct")
      ->check(CLI::IsMember({"auto", "cg", "direct"}));
  bool no_fd = false;
  app.add_option("--cell-accept-residual", cfg.cell_accept_residual,
                 "largest accepted relative residual of a cell solve");
  app.add_flag("--no-fd-probe", no_fd, "skip the grid-doubling error probe");
  app.add_option("--cross-check-tolerance", cfg.cross_check_tolerance, "form discrepancy tolerance");
  app.add_flag("--export-matrices", cfg.export_matrices, "write H_eps.mtx and G_eps.mtx (first leg)");
  app.add_flag("--export-correctors", cfg.export_correctors, "write correctors.json (effective)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "homog 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kExitUsage;
  }
  if (cfg.config_path.empty() == cfg.preset.empty()) {
    err << "usage error: exactly one of --config or --preset is required\n";
    return kExitUsage;
  }
  cfg.fd_probe = !no_fd;
  if (!lambda.empty()) cfg.lambda = Complex(lambda[0], lambda.size() > 1 ? lambda[1] : 0.0);

  try {
    const Loaded l = load(cfg);
    merge_run_table(cfg, l.run, app);
    if (cfg.format != "csv" && cfg.format != "json") throw ProblemError("format must be csv or json");
    if (cfg.command == "validate") return cmd_validate(cfg, l, out, err);
    if (cfg.command == "effective") return cmd_effective(cfg, l, out, err);
    if (cfg.command == "converge") return cmd_converge(cfg, l, out, err);
    return cmd_spectrum(cfg, l, out, err);
  } catch (const ValidationFailed& ex) {
    err << ex.what() << "\n";
    return kExitValidation;
  } catch (const CrossCheckFailed& ex) {
    err << "cross-check failed: " << ex.what() << "\n";
    return kExitCrossCheck;
  } catch (const SolverDiverged& ex) {
    err << "solver failure: " << ex.what() << "\n";
    return kExitSolver;
  } catch (const SolvabilityViolated& ex) {
    err << "solver failure: " << ex.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace homog
