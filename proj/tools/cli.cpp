#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "civqr/diagnostics.hpp"
#include "civqr/inference.hpp"
#include "civqr/io.hpp"
#include "civqr/model.hpp"
#include "civqr/optim.hpp"
#include "civqr/parallel.hpp"
#include "civqr/rng.hpp"
#include "civqr/simlab.hpp"
#include "civqr/version.hpp"

namespace civqr::cli {
namespace {

using nlohmann::json;

// Stream index reserved for the point fit in commands that also bootstrap,
// so its randomness can never collide with a replicate substream (those use
// the replicate index, which is always far below this).
constexpr std::uint64_t kPointFitStream = std::numeric_limits<std::uint64_t>::max();

struct DataArgs {
  std::string data;
  std::string y = "y";
  std::string delta = "delta";
  std::vector<std::string> z;
  std::vector<std::string> w;
  bool intercept_z = false;
  bool intercept_w = false;
};

struct OptimArgs {
  std::vector<double> box_lower;
  std::vector<double> box_upper;
  int starts = 100;
  int max_iters = 500;
  double f_tol = 1e-8;
  double x_tol = 1e-6;
};

void add_data_flags(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data, "input CSV file")->required();
  cmd->add_option("--y", a.y, "duration column name");
  cmd->add_option("--delta", a.delta, "event indicator column name");
  cmd->add_option("--z", a.z, "regressor column names, comma separated")
      ->delimiter(',')
      ->required();
  cmd->add_option("--w", a.w, "instrument column names, comma separated")
      ->delimiter(',')
      ->required();
  cmd->add_flag("--intercept-z", a.intercept_z, "prepend a constant regressor");
  cmd->add_flag("--intercept-w", a.intercept_w, "prepend a constant instrument");
}

void add_optim_flags(CLI::App* cmd, OptimArgs& a, bool box_required) {
  auto* lo = cmd->add_option("--box-lower", a.box_lower,
                             "search box lower corner, comma separated")
                 ->delimiter(',');
  auto* hi = cmd->add_option("--box-upper", a.box_upper,
                             "search box upper corner, comma separated")
                 ->delimiter(',');
  if (box_required) {
    lo->required();
    hi->required();
  }
  cmd->add_option("--starts", a.starts, "number of optimiser starts");
  cmd->add_option("--max-iters", a.max_iters, "iteration cap per start");
  cmd->add_option("--f-tol", a.f_tol, "objective spread stopping tolerance");
  cmd->add_option("--x-tol", a.x_tol, "simplex diameter stopping tolerance");
}

ColumnSpec make_column_spec(const DataArgs& a) {
  ColumnSpec spec;
  spec.y_col = a.y;
  spec.delta_col = a.delta;
  spec.z_cols = a.z;
  spec.w_cols = a.w;
  spec.intercept_z = a.intercept_z;
  spec.intercept_w = a.intercept_w;
  return spec;
}

OptimConfig make_optim_config(const OptimArgs& a, std::uint64_t seed) {
  OptimConfig cfg;
  cfg.box_lower = a.box_lower;
  cfg.box_upper = a.box_upper;
  cfg.n_starts = a.starts;
  cfg.max_iters = a.max_iters;
  cfg.f_tol = a.f_tol;
  cfg.x_tol = a.x_tol;
  cfg.seed = seed;
  return cfg;
}

// Coefficient labels after the intercept flag is applied.
std::vector<std::string> regressor_names(const DataArgs& a) {
  std::vector<std::string> names;
  if (a.intercept_z) names.push_back("const");
  names.insert(names.end(), a.z.begin(), a.z.end());
  return names;
}

// Accepts "0.2,0.4,0.6" or "0.25..0.75" (the range form steps by 0.1).
std::vector<double> parse_quantiles(const std::string& text) {
  const auto bad = [&text]() {
    return std::invalid_argument("could not parse quantile list '" + text + "'");
  };
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    double lo = 0.0, hi = 0.0;
    try {
      lo = std::stod(text.substr(0, dots));
      hi = std::stod(text.substr(dots + 2));
    } catch (const std::exception&) {
      throw bad();
    }
    if (!(lo <= hi)) throw bad();
    const int steps = static_cast<int>(std::lround((hi - lo) / 0.1));
    for (int i = 0; i <= steps; ++i) {
      // snap accumulated float drift back to the decimal the user wrote
      out.push_back(std::round((lo + 0.1 * i) * 1e10) / 1e10);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto piece = text.substr(pos, comma == std::string::npos
                                              ? std::string::npos
                                              : comma - pos);
      try {
        std::size_t used = 0;
        const double v = std::stod(piece, &used);
        if (used != piece.size()) throw bad();
        out.push_back(v);
      } catch (const std::invalid_argument&) {
        throw bad();
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) throw bad();
  for (const double u : out) (void)QuantileLevel(u);  // range check
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("failed to write output file '" + path + "'");
}

void write_report(const json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json data_config(const DataArgs& a) {
  return json{{"data", a.data},
              {"y", a.y},
              {"delta", a.delta},
              {"z", a.z},
              {"w", a.w},
              {"intercept_z", a.intercept_z},
              {"intercept_w", a.intercept_w}};
}

void merge_optim_config(json& cfg, const OptimArgs& a) {
  cfg["box_lower"] = a.box_lower;
  cfg["box_upper"] = a.box_upper;
  cfg["starts"] = a.starts;
  cfg["max_iters"] = a.max_iters;
  cfg["f_tol"] = a.f_tol;
  cfg["x_tol"] = a.x_tol;
}

json fit_result_json(const FitResult& fr) {
  int converged = 0;
  for (const auto& s : fr.optim.starts) converged += s.converged ? 1 : 0;
  return json{{"estimate", fr.beta_hat},
              {"objective_value", fr.objective_value},
              {"clipping_fired", fr.clipping_fired},
              {"converged_starts", converged}};
}

json replicate_matrix(const BootstrapResult& br) {
  json rows = json::array();
  for (std::size_t r = 0; r < br.b; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < br.k; ++c) row.push_back(br.rep(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

json finish_report(const char* command, std::uint64_t seed, json config,
                   json result, std::chrono::steady_clock::time_point t0) {
  return json{{"command", command},
              {"version", kVersion},
              {"seed", seed},
              {"config", std::move(config)},
              {"result", std::move(result)},
              {"wall_seconds", elapsed_seconds(t0)}};
}

int cmd_fit(const DataArgs& da, const OptimArgs& oa, double u_flag,
            const std::string& quantiles_text, std::size_t boot_b, double level,
            const std::string& plot_out, std::uint64_t seed, unsigned threads,
            const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = load_csv(da.data, make_column_spec(da));
  const unsigned n_threads = resolve_threads(threads);

  json config = data_config(da);
  merge_optim_config(config, oa);
  config["seed"] = seed;
  config["threads"] = threads;

  json result;
  if (!quantiles_text.empty()) {
    const std::vector<double> levels = parse_quantiles(quantiles_text);
    config["quantiles"] = quantiles_text;
    config["boot_b"] = boot_b;
    config["level"] = level;
    config["plot_out"] = plot_out;

    const std::vector<std::string> names = regressor_names(da);
    std::string plot = "u,coefficient,estimate,lower,upper\n";
    json sweep = json::array();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      // each level gets its own substreams so the sweep is order-insensitive
      FitConfig fc{QuantileLevel(levels[i]),
                   make_optim_config(oa, derive_seed(seed, i, 1))};
      const FitResult fr = fit(data, fc, n_threads);
      const BootstrapResult br =
          bootstrap(data, fc, boot_b, level, derive_seed(seed, i, 2), n_threads);

      json entry = fit_result_json(fr);
      entry["u"] = levels[i];
      entry["ci_lower"] = br.ci_lower;
      entry["ci_upper"] = br.ci_upper;
      sweep.push_back(std::move(entry));

      for (std::size_t c = 0; c < data.k(); ++c) {
        plot += format_double(levels[i]) + "," + names[c] + "," +
                format_double(fr.beta_hat[c]) + "," +
                format_double(br.ci_lower[c]) + "," +
                format_double(br.ci_upper[c]) + "\n";
      }
    }
    result["sweep"] = std::move(sweep);
    if (!plot_out.empty()) write_text_file(plot_out, plot);
  } else {
    config["u"] = u_flag;
    FitConfig fc{QuantileLevel(u_flag), make_optim_config(oa, seed)};
    result = fit_result_json(fit(data, fc, n_threads));
  }

  write_report(finish_report("fit", seed, std::move(config), std::move(result), t0),
               out);
  return 0;
}

int cmd_bootstrap(const DataArgs& da, const OptimArgs& oa, double u,
                  std::size_t boot_b, double level, std::uint64_t seed,
                  unsigned threads, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = load_csv(da.data, make_column_spec(da));
  const unsigned n_threads = resolve_threads(threads);

  json config = data_config(da);
  merge_optim_config(config, oa);
  config["u"] = u;
  config["boot_b"] = boot_b;
  config["level"] = level;
  config["seed"] = seed;
  config["threads"] = threads;

  FitConfig fc{QuantileLevel(u),
               make_optim_config(oa, derive_seed(seed, kPointFitStream, 0))};
  const FitResult fr = fit(data, fc, n_threads);
  const BootstrapResult br = bootstrap(data, fc, boot_b, level, seed, n_threads);

  json result = fit_result_json(fr);
  result["b"] = br.b;
  result["level"] = br.level;
  result["ci_lower"] = br.ci_lower;
  result["ci_upper"] = br.ci_upper;
  result["n_redraws"] = br.n_redraws;
  result["replicates"] = replicate_matrix(br);

  write_report(
      finish_report("bootstrap", seed, std::move(config), std::move(result), t0),
      out);
  return 0;
}

int cmd_simulate(int design, double u, std::uint64_t n, double lambda,
                 std::uint64_t reps, std::uint64_t seed, const OptimArgs& oa,
                 unsigned threads, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const unsigned n_threads = resolve_threads(threads);

  json config{{"design", design}, {"u", u},       {"n", n},
              {"lambda", lambda}, {"reps", reps}, {"seed", seed},
              {"threads", threads}};
  merge_optim_config(config, oa);

  SimDesign d;
  d.design_id = design;
  d.lambda = lambda;
  d.n = static_cast<std::size_t>(n);
  d.u = u;
  d.seed = seed;

  // the optimiser seed is a placeholder: replications derive their own
  FitConfig fc{QuantileLevel(u), make_optim_config(oa, 0)};

  const SimMetrics m =
      run_monte_carlo(d, static_cast<std::size_t>(reps), fc, n_threads);

  json result;
  result["metrics"] = json{{"design", design},
                           {"u", u},
                           {"n", n},
                           {"cens_pct", 100.0 * m.censored_fraction},
                           {"bias", m.bias},
                           {"rmse", m.rmse},
                           {"coverage", m.coverage}};
  result["detail"] = json{{"n_reps", m.n_reps},
                          {"failed_reps", m.failed_reps},
                          {"n_redraws", m.n_redraws}};

  write_report(
      finish_report("simulate", seed, std::move(config), std::move(result), t0),
      out);
  return 0;
}

int cmd_diagnose(const DataArgs& da, const OptimArgs& oa, double u,
                 std::uint64_t seed, const std::string& treat_name,
                 const std::string& instr_name, double grid_radius,
                 int grid_steps, double nu, double f_lower, unsigned threads,
                 const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = load_csv(da.data, make_column_spec(da));
  const unsigned n_threads = resolve_threads(threads);

  const auto column_index = [](const std::vector<std::string>& cols,
                               const std::string& name, bool intercept,
                               const char* role) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i + (intercept ? 1 : 0);
    throw std::invalid_argument(std::string(role) + " column '" + name +
                                "' is not among the mapped columns");
  };
  const std::size_t treat_col =
      column_index(da.z, treat_name, da.intercept_z, "treatment");
  const std::size_t instr_col =
      column_index(da.w, instr_name, da.intercept_w, "instrument");

  json config = data_config(da);
  merge_optim_config(config, oa);
  config["u"] = u;
  config["seed"] = seed;
  config["treat"] = treat_name;
  config["instr"] = instr_name;
  config["grid_radius"] = grid_radius;
  config["grid_steps"] = grid_steps;
  config["nu"] = nu;
  config["f_lower"] = f_lower;
  config["threads"] = threads;

  FitConfig fc{QuantileLevel(u), make_optim_config(oa, seed)};
  const FitResult fr = fit(data, fc, n_threads);

  const SupportReport sr = support_check(data, fr.beta_hat);
  const double takeup = relevance_check(data, treat_col, instr_col);

  RankOptions ro;
  ro.treat_col = treat_col;
  ro.instr_col = instr_col;
  ro.grid_radius = grid_radius;
  ro.grid_steps = grid_steps;
  ro.nu = nu;
  ro.f_lower = f_lower;
  ro.center = rank_center_from_fit(data, fr.beta_hat, treat_col);
  const RankReport rr = rank_condition_check(data, QuantileLevel(u), ro);

  json result;
  result["fit"] = fit_result_json(fr);
  result["support"] = json{
      {"c_bar", std::isfinite(sr.c_bar) ? json(sr.c_bar) : json(nullptr)},
      {"pass", sr.pass},
      {"n_violations", sr.violating_rows.size()},
      {"violating_rows", sr.violating_rows}};
  result["relevance"] = json{{"takeup_contrast", takeup}};
  result["rank"] = json{
      {"min_abs_det", rr.min_abs_det},
      {"direction_consistent", rr.direction_consistent},
      {"center", {rr.center.first, rr.center.second}},
      {"bandwidths", {rr.bandwidths.first, rr.bandwidths.second}},
      {"cond_prob", rr.cond_prob},
      {"cell_skipped", rr.cell_skipped},
      {"n_in_region", rr.n_in_region},
      {"n_grid", rr.grid.size()},
      {"determinants", rr.determinants},
      {"warnings", rr.warnings}};

  write_report(
      finish_report("diagnose", seed, std::move(config), std::move(result), t0),
      out);
  return 0;
}

int cmd_synth(std::uint64_t n, std::uint64_t seed, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = gen_noncompliance_sample(static_cast<std::size_t>(n), seed);

  // flatten to value columns; the fit maps them back with the intercept flags
  std::string text = "y,delta,treatment,age,offer\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Observation& row = data[i];
    text += format_double(row.y) + "," + (row.delta ? "1" : "0") + "," +
            format_double(row.z[1]) + "," + format_double(row.z[2]) + "," +
            format_double(row.w[1]) + "\n";
  }
  write_text_file(out, text);

  json config{{"n", n}, {"seed", seed}, {"out", out}};
  json result{{"path", out},
              {"n", data.n()},
              {"censored_fraction", data.censored_fraction()},
              {"columns", {"y", "delta", "treatment", "age", "offer"}}};
  write_report(
      finish_report("synth", seed, std::move(config), std::move(result), t0),
      "");
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"instrumental quantile regression for censored durations"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  DataArgs fit_data;
  OptimArgs fit_optim;
  double fit_u = std::numeric_limits<double>::quiet_NaN();
  std::string fit_quantiles;
  std::size_t fit_boot_b = 500;
  double fit_level = 0.95;
  std::string fit_plot_out;
  std::uint64_t fit_seed = 0;
  unsigned fit_threads = 0;
  std::string fit_out;
  auto* fit_cmd = app.add_subcommand("fit", "estimate coefficients at one or more quantile levels");
  add_data_flags(fit_cmd, fit_data);
  add_optim_flags(fit_cmd, fit_optim, true);
  auto* fit_u_opt = fit_cmd->add_option("--u", fit_u, "quantile level in (0,1)");
  auto* fit_q_opt = fit_cmd->add_option(
      "--quantiles", fit_quantiles,
      "levels to sweep: comma list or lo..hi range stepping by 0.1");
  fit_u_opt->excludes(fit_q_opt);
  fit_cmd->add_option("--boot-b", fit_boot_b, "bootstrap replicates per sweep level");
  fit_cmd->add_option("--level", fit_level, "confidence level for sweep intervals");
  fit_cmd->add_option("--plot-out", fit_plot_out, "plot-data CSV path (sweep only)");
  fit_cmd->add_option("--seed", fit_seed, "base seed for optimiser starts");
  fit_cmd->add_option("--threads", fit_threads, "worker threads (0 = auto)");
  fit_cmd->add_option("--out", fit_out, "report path (default stdout)");

  DataArgs boot_data;
  OptimArgs boot_optim;
  double boot_u = 0.0;
  std::size_t boot_b = 500;
  double boot_level = 0.95;
  std::uint64_t boot_seed = 0;
  unsigned boot_threads = 0;
  std::string boot_out;
  auto* boot_cmd = app.add_subcommand("bootstrap", "fit plus resampled percentile intervals");
  add_data_flags(boot_cmd, boot_data);
  add_optim_flags(boot_cmd, boot_optim, true);
  boot_cmd->add_option("--u", boot_u, "quantile level in (0,1)")->required();
  boot_cmd->add_option("--boot-b", boot_b, "bootstrap replicates");
  boot_cmd->add_option("--level", boot_level, "confidence level");
  boot_cmd->add_option("--seed", boot_seed, "base seed")->required();
  boot_cmd->add_option("--threads", boot_threads, "worker threads (0 = auto)");
  boot_cmd->add_option("--out", boot_out, "report path (default stdout)");

  int sim_design = 1;
  double sim_u = 0.5;
  std::uint64_t sim_n = 500;
  double sim_lambda = 0.1;
  std::uint64_t sim_reps = 100;
  std::uint64_t sim_seed = 0;
  OptimArgs sim_optim;
  sim_optim.box_lower = {0.0, 0.0, 0.0};
  sim_optim.box_upper = {1.0, 1.0, 1.0};
  unsigned sim_threads = 0;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of one benchmark design");
  sim_cmd->add_option("--design", sim_design, "benchmark design id (1, 2 or 3)")
      ->required()
      ->check(CLI::Range(1, 3));
  sim_cmd->add_option("--u", sim_u, "quantile level in (0,1)")->required();
  sim_cmd->add_option("--n", sim_n, "sample size per replication")->required();
  sim_cmd->add_option("--lambda", sim_lambda, "censoring rate")->required();
  sim_cmd->add_option("--reps", sim_reps, "number of replications")->required();
  sim_cmd->add_option("--seed", sim_seed, "base seed")->required();
  add_optim_flags(sim_cmd, sim_optim, false);
  sim_cmd->add_option("--threads", sim_threads, "worker threads (0 = auto)");
  sim_cmd->add_option("--out", sim_out, "report path (default stdout)");

  DataArgs diag_data;
  OptimArgs diag_optim;
  double diag_u = 0.0;
  std::uint64_t diag_seed = 0;
  std::string diag_treat;
  std::string diag_instr;
  double diag_radius = 0.25;
  int diag_steps = 11;
  double diag_nu = 0.05;
  double diag_f_lower = 0.0;
  unsigned diag_threads = 0;
  std::string diag_out;
  auto* diag_cmd = app.add_subcommand("diagnose", "identification checks around a fit");
  add_data_flags(diag_cmd, diag_data);
  add_optim_flags(diag_cmd, diag_optim, true);
  diag_cmd->add_option("--u", diag_u, "quantile level in (0,1)")->required();
  diag_cmd->add_option("--seed", diag_seed, "base seed for the fit");
  diag_cmd->add_option("--treat", diag_treat, "binary treatment column (among --z)")
      ->required();
  diag_cmd->add_option("--instr", diag_instr, "binary instrument column (among --w)")
      ->required();
  diag_cmd->add_option("--grid-radius", diag_radius, "half-width of the rank grid");
  diag_cmd->add_option("--grid-steps", diag_steps, "points per rank grid axis");
  diag_cmd->add_option("--nu", diag_nu, "quantile mismatch bound for the rank region");
  diag_cmd->add_option("--f-lower", diag_f_lower, "density floor for the rank region");
  diag_cmd->add_option("--threads", diag_threads, "worker threads (0 = auto)");
  diag_cmd->add_option("--out", diag_out, "report path (default stdout)");

  std::uint64_t synth_n = 800;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic program-evaluation CSV");
  synth_cmd->add_option("--n", synth_n, "number of rows");
  synth_cmd->add_option("--seed", synth_seed, "base seed")->required();
  synth_cmd->add_option("--out", synth_out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fit_cmd->parsed()) {
      if (fit_quantiles.empty() && fit_u_opt->count() == 0)
        throw std::invalid_argument("fit needs either --u or --quantiles");
      return cmd_fit(fit_data, fit_optim, fit_u, fit_quantiles, fit_boot_b,
                     fit_level, fit_plot_out, fit_seed, fit_threads, fit_out);
    }
    if (boot_cmd->parsed())
      return cmd_bootstrap(boot_data, boot_optim, boot_u, boot_b, boot_level,
                           boot_seed, boot_threads, boot_out);
    if (sim_cmd->parsed())
      return cmd_simulate(sim_design, sim_u, sim_n, sim_lambda, sim_reps,
                          sim_seed, sim_optim, sim_threads, sim_out);
    if (diag_cmd->parsed())
      return cmd_diagnose(diag_data, diag_optim, diag_u, diag_seed, diag_treat,
                          diag_instr, diag_radius, diag_steps, diag_nu,
                          diag_f_lower, diag_threads, diag_out);
    if (synth_cmd->parsed()) return cmd_synth(synth_n, synth_seed, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace civqr::cli
