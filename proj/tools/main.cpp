// Command-line front end: forward map evaluation, solvers, the convex
// pipeline, landscape scans and the experiment runner.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calderon/convex.hpp"
#include "calderon/errors.hpp"
#include "calderon/experiments.hpp"
#include "calderon/forward.hpp"
#include "calderon/io.hpp"
#include "calderon/landscape.hpp"
#include "calderon/solvers.hpp"

namespace {

using namespace calderon;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw invalid_input_error("expected a comma-separated list of numbers");
  return values;
}

struct GlobalArgs {
  std::uint64_t seed = 20250808;
  std::string out_dir = "out";
  std::string format = "csv";
  int trials = 0;
  bool full_scale = false;
  unsigned threads = 0;
};

RadialGeometry make_geometry(int n, const std::string& radii) {
  if (!radii.empty()) return RadialGeometry(parse_list(radii));
  return RadialGeometry(n);
}

void print_measurements(const MeasurementVector& y, const std::string& format) {
  if (format == "json") {
    std::cout << to_json(y) << "\n";
  } else {
    std::cout << "j,lambda\n";
    for (int j = 0; j < y.size(); ++j)
      std::cout << (j + 1) << "," << format_double(y[j]) << "\n";
  }
}

void write_or_print_report(const SolveReport& report, const GlobalArgs& global,
                           bool trajectory) {
  std::cout << to_json(report) << "\n";
  if (trajectory && !report.trajectory.empty()) {
    std::filesystem::create_directories(global.out_dir);
    trajectory_csv(report).write(std::filesystem::path(global.out_dir) /
                                 "trajectory.csv");
  }
}

int run(int argc, char** argv) {
  CLI::App app{"piecewise constant radial EIT workbench"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);

  GlobalArgs global;
  app.add_option("--seed", global.seed, "master seed");
  app.add_option("--out", global.out_dir, "output directory");
  app.add_option("--format", global.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--trials", global.trials, "trial count override");
  app.add_flag("--full-scale", global.full_scale, "paper-scale trial counts");
  app.add_option("--threads", global.threads, "worker threads (0 = auto)");

  // forward ------------------------------------------------------------
  auto* fwd = app.add_subcommand("forward", "evaluate the forward map");
  int fwd_n = 2, fwd_m = 4;
  std::string fwd_sigma = "1,1", fwd_radii;
  fwd->add_option("--n", fwd_n, "annulus count");
  fwd->add_option("--m", fwd_m, "measurement count");
  fwd->add_option("--sigma", fwd_sigma, "conductivity values")->required();
  fwd->add_option("--radii", fwd_radii, "explicit radii r_0..r_n");
  fwd->callback([&]() {
    const RadialGeometry geom = make_geometry(fwd_n, fwd_radii);
    const Conductivity sigma(parse_list(fwd_sigma));
    print_measurements(forward_map(geom, sigma, fwd_m), global.format);
  });

  // jacobian -----------------------------------------------------------
  auto* jac = app.add_subcommand("jacobian", "analytic Jacobian of the forward map");
  int jac_n = 2, jac_m = 4;
  std::string jac_sigma = "1,1", jac_radii;
  jac->add_option("--n", jac_n, "annulus count");
  jac->add_option("--m", jac_m, "measurement count");
  jac->add_option("--sigma", jac_sigma, "conductivity values")->required();
  jac->add_option("--radii", jac_radii, "explicit radii");
  jac->callback([&]() {
    const RadialGeometry geom = make_geometry(jac_n, jac_radii);
    const Conductivity sigma(parse_list(jac_sigma));
    const DenseMatrix j = analytic_jacobian(geom, sigma, jac_m);
    for (int r = 0; r < j.rows(); ++r) {
      for (int c = 0; c < j.cols(); ++c)
        std::cout << (c ? "," : "") << format_double(j(r, c));
      std::cout << "\n";
    }
  });

  // solve --------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "run a solver");
  solve->require_subcommand(1);
  std::string solve_sigma_true, solve_y, solve_box = "0.5,1.5";
  int solve_m = 0;
  bool solve_traj = false;
  double noise_std = 0.0;
  solve->add_option("--sigma-true", solve_sigma_true, "true conductivity (generates y)");
  solve->add_option("--y", solve_y, "measurements (overrides --sigma-true)");
  solve->add_option("--box", solve_box, "prior bounds a,b");
  solve->add_option("--m", solve_m, "measurement count (default n for newton)");
  solve->add_flag("--trajectory", solve_traj, "write trajectory.csv to --out");
  solve->add_option("--noise-std", noise_std, "gaussian noise added to generated y");

  auto make_problem = [&](int m_default_n) {
    if (solve_sigma_true.empty() && solve_y.empty())
      throw invalid_input_error("need --sigma-true or --y");
    std::vector<double> truth =
        solve_sigma_true.empty() ? std::vector<double>{} : parse_list(solve_sigma_true);
    const int n = truth.empty() ? 0 : static_cast<int>(truth.size());
    MeasurementVector y;
    RadialGeometry geom(std::max(n, 1));
    if (!solve_y.empty()) {
      y = MeasurementVector(parse_list(solve_y));
      if (n == 0) geom = RadialGeometry(m_default_n > 0 ? m_default_n : y.size());
    } else {
      const int m = solve_m > 0 ? solve_m : (m_default_n > 0 ? m_default_n : n);
      y = forward_map(geom, Conductivity(truth), m);
      if (noise_std > 0.0) {
        CounterRng rng = derive_rng(global.seed, 0, "cli-noise");
        std::vector<double> z = y.values();
        for (double& v : z) v += rng.gaussian(0.0, noise_std);
        y = MeasurementVector(z);
      }
    }
    const std::vector<double> box_vals = parse_list(solve_box);
    if (box_vals.size() != 2) throw invalid_input_error("--box expects a,b");
    return std::tuple<RadialGeometry, MeasurementVector, BoxPrior>(
        geom, y, BoxPrior(box_vals[0], box_vals[1]));
  };

  auto* newton = solve->add_subcommand("newton", "trust-region root finding, m = n");
  newton->callback([&]() {
    auto [geom, y, box] = make_problem(0);
    CounterRng rng = derive_rng(global.seed, 0, "cli-newton");
    NewtonOptions opts;
    opts.record_trajectory = solve_traj;
    write_or_print_report(newton_root(geom, y, box, rng, opts), global, solve_traj);
  });

  auto* lsq = solve->add_subcommand("lsq", "interior-point least squares, m >= n");
  lsq->callback([&]() {
    auto [geom, y, box] = make_problem(0);
    CounterRng rng = derive_rng(global.seed, 0, "cli-lsq");
    LsqOptions opts;
    opts.record_trajectory = solve_traj;
    write_or_print_report(lsq_box(geom, y, box, rng, opts), global, solve_traj);
  });

  auto* tikhonov = solve->add_subcommand("tikhonov", "oracle-selected Tikhonov sweep");
  tikhonov->callback([&]() {
    if (solve_sigma_true.empty())
      throw invalid_input_error("tikhonov needs --sigma-true for oracle selection");
    auto [geom, y, box] = make_problem(0);
    const Conductivity truth(parse_list(solve_sigma_true));
    CounterRng rng = derive_rng(global.seed, 0, "cli-tikhonov");
    const TikhonovSweep sweep = tikhonov_sweep(
        geom, y, box, default_tikhonov_config(box, geom.annulus_count()), truth, rng);
    std::cout << "{\"best_lambda\":" << format_double(sweep.best_lambda)
              << ",\"best_error_inf\":" << format_double(sweep.best_error_inf)
              << ",\"least_squares_error_inf\":"
              << format_double(sweep.least_squares_error_inf)
              << ",\"best\":" << to_json(sweep.best) << "}\n";
  });

  // convex ---------------------------------------------------------------
  auto* convex = app.add_subcommand("convex", "weight estimation and the convex program");
  convex->require_subcommand(1);

  auto* estc = convex->add_subcommand("estimate-c", "estimate the weight vector");
  int estc_n = 2, estc_k = 5, estc_mstart = 0;
  std::string estc_box = "0.5,1.5", estc_mps;
  estc->add_option("--n", estc_n, "annulus count");
  estc->add_option("--k", estc_k, "grid points per axis");
  estc->add_option("--box", estc_box, "prior bounds a,b");
  estc->add_option("--m-start", estc_mstart, "first m to try (default n)");
  estc->add_option("--export-mps", estc_mps, "write the (first) estimation LP as MPS");
  estc->callback([&]() {
    const std::vector<double> box_vals = parse_list(estc_box);
    const BoxPrior box(box_vals[0], box_vals[1]);
    const RadialGeometry geom(estc_n);
    const GridSpec grid(estc_k, box);
    const int m_start = estc_mstart > 0 ? estc_mstart : estc_n;
    if (!estc_mps.empty()) {
      const CEstimationLp built = build_c_estimation_lp(geom, box, grid, m_start);
      write_text_file(estc_mps, lp::write_mps(built.lp, "CESTIMATION"));
    }
    EstimateOptions opts;
    opts.threads = global.threads;
    std::cout << to_json(estimate_c(geom, box, grid, m_start, opts)) << "\n";
  });

  auto* csolve = convex->add_subcommand("solve", "solve P_c(y) by interior point");
  std::string csolve_c, csolve_sigma_true, csolve_y, csolve_box = "0.5,1.5";
  int csolve_m = 0;
  double csolve_shift = 0.0;
  csolve->add_option("--c", csolve_c, "weight vector")->required();
  csolve->add_option("--sigma-true", csolve_sigma_true, "true conductivity (generates y)");
  csolve->add_option("--y", csolve_y, "measurements");
  csolve->add_option("--m", csolve_m, "measurement count when generating y");
  csolve->add_option("--box", csolve_box, "prior bounds a,b");
  csolve->add_option("--shift", csolve_shift, "add delta*1 to y (noise allowance)");
  csolve->callback([&]() {
    const std::vector<double> c = parse_list(csolve_c);
    const std::vector<double> box_vals = parse_list(csolve_box);
    const BoxPrior box(box_vals[0], box_vals[1]);
    MeasurementVector y;
    RadialGeometry geom(static_cast<int>(c.size()));
    if (!csolve_y.empty()) {
      y = MeasurementVector(parse_list(csolve_y));
    } else if (!csolve_sigma_true.empty()) {
      const Conductivity truth(parse_list(csolve_sigma_true));
      y = forward_map(geom, truth, csolve_m > 0 ? csolve_m : static_cast<int>(c.size()));
    } else {
      throw invalid_input_error("need --sigma-true or --y");
    }
    if (csolve_shift != 0.0) {
      std::vector<double> shifted = y.values();
      for (double& v : shifted) v += csolve_shift;
      y = MeasurementVector(shifted);
    }
    std::cout << to_json(solve_pc(geom, box, c, y)) << "\n";
  });

  auto* cval = convex->add_subcommand("validate", "universality sweep for a weight");
  std::string cval_c, cval_box = "0.5,1.5";
  int cval_m = 0, cval_trials = 100;
  cval->add_option("--c", cval_c, "weight vector")->required();
  cval->add_option("--m", cval_m, "measurement count")->required();
  cval->add_option("--box", cval_box, "prior bounds a,b");
  cval->add_option("--validate-trials", cval_trials, "number of random unknowns");
  cval->callback([&]() {
    const std::vector<double> c = parse_list(cval_c);
    const std::vector<double> box_vals = parse_list(cval_box);
    const BoxPrior box(box_vals[0], box_vals[1]);
    const RadialGeometry geom(static_cast<int>(c.size()));
    const int trials = global.trials > 0 ? global.trials : cval_trials;
    const UniversalityReport report =
        validate_weight(geom, box, c, cval_m, trials, global.seed, global.threads);
    std::filesystem::create_directories(global.out_dir);
    CsvTable hist({"error", "count"});
    for (std::size_t i = 0; i < report.histogram.bin_lo.size(); ++i)
      hist.add_row(std::vector<double>{report.histogram.bin_lo[i],
                                       static_cast<double>(report.histogram.counts[i])});
    hist.write(std::filesystem::path(global.out_dir) / "validate_histogram.csv");
    std::cout << "{\"trials\":" << report.trials
              << ",\"failure_fraction\":" << format_double(report.failure_fraction)
              << ",\"median_error\":" << format_double(report.median_error)
              << ",\"max_error\":" << format_double(report.max_error) << "}\n";
  });

  // landscape ------------------------------------------------------------
  auto* landscape = app.add_subcommand("landscape", "determinant scans and traces");
  landscape->require_subcommand(1);

  auto* scan = landscape->add_subcommand("scan", "signed determinant scan over the grid");
  int scan_n = 2, scan_k = 5;
  std::string scan_box = "0.5,1.5";
  scan->add_option("--n", scan_n, "annulus count");
  scan->add_option("--k", scan_k, "grid points per axis");
  scan->add_option("--box", scan_box, "prior bounds a,b");
  scan->callback([&]() {
    const std::vector<double> box_vals = parse_list(scan_box);
    const GridSpec grid(scan_k, BoxPrior(box_vals[0], box_vals[1]));
    const RadialGeometry geom(scan_n);
    std::vector<ScanRow> rows;
    const ScanReport report = scan_determinant_signs(geom, grid, scan_n,
                                                     global.threads, &rows);
    std::filesystem::create_directories(global.out_dir);
    std::vector<std::string> header;
    for (int i = 1; i <= scan_n; ++i) header.push_back("sigma_" + std::to_string(i));
    header.insert(header.end(), {"det_full", "det_sub", "det_Mk_min",
                                 "sigma_min_full", "sigma_min_sub"});
    CsvTable table(header);
    for (const ScanRow& row : rows) {
      std::vector<double> cells = row.sigma;
      cells.insert(cells.end(), {row.det_full, row.det_sub, row.det_mk_min,
                                 row.sigma_min_full, row.sigma_min_sub});
      table.add_row(cells);
    }
    table.write(std::filesystem::path(global.out_dir) / "scan.csv");
    std::cout << "{\"sign_violations\":" << report.sign_violations
              << ",\"min_det_full\":" << format_double(report.min_signed_det_full)
              << ",\"min_sigma_min_full\":" << format_double(report.min_sigma_min_full)
              << "}\n";
  });

  auto* trace1d = landscape->add_subcommand("trace-1d", "1-D objective and curvature");
  std::string t1_range = "0.5,3.0";
  double t1_sigma = 1.0;
  int t1_m = 1, t1_samples = 401;
  trace1d->add_option("--sigma-true", t1_sigma, "true conductivity");
  trace1d->add_option("--m", t1_m, "measurement count");
  trace1d->add_option("--range", t1_range, "sample range lo,hi");
  trace1d->add_option("--samples", t1_samples, "sample count");
  trace1d->callback([&]() {
    const std::vector<double> range = parse_list(t1_range);
    const RadialGeometry geom(1);
    const auto samples = trace_1d_landscape(geom, Conductivity(1, t1_sigma), t1_m,
                                            range[0], range[1], t1_samples);
    std::filesystem::create_directories(global.out_dir);
    CsvTable table({"sigma", "f", "f2"});
    for (const auto& s : samples) table.add_row(std::vector<double>{s.sigma, s.f, s.f2});
    table.write(std::filesystem::path(global.out_dir) / "landscape_1d.csv");
  });

  auto* curves = landscape->add_subcommand("curves", "implicit level-set curves, n = 2");
  std::string cv_sigma = "1,1", cv_range = "0.8,1.3";
  int cv_steps = 400;
  curves->add_option("--sigma-true", cv_sigma, "true conductivity");
  curves->add_option("--range", cv_range, "sigma_1 interval lo,hi");
  curves->add_option("--steps", cv_steps, "continuation steps");
  curves->callback([&]() {
    const std::vector<double> range = parse_list(cv_range);
    const RadialGeometry geom(2);
    const auto samples = trace_implicit_curves(geom, Conductivity(parse_list(cv_sigma)),
                                               range[0], range[1], cv_steps);
    std::filesystem::create_directories(global.out_dir);
    CsvTable table({"sigma_1", "g", "h"});
    for (const auto& s : samples) table.add_row(std::vector<double>{s.sigma1, s.g, s.h});
    table.write(std::filesystem::path(global.out_dir) / "curves.csv");
  });

  // experiment -----------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "run a paper experiment");
  std::string exp_name;
  int exp_n = 0, exp_m = 0, exp_k = 5;
  std::string exp_box = "0.5,1.5", exp_noise = "";
  double exp_noise_param = 0.0;
  experiment->add_option("name", exp_name, "experiment name")->required();
  experiment->add_option("--n", exp_n, "annulus count override");
  experiment->add_option("--m", exp_m, "measurement count override");
  experiment->add_option("--k", exp_k, "grid points per axis");
  experiment->add_option("--box", exp_box, "prior bounds a,b");
  experiment->add_option("--noise", exp_noise, "none|uniform|gaussian")
      ->check(CLI::IsMember({"", "none", "uniform", "gaussian"}));
  experiment->add_option("--noise-param", exp_noise_param, "noise half-width / stddev");
  experiment->callback([&]() {
    ExperimentConfig cfg;
    cfg.experiment = exp_name;
    cfg.n = exp_n;
    cfg.m = exp_m;
    const std::vector<double> box_vals = parse_list(exp_box);
    cfg.box = BoxPrior(box_vals[0], box_vals[1]);
    cfg.grid_k = exp_k;
    cfg.trials = global.trials;
    cfg.seed = global.seed;
    cfg.out_dir = global.out_dir;
    cfg.format = global.format;
    cfg.full_scale = global.full_scale;
    cfg.threads = global.threads;
    if (!exp_noise.empty() && exp_noise != "none") {
      cfg.noise_explicit = true;
      cfg.noise.kind = exp_noise == "uniform" ? NoiseModel::Kind::uniform
                                              : NoiseModel::Kind::gaussian;
      cfg.noise.param = exp_noise_param;
    }
    const RunManifest manifest = run_experiment(cfg);
    emit(manifest, cfg.format);
    std::cout << "wrote " << (cfg.out_dir / "manifest.json").string() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError&) {
    return exit_usage;
  } catch (const calderon::invalid_input_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const calderon::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
}
