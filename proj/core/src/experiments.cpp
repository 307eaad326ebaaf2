#include "calderon/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "calderon/convex.hpp"
#include "calderon/errors.hpp"
#include "calderon/forward.hpp"
#include "calderon/landscape.hpp"
#include "calderon/parallel.hpp"
#include "calderon/rng.hpp"
#include "calderon/solvers.hpp"
#include "calderon/svg.hpp"

namespace calderon {

double RunManifest::aggregate(const std::string& name) const {
  for (const auto& [key, value] : aggregates)
    if (key == name) return value;
  throw invalid_input_error("no aggregate named " + name);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "error-per-annulus", "mean-error-vs-n", "det-table",       "c-tables",
      "c-coefficients",    "handcrafted-c",   "sdp-vs-newton",   "sdp-vs-lsq-noisy",
      "tikhonov-vs-lsq",   "landscape-1d",    "implicit-curves",
  };
  return names;
}

namespace {

struct StageClock {
  RunManifest& manifest;

  template <class Fn>
  void run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    manifest.timings.push_back({name, elapsed.count()});
  }
};

std::vector<double> apply_noise(const MeasurementVector& y, const NoiseModel& noise,
                                CounterRng& rng) {
  std::vector<double> z = y.values();
  switch (noise.kind) {
    case NoiseModel::Kind::none: break;
    case NoiseModel::Kind::uniform:
      for (double& v : z) v += rng.uniform(-noise.param, noise.param);
      break;
    case NoiseModel::Kind::gaussian:
      for (double& v : z) v += rng.gaussian(0.0, noise.param);
      break;
  }
  return z;
}

std::vector<double> draw_box(CounterRng& rng, const BoxPrior& box, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = rng.uniform(box.a, box.b);
  return x;
}

double error_inf(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

int effective_trials(const ExperimentConfig& cfg, int desk, int full) {
  if (cfg.trials > 0) return cfg.trials;
  return cfg.full_scale ? full : desk;
}

// ---------------------------------------------------------------------------

RunManifest run_error_per_annulus(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n = cfg.n > 0 ? cfg.n : 10;
  const int trials = effective_trials(cfg, 100, 100);
  const RadialGeometry geom(n);

  manifest.trial_columns = {"trial", "restarts", "converged"};
  for (int i = 1; i <= n; ++i) manifest.trial_columns.push_back("abs_err_" + std::to_string(i));
  manifest.trial_rows.assign(static_cast<std::size_t>(trials), {});

  StageClock clock{manifest};
  clock.run("solve", [&]() {
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
      CounterRng truth_rng = derive_rng(cfg.seed, t, "truth");
      const std::vector<double> truth = draw_box(truth_rng, cfg.box, n);
      const MeasurementVector y = forward_map(geom, Conductivity(truth), n);
      CounterRng solver_rng = derive_rng(cfg.seed, t, "newton");
      const SolveReport report = newton_root(geom, y, cfg.box, solver_rng);

      std::vector<double>& row = manifest.trial_rows[t];
      row = {static_cast<double>(t), static_cast<double>(report.restarts),
             report.status == SolveReport::Status::converged ? 1.0 : 0.0};
      for (int i = 0; i < n; ++i)
        row.push_back(std::abs(report.iterate[static_cast<std::size_t>(i)] -
                               truth[static_cast<std::size_t>(i)]));
    }, cfg.threads);
  });

  std::vector<double> per_annulus(static_cast<std::size_t>(n), 0.0);
  double restart_count = 0.0, success = 0.0;
  for (const auto& row : manifest.trial_rows) {
    if (row[1] > 0.0) restart_count += 1.0;
    success += row[2];
    for (int i = 0; i < n; ++i) per_annulus[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i) + 3];
  }
  for (double& v : per_annulus) v /= trials;

  CsvTable table({"annulus", "mean_abs_error"});
  SvgSeries series{"mean |sigma_hat - sigma|", {}, {}};
  for (int i = 0; i < n; ++i) {
    table.add_row(std::vector<double>{static_cast<double>(i + 1), per_annulus[static_cast<std::size_t>(i)]});
    series.x.push_back(i + 1);
    series.y.push_back(per_annulus[static_cast<std::size_t>(i)]);
  }
  manifest.tables.emplace_back("per_annulus_error", std::move(table));
  manifest.figures.emplace_back(
      "per_annulus_error",
      render_line_chart({series}, "mean estimation error per annulus", "annulus i",
                        "mean abs error", false, true));

  manifest.aggregates = {
      {"success_fraction", success / trials},
      {"restart_fraction", restart_count / trials},
      {"error_ratio_inner_outer", per_annulus.back() / per_annulus.front()},
  };
  for (int i = 0; i < n; ++i)
    manifest.aggregates.emplace_back("mean_abs_error_" + std::to_string(i + 1),
                                     per_annulus[static_cast<std::size_t>(i)]);
  return manifest;
}

RunManifest run_mean_error_vs_n(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n_max = cfg.n > 0 ? cfg.n : 10;
  const int trials = effective_trials(cfg, 100, 100);

  manifest.trial_columns = {"n", "trial", "linf_error", "restarts", "converged"};
  manifest.trial_rows.assign(static_cast<std::size_t>(trials) * (n_max - 1), {});

  StageClock clock{manifest};
  clock.run("solve", [&]() {
    for (int n = 2; n <= n_max; ++n) {
      const RadialGeometry geom(n);
      parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        CounterRng truth_rng = derive_rng(cfg.seed, t, "truth-n" + std::to_string(n));
        const std::vector<double> truth = draw_box(truth_rng, cfg.box, n);
        const MeasurementVector y = forward_map(geom, Conductivity(truth), n);
        CounterRng solver_rng = derive_rng(cfg.seed, t, "newton-n" + std::to_string(n));
        const SolveReport report = newton_root(geom, y, cfg.box, solver_rng);
        manifest.trial_rows[static_cast<std::size_t>(n - 2) * trials + t] = {
            static_cast<double>(n), static_cast<double>(t),
            error_inf(report.iterate, truth), static_cast<double>(report.restarts),
            report.status == SolveReport::Status::converged ? 1.0 : 0.0};
      }, cfg.threads);
    }
  });

  CsvTable table({"n", "mean_linf_error", "success_fraction"});
  SvgSeries series{"mean sup-norm error", {}, {}};
  for (int n = 2; n <= n_max; ++n) {
    double err = 0.0, success = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto& row = manifest.trial_rows[static_cast<std::size_t>(n - 2) * trials + t];
      err += row[2];
      success += row[4];
    }
    err /= trials;
    success /= trials;
    table.add_row(std::vector<double>{static_cast<double>(n), err, success});
    series.x.push_back(n);
    series.y.push_back(err);
    manifest.aggregates.emplace_back("mean_linf_error_n" + std::to_string(n), err);
  }
  manifest.tables.emplace_back("mean_error_vs_n", std::move(table));
  manifest.figures.emplace_back(
      "mean_error_vs_n", render_line_chart({series}, "mean sup-norm error vs n",
                                           "number of annuli n", "mean error", false, true));
  return manifest;
}

RunManifest run_det_table(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n_max = cfg.n > 0 ? cfg.n : 6;

  CsvTable table({"n", "min_det_full", "min_det_sub", "min_det_mk", "min_sigma_min_full",
                  "min_sigma_min_sub", "sign_violations", "argmin_is_b1"});
  StageClock clock{manifest};
  for (int n = 2; n <= n_max; ++n) {
    clock.run("scan-n" + std::to_string(n), [&]() {
      const RadialGeometry geom(n);
      const GridSpec grid(cfg.grid_k, cfg.box);
      const ScanReport report = scan_determinant_signs(geom, grid, n, cfg.threads);
      bool argmin_b1 = true;
      for (double v : report.argmin_det_full)
        if (v != cfg.box.b) argmin_b1 = false;
      table.add_row(std::vector<double>{
          static_cast<double>(n), report.min_signed_det_full, report.min_signed_det_sub,
          report.min_signed_det_mk, report.min_sigma_min_full, report.min_sigma_min_sub,
          static_cast<double>(report.sign_violations), argmin_b1 ? 1.0 : 0.0});
      manifest.aggregates.emplace_back("min_det_full_n" + std::to_string(n),
                                       report.min_signed_det_full);
      manifest.aggregates.emplace_back("sign_violations_n" + std::to_string(n),
                                       static_cast<double>(report.sign_violations));
    });
  }
  manifest.trial_columns = {"none"};
  manifest.tables.emplace_back("det_table", std::move(table));
  return manifest;
}

std::vector<BoxPrior> c_table_boxes() {
  return {BoxPrior(0.5, 1.5), BoxPrior(0.75, 1.25)};
}

RunManifest run_c_tables(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n_max = cfg.n > 0 ? cfg.n : (cfg.full_scale ? 5 : 4);

  CsvTable table({"a", "b", "n", "minimal_m", "smallest_coefficient", "lp_iterations",
                  "optimal"});
  StageClock clock{manifest};
  for (const BoxPrior& box : c_table_boxes()) {
    for (int n = 2; n <= n_max; ++n) {
      clock.run("estimate-a" + format_double(box.a) + "-n" + std::to_string(n), [&]() {
        const RadialGeometry geom(n);
        const GridSpec grid(cfg.grid_k, box);
        EstimateOptions opts;
        opts.threads = cfg.threads;
        const WeightEstimate est = estimate_c(geom, box, grid, n, opts);
        table.add_row(std::vector<double>{
            box.a, box.b, static_cast<double>(n), static_cast<double>(est.m_used),
            est.smallest_coefficient, static_cast<double>(est.lp_iterations),
            est.status == WeightEstimate::Status::optimal ? 1.0 : 0.0});
        const std::string tag = "a" + format_double(box.a) + "_n" + std::to_string(n);
        manifest.aggregates.emplace_back("minimal_m_" + tag,
                                         static_cast<double>(est.m_used));
        manifest.aggregates.emplace_back("smallest_coefficient_" + tag,
                                         est.smallest_coefficient);
      });
    }
  }
  manifest.trial_columns = {"none"};
  manifest.tables.emplace_back("c_tables", std::move(table));
  return manifest;
}

RunManifest run_c_coefficients(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n_max = cfg.n > 0 ? cfg.n : (cfg.full_scale ? 5 : 4);

  CsvTable table({"a", "b", "n", "i", "c_i"});
  std::vector<SvgSeries> series;
  StageClock clock{manifest};
  for (const BoxPrior& box : c_table_boxes()) {
    for (int n = 2; n <= n_max; ++n) {
      clock.run("estimate-a" + format_double(box.a) + "-n" + std::to_string(n), [&]() {
        const RadialGeometry geom(n);
        const GridSpec grid(cfg.grid_k, box);
        EstimateOptions opts;
        opts.threads = cfg.threads;
        const WeightEstimate est = estimate_c(geom, box, grid, n, opts);
        if (est.status != WeightEstimate::Status::optimal) return;
        SvgSeries s{"a=" + format_double(box.a) + " n=" + std::to_string(n), {}, {}};
        for (int i = 0; i < n; ++i) {
          table.add_row(std::vector<double>{box.a, box.b, static_cast<double>(n),
                                            static_cast<double>(i + 1),
                                            est.c[static_cast<std::size_t>(i)]});
          s.x.push_back(i + 1);
          s.y.push_back(est.c[static_cast<std::size_t>(i)]);
        }
        series.push_back(std::move(s));
      });
    }
  }
  manifest.trial_columns = {"none"};
  manifest.tables.emplace_back("c_coefficients", std::move(table));
  manifest.figures.emplace_back(
      "c_coefficients", render_line_chart(series, "estimated weight coefficients",
                                          "coordinate i", "c_i", false, true));
  return manifest;
}

RunManifest run_handcrafted_c(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n = cfg.n > 0 ? cfg.n : (cfg.full_scale ? 5 : 4);
  const BoxPrior box = cfg.full_scale || cfg.n == 0 ? BoxPrior(0.75, 1.25) : cfg.box;
  const int trials = effective_trials(cfg, 100, 100);
  const RadialGeometry geom(n);
  const GridSpec grid(cfg.grid_k, box);

  WeightEstimate est;
  StageClock clock{manifest};
  clock.run("estimate-c", [&]() {
    EstimateOptions opts;
    opts.threads = cfg.threads;
    est = estimate_c(geom, box, grid, cfg.m > 0 ? cfg.m : n, opts);
  });
  if (est.status != WeightEstimate::Status::optimal)
    throw numerical_error("handcrafted-c: weight estimation failed");
  const int m = est.m_used;

  // Handcrafted weights 10^{k_i}, k_i linear from 0 to k_n; two decaying
  // faster than the estimate, two slower.
  const double k_n_est = std::log10(est.smallest_coefficient);
  const std::vector<double> factors = {1.5, 1.25, 0.5, 0.25};
  std::vector<std::vector<double>> weights = {est.c};
  std::vector<std::string> labels = {"estimated"};
  for (std::size_t g = 0; g < factors.size(); ++g) {
    const double k_n = k_n_est * factors[g];
    std::vector<double> c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      c[static_cast<std::size_t>(i)] =
          std::pow(10.0, k_n * static_cast<double>(i) / (n - 1));
    weights.push_back(std::move(c));
    labels.push_back("guess " + std::to_string(g + 1));
  }

  manifest.trial_columns = {"trial"};
  for (const std::string& label : labels) {
    std::string key = label;
    std::replace(key.begin(), key.end(), ' ', '_');
    manifest.trial_columns.push_back("err_" + key);
  }
  manifest.trial_rows.assign(static_cast<std::size_t>(trials), {});

  clock.run("solve", [&]() {
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
      CounterRng rng = derive_rng(cfg.seed, t, "truth");
      const std::vector<double> truth = draw_box(rng, box, n);
      const MeasurementVector y = forward_map(geom, Conductivity(truth), m);
      std::vector<double>& row = manifest.trial_rows[t];
      row = {static_cast<double>(t)};
      for (const auto& c : weights) {
        const SolveReport solved = solve_pc(geom, box, c, y);
        row.push_back(error_inf(solved.iterate, truth));
      }
    }, cfg.threads);
  });

  const double guess_level = box.width() / 3.0;
  std::vector<std::vector<long>> hist_counts;
  for (std::size_t g = 0; g < weights.size(); ++g) {
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(trials));
    long failures = 0;
    for (const auto& row : manifest.trial_rows) {
      const double e = row[g + 1];
      errors.push_back(e);
      if (e >= 0.5 * guess_level) ++failures;
    }
    const ErrorHistogram hist = make_error_histogram(errors);
    hist_counts.push_back(hist.counts);
    manifest.aggregates.emplace_back("median_" + labels[g], median(errors));
    manifest.aggregates.emplace_back(
        "failure_fraction_" + labels[g],
        static_cast<double>(failures) / static_cast<double>(trials));
    if (g == 0) {
      CsvTable htab({"error", "count"});
      for (std::size_t i = 0; i < hist.bin_lo.size(); ++i)
        htab.add_row(std::vector<double>{hist.bin_lo[i], static_cast<double>(hist.counts[i])});
      manifest.tables.emplace_back("histogram_estimated", std::move(htab));
    }
  }
  manifest.aggregates.emplace_back("m_used", static_cast<double>(m));
  manifest.aggregates.emplace_back("random_guess_level", guess_level);

  const ErrorHistogram ref = make_error_histogram({});
  manifest.figures.emplace_back(
      "handcrafted_errors",
      render_histogram(ref.bin_lo, hist_counts, labels,
                       "sup-norm estimation error by weight choice", true));
  return manifest;
}

/// Weight cache so one run estimates each (box, n) at most once.
WeightEstimate cached_weight(const ExperimentConfig& cfg, const BoxPrior& box, int n,
                             std::vector<std::pair<std::string, WeightEstimate>>& cache) {
  const std::string key = format_double(box.a) + ":" + std::to_string(n);
  for (const auto& [k, v] : cache)
    if (k == key) return v;
  const RadialGeometry geom(n);
  const GridSpec grid(cfg.grid_k, box);
  EstimateOptions opts;
  opts.threads = cfg.threads;
  cache.emplace_back(key, estimate_c(geom, box, grid, n, opts));
  return cache.back().second;
}

RunManifest run_sdp_vs_newton(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  std::vector<int> ns = cfg.n > 0 ? std::vector<int>{cfg.n}
                                  : (cfg.full_scale ? std::vector<int>{2, 3, 4, 5}
                                                    : std::vector<int>{2, 3, 4});
  const int trials = effective_trials(cfg, 200, 1000);

  manifest.trial_columns = {"n", "m", "trial", "err_newton", "err_sdp"};
  std::vector<std::pair<std::string, WeightEstimate>> cache;
  StageClock clock{manifest};

  for (int n : ns) {
    const RadialGeometry geom(n);
    WeightEstimate est;
    clock.run("estimate-c-n" + std::to_string(n), [&]() {
      est = cached_weight(cfg, cfg.box, n, cache);
    });
    if (est.status != WeightEstimate::Status::optimal)
      throw numerical_error("sdp-vs-newton: weight estimation failed for n = " +
                            std::to_string(n));
    const int m = est.m_used;
    const std::vector<double> c = est.c;

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(trials));
    clock.run("solve-n" + std::to_string(n), [&]() {
      parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        CounterRng truth_rng = derive_rng(cfg.seed, t, "truth-n" + std::to_string(n));
        const std::vector<double> truth = draw_box(truth_rng, cfg.box, n);
        const MeasurementVector y = forward_map(geom, Conductivity(truth), m);

        CounterRng lsq_rng = derive_rng(cfg.seed, t, "newton-n" + std::to_string(n));
        const SolveReport newton = lsq_box(geom, y, cfg.box, lsq_rng);
        const SolveReport sdp = solve_pc(geom, cfg.box, c, y);

        rows[t] = {static_cast<double>(n), static_cast<double>(m), static_cast<double>(t),
                   error_inf(newton.iterate, truth), error_inf(sdp.iterate, truth)};
      }, cfg.threads);
    });

    std::vector<double> err_newton, err_sdp;
    long newton_wins = 0;
    for (auto& row : rows) {
      err_newton.push_back(row[3]);
      err_sdp.push_back(row[4]);
      if (row[3] <= row[4]) ++newton_wins;
      manifest.trial_rows.push_back(std::move(row));
    }
    const std::string tag = "_n" + std::to_string(n);
    manifest.aggregates.emplace_back("newton_leq_sdp_fraction" + tag,
                                     static_cast<double>(newton_wins) / trials);
    manifest.aggregates.emplace_back("median_newton" + tag, median(err_newton));
    manifest.aggregates.emplace_back("median_sdp" + tag, median(err_sdp));

    const ErrorHistogram hn = make_error_histogram(err_newton);
    const ErrorHistogram hs = make_error_histogram(err_sdp);
    CsvTable htab({"error", "count_newton", "count_sdp"});
    for (std::size_t i = 0; i < hn.bin_lo.size(); ++i)
      htab.add_row(std::vector<double>{hn.bin_lo[i], static_cast<double>(hn.counts[i]),
                                       static_cast<double>(hs.counts[i])});
    manifest.tables.emplace_back("histogram" + tag, std::move(htab));
    manifest.figures.emplace_back(
        "histogram" + tag,
        render_histogram(hn.bin_lo, {hn.counts, hs.counts}, {"newton", "sdp"},
                         "noiseless estimation error, n = " + std::to_string(n), true));
  }
  return manifest;
}

RunManifest run_sdp_vs_lsq_noisy(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  std::vector<int> ns = cfg.n > 0 ? std::vector<int>{cfg.n}
                                  : (cfg.full_scale ? std::vector<int>{2, 3, 4}
                                                    : std::vector<int>{2, 3});
  const int trials = effective_trials(cfg, 200, 1000);
  const NoiseModel noise = cfg.noise_explicit ? cfg.noise
                                              : NoiseModel{NoiseModel::Kind::uniform, 1e-4};
  const double delta = noise.param;

  manifest.trial_columns = {"n", "m", "trial", "err_lsq", "err_sdp", "err_random"};
  std::vector<std::pair<std::string, WeightEstimate>> cache;
  StageClock clock{manifest};

  for (int n : ns) {
    const RadialGeometry geom(n);
    WeightEstimate est;
    clock.run("estimate-c-n" + std::to_string(n), [&]() {
      est = cached_weight(cfg, cfg.box, n, cache);
    });
    if (est.status != WeightEstimate::Status::optimal)
      throw numerical_error("sdp-vs-lsq-noisy: weight estimation failed for n = " +
                            std::to_string(n));
    const int m = est.m_used;
    const std::vector<double> c = est.c;

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(trials));
    clock.run("solve-n" + std::to_string(n), [&]() {
      parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        CounterRng truth_rng = derive_rng(cfg.seed, t, "truth-n" + std::to_string(n));
        const std::vector<double> truth = draw_box(truth_rng, cfg.box, n);
        const MeasurementVector y = forward_map(geom, Conductivity(truth), m);
        CounterRng noise_rng = derive_rng(cfg.seed, t, "noise-n" + std::to_string(n));
        const MeasurementVector z(apply_noise(y, noise, noise_rng));

        CounterRng lsq_rng = derive_rng(cfg.seed, t, "lsq-n" + std::to_string(n));
        const SolveReport lsq = lsq_box(geom, z, cfg.box, lsq_rng);

        std::vector<double> shifted = z.values();
        for (double& v : shifted) v += delta;
        const SolveReport sdp = solve_pc(geom, cfg.box, c, MeasurementVector(shifted));

        CounterRng guess_rng = derive_rng(cfg.seed, t, "guess-n" + std::to_string(n));
        const std::vector<double> guess = draw_box(guess_rng, cfg.box, n);

        rows[t] = {static_cast<double>(n),        static_cast<double>(m),
                   static_cast<double>(t),        error_inf(lsq.iterate, truth),
                   error_inf(sdp.iterate, truth), error_inf(guess, truth)};
      }, cfg.threads);
    });

    std::vector<double> err_lsq, err_sdp, err_rand;
    for (auto& row : rows) {
      err_lsq.push_back(row[3]);
      err_sdp.push_back(row[4]);
      err_rand.push_back(row[5]);
      manifest.trial_rows.push_back(std::move(row));
    }
    const std::string tag = "_n" + std::to_string(n);
    manifest.aggregates.emplace_back("median_lsq" + tag, median(err_lsq));
    manifest.aggregates.emplace_back("median_sdp" + tag, median(err_sdp));
    manifest.aggregates.emplace_back("mean_random_guess" + tag, mean(err_rand));

    const ErrorHistogram hl = make_error_histogram(err_lsq);
    const ErrorHistogram hs = make_error_histogram(err_sdp);
    CsvTable htab({"error", "count_lsq", "count_sdp"});
    for (std::size_t i = 0; i < hl.bin_lo.size(); ++i)
      htab.add_row(std::vector<double>{hl.bin_lo[i], static_cast<double>(hl.counts[i]),
                                       static_cast<double>(hs.counts[i])});
    manifest.tables.emplace_back("histogram" + tag, std::move(htab));
    manifest.figures.emplace_back(
        "histogram" + tag,
        render_histogram(hl.bin_lo, {hl.counts, hs.counts}, {"lsq", "sdp"},
                         "noisy estimation error, n = " + std::to_string(n), true));
  }
  manifest.aggregates.emplace_back("random_guess_level", cfg.box.width() / 3.0);
  manifest.aggregates.emplace_back("noise_delta", delta);
  return manifest;
}

RunManifest run_tikhonov_vs_lsq(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int n = cfg.n > 0 ? cfg.n : 3;
  const int m = cfg.m > 0 ? cfg.m : 5;
  const int trials = effective_trials(cfg, 100, 100);
  const NoiseModel noise = cfg.noise_explicit
                               ? cfg.noise
                               : NoiseModel{NoiseModel::Kind::gaussian, 1e-3};
  const RadialGeometry geom(n);
  const TikhonovConfig tik = default_tikhonov_config(cfg.box, n);
  const double eps = cfg.box.width() / 20.0;

  manifest.trial_columns = {"variant", "trial", "err_ls", "err_tk", "lambda_star"};
  manifest.trial_rows.assign(static_cast<std::size_t>(trials) * 2, {});

  StageClock clock{manifest};
  for (int variant = 0; variant < 2; ++variant) {
    const std::string vtag = variant == 0 ? "uniform" : "perturbed";
    clock.run("solve-" + vtag, [&]() {
      parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        CounterRng truth_rng = derive_rng(cfg.seed, t, "truth-" + vtag);
        std::vector<double> truth(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
          truth[static_cast<std::size_t>(i)] =
              variant == 0 ? truth_rng.uniform(cfg.box.a, cfg.box.b)
                           : truth_rng.uniform(cfg.box.center() - eps, cfg.box.center() + eps);
        const MeasurementVector y = forward_map(geom, Conductivity(truth), m);
        CounterRng noise_rng = derive_rng(cfg.seed, t, "noise-" + vtag);
        const MeasurementVector z(apply_noise(y, noise, noise_rng));

        CounterRng sweep_rng = derive_rng(cfg.seed, t, "sweep-" + vtag);
        const TikhonovSweep sweep =
            tikhonov_sweep(geom, z, cfg.box, tik, Conductivity(truth), sweep_rng);

        manifest.trial_rows[static_cast<std::size_t>(variant) * trials + t] = {
            static_cast<double>(variant), static_cast<double>(t),
            sweep.least_squares_error_inf, sweep.best_error_inf, sweep.best_lambda};
      }, cfg.threads);
    });

    std::vector<double> err_ls, err_tk, lambdas;
    for (int t = 0; t < trials; ++t) {
      const auto& row = manifest.trial_rows[static_cast<std::size_t>(variant) * trials + t];
      err_ls.push_back(row[2]);
      err_tk.push_back(row[3]);
      lambdas.push_back(row[4]);
    }
    manifest.aggregates.emplace_back("mean_ls_" + vtag, mean(err_ls));
    manifest.aggregates.emplace_back("mean_tk_" + vtag, mean(err_tk));
    manifest.aggregates.emplace_back("margin_" + vtag, mean(err_ls) - mean(err_tk));

    const ErrorHistogram hl = make_error_histogram(err_ls);
    const ErrorHistogram ht = make_error_histogram(err_tk);
    std::vector<double> diffs;
    for (std::size_t i = 0; i < err_ls.size(); ++i) diffs.push_back(err_tk[i] - err_ls[i]);
    CsvTable htab({"error", "count_ls", "count_tk"});
    for (std::size_t i = 0; i < hl.bin_lo.size(); ++i)
      htab.add_row(std::vector<double>{hl.bin_lo[i], static_cast<double>(hl.counts[i]),
                                       static_cast<double>(ht.counts[i])});
    manifest.tables.emplace_back("histogram_" + vtag, std::move(htab));

    CsvTable dtab({"trial", "err_tk_minus_err_ls", "lambda_star"});
    for (int t = 0; t < trials; ++t)
      dtab.add_row(std::vector<double>{static_cast<double>(t), diffs[static_cast<std::size_t>(t)],
                                       lambdas[static_cast<std::size_t>(t)]});
    manifest.tables.emplace_back("difference_" + vtag, std::move(dtab));
    manifest.figures.emplace_back(
        "histogram_" + vtag,
        render_histogram(hl.bin_lo, {hl.counts, ht.counts}, {"least squares", "tikhonov"},
                         "estimation error (" + vtag + " unknowns)", true));
  }
  manifest.aggregates.emplace_back("random_guess_level", cfg.box.width() / 3.0);
  return manifest;
}

RunManifest run_landscape_1d(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const int m = cfg.m > 0 ? cfg.m : 1;
  const RadialGeometry geom(1);
  const Conductivity truth(1, 1.0);

  StageClock clock{manifest};
  std::vector<Landscape1dSample> samples;
  clock.run("trace", [&]() {
    samples = trace_1d_landscape(geom, truth, m, 0.5, 3.0, 401);
  });

  CsvTable table({"sigma", "f", "f2"});
  SvgSeries sf{"f", {}, {}}, sf2{"f''", {}, {}};
  for (const auto& s : samples) {
    table.add_row(std::vector<double>{s.sigma, s.f, s.f2});
    sf.x.push_back(s.sigma);
    sf.y.push_back(s.f);
    sf2.x.push_back(s.sigma);
    sf2.y.push_back(s.f2);
  }
  manifest.trial_columns = {"none"};
  manifest.tables.emplace_back("landscape_1d", std::move(table));
  manifest.figures.emplace_back("objective",
                                render_line_chart({sf}, "least squares objective",
                                                  "sigma", "f", false, false));
  manifest.figures.emplace_back("second_derivative",
                                render_line_chart({sf2}, "objective second derivative",
                                                  "sigma", "f''", false, false));
  double min_f2 = std::numeric_limits<double>::infinity();
  double max_f2 = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    min_f2 = std::min(min_f2, s.f2);
    max_f2 = std::max(max_f2, s.f2);
  }
  manifest.aggregates = {{"min_f2", min_f2}, {"max_f2", max_f2}};
  return manifest;
}

RunManifest run_implicit_curves(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.config = cfg;
  const RadialGeometry geom(2);
  const Conductivity truth(2, 1.0);

  StageClock clock{manifest};
  std::vector<ImplicitCurveSample> samples;
  clock.run("trace", [&]() {
    samples = trace_implicit_curves(geom, truth, 0.8, 1.3, 400);
  });

  CsvTable table({"sigma_1", "g", "h"});
  SvgSeries sg{"g", {}, {}}, sh{"h", {}, {}};
  for (const auto& s : samples) {
    table.add_row(std::vector<double>{s.sigma1, s.g, s.h});
    sg.x.push_back(s.sigma1);
    sg.y.push_back(s.g);
    sh.x.push_back(s.sigma1);
    sh.y.push_back(s.h);
  }
  manifest.trial_columns = {"none"};
  manifest.tables.emplace_back("implicit_curves", std::move(table));
  manifest.figures.emplace_back("g", render_line_chart({sg}, "level-set curve g",
                                                       "sigma_1", "g", false, false));
  manifest.figures.emplace_back("h", render_line_chart({sh}, "h along the level set",
                                                       "sigma_1", "h", false, false));
  bool monotone = true;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].h >= samples[i - 1].h) monotone = false;
  manifest.aggregates = {{"h_strictly_decreasing", monotone ? 1.0 : 0.0}};
  return manifest;
}

} // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "error-per-annulus") return run_error_per_annulus(cfg);
  if (cfg.experiment == "mean-error-vs-n") return run_mean_error_vs_n(cfg);
  if (cfg.experiment == "det-table") return run_det_table(cfg);
  if (cfg.experiment == "c-tables") return run_c_tables(cfg);
  if (cfg.experiment == "c-coefficients") return run_c_coefficients(cfg);
  if (cfg.experiment == "handcrafted-c") return run_handcrafted_c(cfg);
  if (cfg.experiment == "sdp-vs-newton") return run_sdp_vs_newton(cfg);
  if (cfg.experiment == "sdp-vs-lsq-noisy") return run_sdp_vs_lsq_noisy(cfg);
  if (cfg.experiment == "tikhonov-vs-lsq") return run_tikhonov_vs_lsq(cfg);
  if (cfg.experiment == "landscape-1d") return run_landscape_1d(cfg);
  if (cfg.experiment == "implicit-curves") return run_implicit_curves(cfg);
  throw invalid_input_error("unknown experiment: " + cfg.experiment);
}

std::string manifest_to_json(const RunManifest& manifest, bool include_rows) {
  nlohmann::json j;
  j["version"] = manifest.version;
  j["config"] = {
      {"experiment", manifest.config.experiment},
      {"n", manifest.config.n},
      {"m", manifest.config.m},
      {"box", {manifest.config.box.a, manifest.config.box.b}},
      {"grid_k", manifest.config.grid_k},
      {"trials", manifest.config.trials},
      {"noise",
       {{"kind", manifest.config.noise.kind == NoiseModel::Kind::none
                     ? "none"
                     : (manifest.config.noise.kind == NoiseModel::Kind::uniform
                            ? "uniform"
                            : "gaussian")},
        {"param", manifest.config.noise.param}}},
      {"seed", manifest.config.seed},
      {"format", manifest.config.format},
      {"full_scale", manifest.config.full_scale},
  };
  nlohmann::json aggregates = nlohmann::json::array();
  for (const auto& [name, value] : manifest.aggregates)
    aggregates.push_back({{"name", name}, {"value", value}});
  j["aggregates"] = aggregates;
  j["trial_columns"] = manifest.trial_columns;
  j["trial_count"] = manifest.trial_rows.size();
  if (include_rows) j["trial_rows"] = manifest.trial_rows;
  return j.dump(2) + "\n";
}

void emit(const RunManifest& manifest, const std::string& format) {
  if (format != "csv" && format != "json")
    throw invalid_input_error("format must be csv or json");
  const std::filesystem::path dir = manifest.config.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory: " + dir.string());

  write_text_file(dir / "manifest.json", manifest_to_json(manifest, format == "json"));

  if (!manifest.trial_rows.empty()) {
    CsvTable trials(manifest.trial_columns);
    for (const auto& row : manifest.trial_rows) trials.add_row(row);
    trials.write(dir / "trials.csv");
  }
  for (const auto& [name, table] : manifest.tables) table.write(dir / (name + ".csv"));
  for (const auto& [name, svg] : manifest.figures)
    write_text_file(dir / (name + ".svg"), svg);

  nlohmann::json timings = nlohmann::json::array();
  for (const StageTiming& t : manifest.timings)
    timings.push_back({{"stage", t.name}, {"seconds", t.seconds}});
  write_text_file(dir / "timings.json", timings.dump(2) + "\n");
}

} // namespace calderon
