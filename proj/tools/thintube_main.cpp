#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thintube/builtin_curves.hpp"
#include "thintube/errors.hpp"
#include "thintube/io.hpp"
#include "thintube/log.hpp"
#include "thintube/verification.hpp"

namespace {

using namespace thintube;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheckFailed = 4;

CurveSpline load_curve(const std::string& spec, int n) {
  if (std::filesystem::exists(spec)) return read_curve(spec);
  if (is_builtin_curve(spec)) return builtin_curve(spec, n);
  throw InputError("curve '" + spec + "' is neither a file nor a built-in");
}

int cmd_forward(const std::string& config_path, const std::string& curve_spec,
                const std::string& out_path, int workers) {
  const RunConfig cfg = read_config(config_path);
  const CurveSpline curve = load_curve(curve_spec, cfg.partition_n);
  const Material material = cfg.material();
  const PlaneWave wave = cfg.wave();
  const QuadratureRule quad =
      QuadratureRule::simpson(curve.partition(), cfg.quadrature_M);
  FarFieldFile file;
  file.k = wave.k;
  file.theta = wave.theta;
  file.A = wave.A;
  file.eps_r = material.eps_r;
  file.mu_r = material.mu_r;
  file.rho = material.rho;
  file.grid = FarFieldGrid::equiangular(cfg.grid_N);
  far_field(curve, material, wave, file.grid, quad,
            workers > 0 ? workers : cfg.workers);
  write_far_field(out_path, file);
  log_info("wrote far field (N=", cfg.grid_N, ", k=", wave.k, ") to ",
           out_path);
  return 0;
}

int cmd_noise(const std::string& data_path, double level, uint64_t seed,
              const std::string& out_path) {
  FarFieldFile file = read_far_field(data_path);
  file.grid = add_noise(file.grid, level, seed);
  write_far_field(out_path, file);
  log_info("wrote noisy far field (level ", level, ", seed ", seed, ") to ",
           out_path);
  return 0;
}

int cmd_reconstruct(const std::string& config_path,
                    const std::string& data_path, const std::string& prefix,
                    int workers) {
  const RunConfig cfg = read_config(config_path);
  const FarFieldFile file = read_far_field(data_path);
  // The acquisition context (wave, material) travels with the data file;
  // the config supplies the solver parameters and the initial guess.
  const Material material(file.eps_r, file.mu_r, file.rho, cfg.eps0, cfg.mu0);
  const PlaneWave wave = file.wave();
  const CurveSpline initial = cfg.initial_curve();
  const QuadratureRule quad =
      QuadratureRule::simpson(initial.partition(), cfg.quadrature_M);
  SolverConfig solver = cfg.solver();
  if (workers > 0) solver.workers = workers;

  if (solver.check_derivatives) {
    const DerivativeCheckReport report =
        check_derivatives(initial, material, wave, file.grid, quad,
                          solver.alpha1, solver.alpha2, cfg.seed);
    if (!report.passed())
      throw NumericalError("derivative check failed at the initial iterate");
    log_info("derivative check at initial iterate passed");
  }

  const ReconstructionResult result =
      reconstruct(initial, material, wave, file.grid, quad, solver);
  write_iteration_log(prefix + ".log.jsonl", result.history,
                      result.stop_reason);
  write_curve(prefix + ".curve.txt", result.curve);
  log_info("reconstruction finished after ", result.history.size(),
           " iterations (", result.stop_reason, "); wrote ", prefix,
           ".curve.txt");
  return 0;
}

int cmd_check_derivatives(const std::string& config_path, uint64_t seed_flag,
                          bool seed_given) {
  const RunConfig cfg = read_config(config_path);
  const uint64_t seed = seed_given ? seed_flag : cfg.seed;
  const Material material = cfg.material();
  const PlaneWave wave = cfg.wave();

  const int n = 8;
  const CurveSpline spline = random_test_spline(n, seed);
  const QuadratureRule quad = QuadratureRule::simpson(spline.partition(), 5);
  FarFieldGrid data = FarFieldGrid::equiangular(4);
  // Synthetic data from a nearby curve keeps the residual generic.
  far_field_serial(random_test_spline(n, seed + 1), material, wave, data,
                   quad);

  const DerivativeCheckReport report = check_derivatives(
      spline, material, wave, data, quad, cfg.alpha1, cfg.alpha2, seed);
  std::printf("jacobian max relative column error: %.3e (tolerance 1e-5)\n",
              report.max_jacobian_error);
  std::printf("far-field derivative Taylor order:  %.3f (required >= 1.9)\n",
              report.min_taylor_order);
  if (!report.passed()) {
    std::printf("check-derivatives: FAIL\n");
    return kExitCheckFailed;
  }
  std::printf("check-derivatives: PASS\n");
  return 0;
}

int cmd_polarization(double gamma0, double gamma1, const std::string& mode,
                     int resolution) {
  Mat2 m;
  if (mode == "disk") {
    m = disk_tensor(gamma0, gamma1);
  } else if (mode == "numeric") {
    auto unit_disk = [](double x, double y) { return x * x + y * y < 1.0; };
    m = numeric_cross_section_tensor(unit_disk, gamma0, gamma1, resolution);
  } else {
    throw InputError("polarization mode must be 'disk' or 'numeric'");
  }
  std::printf("%.17g %.17g\n%.17g %.17g\n", m(0, 0), m(0, 1), m(1, 0),
              m(1, 1));
  return 0;
}

int cmd_convergence(const std::string& config_path,
                    const std::string& curve_spec, const std::string& out_path,
                    const std::string& mode, int workers) {
  const RunConfig cfg = read_config(config_path);
  const Material material = cfg.material();
  const PlaneWave wave = cfg.wave();
  const int w = workers > 0 ? workers : cfg.workers;
  std::vector<std::pair<double, double>> runs;
  if (mode == "quadrature") {
    const CurveSpline curve = load_curve(curve_spec, cfg.partition_n);
    FarFieldGrid reference = FarFieldGrid::equiangular(cfg.grid_N);
    far_field(curve, material, wave, reference,
              QuadratureRule::simpson(curve.partition(), 65), w);
    for (int M : {3, 5, 9, 17, 33}) {
      FarFieldGrid grid = FarFieldGrid::equiangular(cfg.grid_N);
      far_field(curve, material, wave, grid,
                QuadratureRule::simpson(curve.partition(), M), w);
      runs.emplace_back(M, rel_diff(grid, reference));
    }
  } else if (mode == "segments") {
    if (!is_builtin_curve(curve_spec))
      throw InputError("segment study needs a built-in curve name");
    FarFieldGrid reference = FarFieldGrid::equiangular(cfg.grid_N);
    const CurveSpline fine = builtin_curve(curve_spec, 61);
    far_field(fine, material, wave, reference,
              QuadratureRule::simpson(fine.partition(), 21), w);
    for (int n : {6, 10, 14, 18, 22, 26, 30}) {
      const CurveSpline curve = builtin_curve(curve_spec, n);
      FarFieldGrid grid = FarFieldGrid::equiangular(cfg.grid_N);
      far_field(curve, material, wave, grid,
                QuadratureRule::simpson(curve.partition(), cfg.quadrature_M),
                w);
      runs.emplace_back(n - 1, rel_diff(grid, reference));
    }
  } else {
    throw InputError("convergence mode must be 'quadrature' or 'segments'");
  }
  const PlotSeries series = export_convergence_series(
      runs, "RelDiff vs " + mode + " (" + curve_spec + ")", out_path);
  for (size_t i = 0; i < series.x.size(); ++i)
    std::printf("%g %.6e\n", series.x[i], series.y[i]);
  if (series.annotate_slope)
    std::printf("fitted log-log slope: %.3f\n", series.slope);
  log_info("wrote convergence series to ", out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic forward model and Gauss-Newton center-curve "
               "reconstruction for thin tubular scatterers"};
  app.require_subcommand(1);

  std::string config_path, curve_spec, data_path, out_path;
  double level = 0.3;
  uint64_t seed = 0;
  int workers = 0;
  int resolution = 400;
  std::string mode;
  double gamma0 = 1.0, gamma1 = 1.0;

  CLI::App* forward = app.add_subcommand("forward", "Evaluate the far field");
  forward->add_option("--config", config_path, "JSON run configuration")
      ->required();
  forward->add_option("--curve", curve_spec,
                      "curve file or built-in name (torus|figure|helix)")
      ->required();
  forward->add_option("--out", out_path, "output far-field file")->required();
  forward->add_option("--workers", workers, "OpenMP worker count (0 = auto)");

  CLI::App* noise = app.add_subcommand("noise", "Add calibrated noise");
  noise->add_option("--data", data_path, "input far-field file")->required();
  noise->add_option("--level", level, "relative noise level")->required();
  noise->add_option("--seed", seed, "RNG seed")->required();
  noise->add_option("--out", out_path, "output far-field file")->required();

  CLI::App* rec = app.add_subcommand("reconstruct",
                                     "Gauss-Newton center-curve recovery");
  rec->add_option("--config", config_path, "JSON run configuration")
      ->required();
  rec->add_option("--data", data_path, "measured far-field file")->required();
  rec->add_option("--out", out_path, "output prefix")->required();
  rec->add_option("--workers", workers, "OpenMP worker count (0 = auto)");

  CLI::App* check =
      app.add_subcommand("check-derivatives",
                         "Verify analytic derivatives against differences");
  check->add_option("--config", config_path, "JSON run configuration")
      ->required();
  CLI::Option* seed_opt = check->add_option("--seed", seed, "RNG seed");

  CLI::App* pol = app.add_subcommand("polarization",
                                     "Cross-section polarization tensor");
  pol->add_option("gamma0", gamma0, "background parameter")->required();
  pol->add_option("gamma1", gamma1, "inclusion parameter")->required();
  pol->add_option("--mode", mode, "disk | numeric")->default_val("disk");
  pol->add_option("--resolution", resolution,
                  "grid cells per side for the numeric solve");

  CLI::App* conv = app.add_subcommand("convergence",
                                      "Far-field self-convergence study");
  conv->add_option("--config", config_path, "JSON run configuration")
      ->required();
  conv->add_option("--curve", curve_spec, "curve file or built-in name")
      ->required();
  conv->add_option("--out", out_path, "output series file")->required();
  conv->add_option("--mode", mode, "quadrature | segments")
      ->default_val("quadrature");
  conv->add_option("--workers", workers, "OpenMP worker count (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (forward->parsed())
      return cmd_forward(config_path, curve_spec, out_path, workers);
    if (noise->parsed()) return cmd_noise(data_path, level, seed, out_path);
    if (rec->parsed())
      return cmd_reconstruct(config_path, data_path, out_path, workers);
    if (check->parsed())
      return cmd_check_derivatives(config_path, seed, seed_opt->count() > 0);
    if (pol->parsed())
      return cmd_polarization(gamma0, gamma1, mode, resolution);
    if (conv->parsed())
      return cmd_convergence(config_path, curve_spec, out_path, mode, workers);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
