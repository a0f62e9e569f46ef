#pragma once

#include <string>
#include <vector>

#include "thintube/forward.hpp"
#include "thintube/inverse.hpp"

namespace thintube {

/// Far-field pattern with the acquisition context carried in the file header.
struct FarFieldFile {
  double k = 0.0;
  Vec3 theta = Vec3::Zero();
  CVec3 A = CVec3::Zero();
  double eps_r = 1.0;
  double mu_r = 1.0;
  double rho = 0.0;
  FarFieldGrid grid;

  PlaneWave wave() const { return PlaneWave(k, theta, A); }
};

void write_far_field(const std::string& path, const FarFieldFile& file);
FarFieldFile read_far_field(const std::string& path);

void write_curve(const std::string& path, const CurveSpline& curve);
CurveSpline read_curve(const std::string& path);

void write_tensor_field(const std::string& path, const TensorField& field);

/// Two-column series for figure-style convergence plots.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool annotate_slope = false;
  double slope = 0.0;
};

/// Relative discrete L2(S2) difference |test - reference| / |reference|.
double rel_diff(const FarFieldGrid& test, const FarFieldGrid& reference);

/// Writes the series and, when all points are positive, a fitted log-log
/// slope annotation. Returns the fitted series (slope filled in).
PlotSeries export_convergence_series(
    const std::vector<std::pair<double, double>>& runs,
    const std::string& label, const std::string& path);

void write_plot_series(const std::string& path, const PlotSeries& series);

void write_iteration_log(const std::string& path,
                         const std::vector<IterationRecord>& history,
                         const std::string& stop_reason);

/// Solver/run configuration parsed from a JSON file.
struct RunConfig {
  double eps_r = 2.5;
  double mu_r = 1.6;
  double rho = 0.03;
  double eps0 = 8.854e-12;
  double mu0 = 1.2566370614359173e-6;

  double k = 0.0;  // resolved from "frequency" when not given directly
  Vec3 theta = Vec3(1.0, -1.0, 1.0).normalized();
  CVec3 A = CVec3(Complex(-1.0, 0.0), Complex(0.0, 1.0), Complex(1.0, 1.0));

  int grid_N = 10;
  int quadrature_M = 11;
  int partition_n = 30;

  std::string initial_name;  // torus | figure | helix | segment | (empty)
  Vec3 segment_start = Vec3::Zero();
  Vec3 segment_end = Vec3::Zero();
  std::vector<Vec3> initial_points;
  bool initial_closed = false;

  double alpha1 = 0.2;
  double alpha2 = 0.9;
  double s_max = 1.0;
  int line_search_steps = 10;
  int max_iterations = 250;
  uint64_t seed = 0;
  bool check_derivatives = false;
  int workers = 0;

  Material material() const {
    return Material(eps_r, mu_r, rho, eps0, mu0);
  }
  PlaneWave wave() const { return PlaneWave(k, theta, A); }
  SolverConfig solver() const;
  /// Initial guess described by the config (named curve, segment endpoints,
  /// or explicit control points) sampled on partition_n uniform knots.
  CurveSpline initial_curve() const;
};

RunConfig read_config(const std::string& path);

}  // namespace thintube
