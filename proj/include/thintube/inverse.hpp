#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "thintube/forward.hpp"

namespace thintube {

/// Gauss-Newton solver parameters. The regularization weights alpha1
/// (curvature penalty) and alpha2 (control-point spacing penalty) are the
/// initial values; the solver halves them when the line search stalls while
/// the corresponding penalty block dominates the objective.
struct SolverConfig {
  double alpha1 = 0.2;
  double alpha2 = 0.9;
  double s_max = 1.0;
  int line_search_steps = 10;
  int max_iterations = 250;
  double dominance_threshold = 0.5;
  double improvement_margin = 1e-14;  // relative margin for s* = 0 detection
  bool check_derivatives = false;
  int workers = 0;

  void validate() const;
};

/// Stacked real residual P and Jacobian of the discretized objective
/// Phi_N = |P|^2: normalized far-field misfit, curvature penalty samples and
/// segment-length penalty, in that order.
struct ResidualSystem {
  Eigen::VectorXd residual;  // length Q = 12N(N-1) + 3((M-1)(n-1)+1) + (n-1)
  Eigen::MatrixXd jacobian;  // Q x 3n (empty when assembled without it)
  int data_rows = 0;
  int curvature_rows = 0;
  int length_rows = 0;
  double data_norm = 0.0;  // denominator, fixed by the measured data

  double phi() const { return residual.squaredNorm(); }
  double data_term() const { return residual.head(data_rows).squaredNorm(); }
  double curvature_term() const {
    return residual.segment(data_rows, curvature_rows).squaredNorm();
  }
  double length_term() const {
    return residual.tail(length_rows).squaredNorm();
  }
};

/// Residual (and analytic Jacobian) of the regularized least-squares
/// functional for the given iterate. Control coordinates are ordered
/// point-major: (x_1, y_1, z_1, x_2, ...).
ResidualSystem assemble_residual(const CurveSpline& spline,
                                 const Material& material,
                                 const PlaneWave& wave,
                                 const FarFieldGrid& data,
                                 const QuadratureRule& quad, double alpha1,
                                 double alpha2, bool with_jacobian = true,
                                 int workers = 0);

/// Directional derivative of the far-field operator at `spline` in the
/// direction of the displacement spline through `h_points` (same partition
/// and end conditions). Returns one complex 3-vector per grid direction.
std::vector<CVec3> frechet_T(const CurveSpline& spline,
                             const Material& material, const PlaneWave& wave,
                             const FarFieldGrid& grid,
                             const QuadratureRule& quad,
                             const std::vector<Vec3>& h_points);

/// Least-squares Gauss-Newton direction min |J d + P| via column-pivoted QR.
/// Rank-deficient systems fall back to a small Levenberg shift.
Eigen::VectorXd gauss_newton_step(const ResidualSystem& system);

/// Golden-section line search on [0, s_max] with a fixed number of interval
/// reductions. Returns 0 when no evaluated point improves on phi(0) by more
/// than the relative margin.
double golden_section_search(const std::function<double(double)>& phi,
                             double s_max, int steps,
                             double improvement_margin = 1e-14);

struct IterationRecord {
  int iteration = 0;
  std::vector<Vec3> control_points;
  double phi = 0.0;
  double data_term = 0.0;
  double curvature_term = 0.0;
  double length_term = 0.0;
  double step = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::string event;  // step | halve_alpha1 | halve_alpha2 | stop
};

struct ReconstructionResult {
  CurveSpline curve;
  std::vector<IterationRecord> history;
  std::string stop_reason;  // data_dominates | max_iterations
};

/// Regularized Gauss-Newton reconstruction of the center curve from one
/// far-field pattern, starting from `initial`.
ReconstructionResult reconstruct(const CurveSpline& initial,
                                 const Material& material,
                                 const PlaneWave& wave,
                                 const FarFieldGrid& data,
                                 const QuadratureRule& quad,
                                 const SolverConfig& config);

/// Additive complex noise, uniformly distributed per component and scaled so
/// the expected discrete-norm ratio |noise| / |data| equals `level`.
/// Deterministic for a fixed seed.
FarFieldGrid add_noise(const FarFieldGrid& data, double level, uint64_t seed);

}  // namespace thintube
