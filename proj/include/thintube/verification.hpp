#pragma once

#include <cstdint>

#include "thintube/inverse.hpp"

namespace thintube {

/// Smooth random spline for derivative checks: a gentle arc plus a few
/// low-frequency random modes, regular by construction.
CurveSpline random_test_spline(int n, uint64_t seed, double amplitude = 0.1);

struct DerivativeCheckReport {
  double max_jacobian_error = 0.0;  // max relative column error vs central FD
  double min_taylor_order = 0.0;    // observed order of the Taylor remainder
  bool passed(double jacobian_tol = 1e-5, double min_order = 1.9) const {
    return max_jacobian_error < jacobian_tol && min_taylor_order >= min_order;
  }
};

/// Compares the analytic Jacobian of the residual with central finite
/// differences (step 1e-6 per coordinate scale) and measures the Taylor
/// remainder order of the far-field derivative along a random direction.
DerivativeCheckReport check_derivatives(const CurveSpline& spline,
                                        const Material& material,
                                        const PlaneWave& wave,
                                        const FarFieldGrid& data,
                                        const QuadratureRule& quad,
                                        double alpha1, double alpha2,
                                        uint64_t seed);

/// Symmetrized discrete L2 distance between two curves on `samples` uniform
/// parameters, minimized over parameter reversal and (for closed targets)
/// cyclic parameter shifts.
double curve_distance(const CurveSpline& reconstruction,
                      const CurveSpline& target, int samples = 200);

/// Largest pairwise distance between target samples.
double curve_diameter(const CurveSpline& curve, int samples = 200);

}  // namespace thintube
