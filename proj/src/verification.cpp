#include "thintube/verification.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "thintube/log.hpp"

namespace thintube {

CurveSpline random_test_spline(int n, uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vec3 a(0.0, 0.0, 0.0), b(1.2, 0.5, 0.8);
  Vec3 coeff[3], phase[3];
  for (int m = 0; m < 3; ++m) {
    coeff[m] = Vec3(unit(rng), unit(rng), unit(rng)) * amplitude / (m + 1);
    phase[m] = Vec3(unit(rng), unit(rng), unit(rng)) * std::numbers::pi;
  }
  const Partition partition = Partition::uniform(n);
  std::vector<Vec3> points(n);
  for (int i = 0; i < n; ++i) {
    const double t = partition.knot(i);
    Vec3 p = (1.0 - t) * a + t * b;
    for (int m = 0; m < 3; ++m)
      for (int c = 0; c < 3; ++c)
        p[c] += coeff[m][c] * std::sin((m + 1) * std::numbers::pi * t +
                                       phase[m][c]);
    points[i] = p;
  }
  return CurveSpline::fit(partition, points, false);
}

DerivativeCheckReport check_derivatives(const CurveSpline& spline,
                                        const Material& material,
                                        const PlaneWave& wave,
                                        const FarFieldGrid& data,
                                        const QuadratureRule& quad,
                                        double alpha1, double alpha2,
                                        uint64_t seed) {
  DerivativeCheckReport report;
  const int n = spline.partition().size();

  const ResidualSystem sys = assemble_residual(spline, material, wave, data,
                                               quad, alpha1, alpha2, true);
  const double jac_scale = sys.jacobian.cwiseAbs().maxCoeff();

  std::vector<Vec3> base = spline.control_points();
  for (int col = 0; col < 3 * n; ++col) {
    const int cp = col / 3;
    const int c = col % 3;
    const double h = 1e-6 * std::max(1.0, std::abs(base[cp][c]));
    std::vector<Vec3> plus = base, minus = base;
    plus[cp][c] += h;
    minus[cp][c] -= h;
    const Eigen::VectorXd rp =
        assemble_residual(spline.with_points(plus), material, wave, data, quad,
                          alpha1, alpha2, false)
            .residual;
    const Eigen::VectorXd rm =
        assemble_residual(spline.with_points(minus), material, wave, data,
                          quad, alpha1, alpha2, false)
            .residual;
    const Eigen::VectorXd fd = (rp - rm) / (2.0 * h);
    const double col_scale =
        std::max(sys.jacobian.col(col).cwiseAbs().maxCoeff(),
                 1e-8 * jac_scale);
    const double err =
        (sys.jacobian.col(col) - fd).cwiseAbs().maxCoeff() / col_scale;
    report.max_jacobian_error = std::max(report.max_jacobian_error, err);
  }

  // Taylor remainder of the far-field derivative along a random direction.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec3> h_points(n);
  for (Vec3& p : h_points) p = Vec3(unit(rng), unit(rng), unit(rng)) * 0.1;

  const std::vector<CVec3> derivative =
      frechet_T(spline, material, wave, data, quad, h_points);
  FarFieldGrid base_grid = data;
  far_field_serial(spline, material, wave, base_grid, quad);

  auto remainder = [&](double eps) {
    std::vector<Vec3> moved = base;
    for (int i = 0; i < n; ++i) moved[i] += eps * h_points[i];
    FarFieldGrid shifted = data;
    far_field_serial(spline.with_points(moved), material, wave, shifted, quad);
    double sum = 0.0;
    for (int g = 0; g < shifted.size(); ++g) {
      const CVec3 r = shifted.samples[g] - base_grid.samples[g] -
                      eps * derivative[g];
      sum += shifted.weights[g] * r.squaredNorm();
    }
    return std::sqrt(sum);
  };

  report.min_taylor_order = std::numeric_limits<double>::infinity();
  double eps = 1e-2;
  double prev = remainder(eps);
  for (int octave = 0; octave < 4; ++octave) {
    eps /= 2.0;
    const double next = remainder(eps);
    const double order = std::log2(prev / next);
    report.min_taylor_order = std::min(report.min_taylor_order, order);
    prev = next;
  }
  log_debug("derivative check: jacobian error ", report.max_jacobian_error,
            ", taylor order ", report.min_taylor_order);
  return report;
}

double curve_distance(const CurveSpline& reconstruction,
                      const CurveSpline& target, int samples) {
  const bool cyclic = target.closed();
  std::vector<Vec3> rec(samples), tgt(samples);
  for (int i = 0; i < samples; ++i) {
    const double s = cyclic ? static_cast<double>(i) / samples
                            : static_cast<double>(i) / (samples - 1);
    rec[i] = reconstruction.eval(s, 0);
    tgt[i] = target.eval(s, 0);
  }
  double best = std::numeric_limits<double>::infinity();
  const int shifts = cyclic ? samples : 1;
  for (int reverse = 0; reverse < 2; ++reverse) {
    for (int shift = 0; shift < shifts; ++shift) {
      double sum = 0.0;
      for (int i = 0; i < samples; ++i) {
        int idx = reverse ? (samples - 1 - i) : i;
        idx = (idx + shift) % samples;
        sum += (rec[i] - tgt[idx]).squaredNorm();
      }
      best = std::min(best, sum);
    }
  }
  return std::sqrt(best / samples);
}

double curve_diameter(const CurveSpline& curve, int samples) {
  std::vector<Vec3> pts(samples);
  for (int i = 0; i < samples; ++i)
    pts[i] = curve.eval(static_cast<double>(i) / (samples - 1), 0);
  double best = 0.0;
  for (int i = 0; i < samples; ++i)
    for (int j = i + 1; j < samples; ++j)
      best = std::max(best, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(best);
}

}  // namespace thintube
