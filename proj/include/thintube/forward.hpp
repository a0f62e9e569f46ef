#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "thintube/geometry.hpp"
#include "thintube/polarization.hpp"

namespace thintube {

using Complex = std::complex<double>;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

/// Bilinear cross product. Eigen's cross() conjugates complex operands,
/// which is not the product appearing in the field formulas.
inline CVec3 complex_cross(const CVec3& u, const CVec3& v) {
  return CVec3(u.y() * v.z() - u.z() * v.y(), u.z() * v.x() - u.x() * v.z(),
               u.x() * v.y() - u.y() * v.x());
}

/// Incident plane wave A e^{i k theta . x} with A orthogonal to theta.
struct PlaneWave {
  double k;
  Vec3 theta;
  CVec3 A;

  PlaneWave(double k, const Vec3& theta, const CVec3& A);
};

/// Equiangular sphere grid y_jl = (sin t_j cos p_l, sin t_j sin p_l, cos t_j)
/// with t_j = j pi / N (j = 1..N-1), p_l = (l-1) pi / N (l = 1..2N) and
/// trapezoid weights (pi/N)^2 sin t_j. Directions are stored j-major.
struct FarFieldGrid {
  int N = 0;
  std::vector<Vec3> directions;
  std::vector<double> weights;
  std::vector<CVec3> samples;  // empty until filled

  static FarFieldGrid equiangular(int N);

  int size() const { return static_cast<int>(directions.size()); }
  int flat_index(int j, int l) const { return (j - 1) * 2 * N + (l - 1); }
  bool has_samples() const {
    return samples.size() == directions.size() && !samples.empty();
  }
};

/// Discrete L2(S2) norm sqrt(sum_jl w_jl |sample_jl|^2).
double sphere_norm(const FarFieldGrid& grid);

/// Composite Simpson rule with M = 2m+1 nodes per partition segment; nodes
/// shared at segment boundaries are stored once.
struct QuadratureRule {
  std::vector<double> nodes;           // (M-1)(n-1)+1 distinct nodes
  std::vector<double> weights;         // merged weights, sum = 1
  int nodes_per_segment = 0;           // M
  int segments = 0;                    // n-1
  std::vector<double> segment_weights; // per segment: M Simpson weights

  static QuadratureRule simpson(const Partition& partition, int M);

  int segment_start(int seg) const { return seg * (nodes_per_segment - 1); }
  double segment_weight(int seg, int local) const {
    return segment_weights[seg * nodes_per_segment + local];
  }
};

/// Geometry, speeds and lifted polarization tensors cached at the quadrature
/// nodes; shared by the far field, the near field and the Jacobian assembly.
struct CurveQuadratureData {
  FrameField frame;
  std::vector<Vec3> position;
  TensorField tensor_mu;
  TensorField tensor_eps;

  static CurveQuadratureData build(const CurveSpline& spline,
                                   const Material& material,
                                   const QuadratureRule& quad);
};

/// Leading-order electric far field pattern of a thin tube with circular
/// cross-section around `spline`, sampled on the grid directions. Fills
/// grid.samples. `workers` > 0 pins the OpenMP thread count; results are
/// bit-identical for any worker count and to far_field_serial.
void far_field(const CurveSpline& spline, const Material& material,
               const PlaneWave& wave, FarFieldGrid& grid,
               const QuadratureRule& quad, int workers = 0);

/// Serial reference implementation of far_field.
void far_field_serial(const CurveSpline& spline, const Material& material,
                      const PlaneWave& wave, FarFieldGrid& grid,
                      const QuadratureRule& quad);

/// Single far-field sample in direction xhat from precomputed curve data.
CVec3 far_field_direction(const Vec3& xhat, const Material& material,
                          const PlaneWave& wave, const QuadratureRule& quad,
                          const CurveQuadratureData& data);

/// Dyadic Green's function Phi_k I + k^-2 Hess Phi_k at x != y.
CMat3 dyadic_green(double k, const Vec3& x, const Vec3& y);

/// curl_x G(x, y) a = grad_x Phi_k(x - y) x a.
CVec3 curl_green_apply(double k, const Vec3& x, const Vec3& y, const CVec3& a);

/// Leading-order scattered electric field at observation points away from
/// the tube (distance from the curve must exceed 1e-3).
std::vector<CVec3> near_field(const CurveSpline& spline,
                              const Material& material, const PlaneWave& wave,
                              const std::vector<Vec3>& points,
                              const QuadratureRule& quad);

}  // namespace thintube
