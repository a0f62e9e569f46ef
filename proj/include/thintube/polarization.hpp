#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "thintube/geometry.hpp"

namespace thintube {

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Material of the tube: relative permittivity/permeability, cross-section
/// radius, and the background constants (only used through the wave number).
struct Material {
  double eps_r;
  double mu_r;
  double rho;
  double eps0 = 8.854e-12;            // F/m
  double mu0 = 1.2566370614359173e-6;  // 4 pi e-7 H/m

  Material(double eps_r, double mu_r, double rho);
  Material(double eps_r, double mu_r, double rho, double eps0, double mu0);
};

/// Cross-section tensor of a disk: 2 gamma0 / (gamma1 + gamma0) * I.
Mat2 disk_tensor(double gamma0, double gamma1);

/// Cross-section tensor of an arbitrary inclusion B' inside the unit disk,
/// by solving the 2D transmission problem on a truncated disk of radius
/// `truncation_radius` with a 5-point scheme and harmonic-mean coefficients
/// on the staggered edges, then integrating the corrector gradient over B'
/// with the midpoint rule. `resolution` is the number of grid cells per side.
Mat2 numeric_cross_section_tensor(
    const std::function<bool(double, double)>& inside, double gamma0,
    double gamma1, int resolution, double truncation_radius = 8.0);

/// Pointwise 3x3 tensors M(s) = V(s) diag(1, m2d) V(s)^T along a frame,
/// optionally with the in-plane block rotated by a twist angle theta(s).
struct TensorField {
  std::vector<double> nodes;
  std::vector<Mat3> tensors;
};

TensorField lift_tensor(const FrameField& frame, const Mat2& m2d,
                        const std::function<double(double)>* theta = nullptr);

/// One node of a frame, as consumed by the shape derivative.
struct FrameNode {
  Vec3 tangent, normal, binormal;
  double speed;
};

/// Derivative of the lifted tensor M(s) = V diag(1, c, c) V^T with respect
/// to the curve, in the direction of a perturbation with derivative hprime:
/// V'_h M V^T + V M V'^T with V'_h built columnwise from hprime.
Mat3 tensor_shape_derivative(const FrameNode& frame, double c,
                             const Vec3& hprime);

}  // namespace thintube
