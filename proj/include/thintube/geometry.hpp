#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace thintube {

using Vec3 = Eigen::Vector3d;

/// Knot sequence 0 = t_1 < ... < t_n = 1 with n >= 4.
class Partition {
 public:
  explicit Partition(std::vector<double> knots);
  static Partition uniform(int n);

  int size() const { return static_cast<int>(knots_.size()); }
  int segments() const { return size() - 1; }
  double knot(int i) const { return knots_[i]; }
  const std::vector<double>& knots() const { return knots_; }

 private:
  std::vector<double> knots_;
};

/// Interpolating cubic spline p: [0,1] -> R^3 through one control point per
/// knot. Open curves use not-a-knot end conditions, closed curves periodic
/// ones. Evaluation is exactly linear in the control points.
class CurveSpline {
 public:
  static CurveSpline fit(const Partition& partition,
                         const std::vector<Vec3>& points, bool closed);

  /// Value (order 0) or derivative (order 1..3) at s in [0,1]. Order 3 is
  /// the piecewise constant third derivative, left limit at interior knots.
  Vec3 eval(double s, int order = 0) const;

  /// Dense matrix B with (B * c)(q) = d^order/ds^order of the spline with
  /// control coordinates c, evaluated at nodes[q]. Order 0, 1 or 2.
  static Eigen::MatrixXd basis_matrix(const Partition& partition,
                                      const std::vector<double>& nodes,
                                      int order, bool closed);

  const Partition& partition() const { return partition_; }
  const std::vector<Vec3>& control_points() const { return points_; }
  bool closed() const { return closed_; }

  /// Same partition and end conditions, new control points.
  CurveSpline with_points(const std::vector<Vec3>& points) const;

  /// Throws NumericalError if |p'| <= threshold at any of the nodes.
  void check_regular(const std::vector<double>& nodes,
                     double threshold = 1e-12) const;

 private:
  CurveSpline(Partition partition, std::vector<Vec3> points, bool closed,
              Eigen::MatrixXd moments);

  int segment_index(double s) const;

  Partition partition_;
  std::vector<Vec3> points_;
  bool closed_;
  Eigen::MatrixXd moments_;  // n x 3, second derivatives at knots
};

/// Orthonormal right-handed frame samples (t, n, b) along a curve together
/// with curvature, torsion and parametric speed |p'|.
struct FrameField {
  std::vector<double> nodes;
  std::vector<Vec3> tangent;
  std::vector<Vec3> normal;
  std::vector<Vec3> binormal;
  std::vector<double> curvature;  // |p' x p''| / |p'|^3
  std::vector<double> torsion;    // ((p' x p'') . p''') / |p' x p''|^2, 0 where undefined
  std::vector<double> speed;      // |p'|

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Frame along the spline at the given (ordered) nodes. Where the curve has
/// a usable second derivative the normal follows ((p' x p'') x p') / |.|;
/// elsewhere, and across sign flips of that formula, the previous frame is
/// propagated by double-reflection rotation-minimizing transport. The first
/// frame is seeded by the first usable normal, or an arbitrary unit vector
/// orthogonal to the tangent if the whole curve is degenerate.
FrameField frame_field(const CurveSpline& spline,
                       const std::vector<double>& nodes);

/// Local coordinates r(s, eta, zeta) = p(s) + [n b] R_theta (eta, zeta)^T
/// around a curve, with an in-plane rotation (twist) angle theta(s).
class TubeCoordinates {
 public:
  TubeCoordinates(CurveSpline curve, std::function<double(double)> theta,
                  double radius);

  Vec3 point(double s, double eta, double zeta) const;
  /// 1 - kappa(s) [cos(theta), -sin(theta)] . (eta, zeta)^T, always > 0
  /// inside the tube radius.
  double jacobian(double s, double eta, double zeta) const;

  double radius() const { return radius_; }
  const CurveSpline& curve() const { return curve_; }

 private:
  void frame_at(double s, Vec3& t, Vec3& n, Vec3& b, double& kappa) const;
  void check_radius(double eta, double zeta) const;

  CurveSpline curve_;
  std::function<double(double)> theta_;
  double radius_;
};

}  // namespace thintube
