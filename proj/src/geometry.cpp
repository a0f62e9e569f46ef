#include "thintube/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thintube/errors.hpp"

namespace thintube {

namespace {

// Any unit vector orthogonal to t, picked deterministically.
Vec3 perpendicular_to(const Vec3& t) {
  Vec3 axis = Vec3::UnitX();
  if (std::abs(t.x()) > std::abs(t.y())) axis = Vec3::UnitY();
  if (std::abs(t.z()) < std::min(std::abs(t.x()), std::abs(t.y())))
    axis = Vec3::UnitZ();
  Vec3 n = axis - axis.dot(t) * t;
  return n.normalized();
}

// Double-reflection transport of (t0, n0) at x0 to the tangent t1 at x1
// (Wang et al., rotation minimizing frames).
Vec3 transport_normal(const Vec3& x0, const Vec3& t0, const Vec3& n0,
                      const Vec3& x1, const Vec3& t1) {
  Vec3 v1 = x1 - x0;
  double c1 = v1.squaredNorm();
  if (c1 < std::numeric_limits<double>::min()) {
    Vec3 n = n0 - n0.dot(t1) * t1;
    double len = n.norm();
    return len > 1e-14 ? Vec3(n / len) : perpendicular_to(t1);
  }
  Vec3 n0L = n0 - (2.0 / c1) * v1.dot(n0) * v1;
  Vec3 t0L = t0 - (2.0 / c1) * v1.dot(t0) * v1;
  Vec3 v2 = t1 - t0L;
  double c2 = v2.squaredNorm();
  Vec3 n1 = n0L;
  if (c2 >= std::numeric_limits<double>::min())
    n1 -= (2.0 / c2) * v2.dot(n1) * v2;
  // Re-orthogonalize against roundoff drift.
  n1 -= n1.dot(t1) * t1;
  double len = n1.norm();
  return len > 1e-14 ? Vec3(n1 / len) : perpendicular_to(t1);
}

}  // namespace

Partition::Partition(std::vector<double> knots) : knots_(std::move(knots)) {
  const int n = static_cast<int>(knots_.size());
  if (n < 4)
    throw InputError("partition needs at least 4 knots, got " +
                     std::to_string(n));
  if (knots_.front() != 0.0 || knots_.back() != 1.0)
    throw InputError("partition endpoints must be exactly 0 and 1");
  for (int i = 0; i + 1 < n; ++i)
    if (!(knots_[i] < knots_[i + 1]))
      throw InputError("partition knots must be strictly increasing");
}

Partition Partition::uniform(int n) {
  if (n < 4) throw InputError("partition needs at least 4 knots");
  std::vector<double> knots(n);
  for (int i = 0; i < n; ++i) knots[i] = static_cast<double>(i) / (n - 1);
  knots.front() = 0.0;
  knots.back() = 1.0;
  return Partition(std::move(knots));
}

namespace {

// Second derivatives ("moments") at the knots for each coordinate of the
// interpolation values. Rows of `values` correspond to knots.
Eigen::MatrixXd solve_moments(const Partition& partition,
                              const Eigen::MatrixXd& values, bool closed) {
  const int n = partition.size();
  const auto& t = partition.knots();
  std::vector<double> h(n - 1);
  for (int i = 0; i < n - 1; ++i) h[i] = t[i + 1] - t[i];

  if (!closed) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, values.cols());
    // Not-a-knot: continuous third derivative across t_2 and t_{n-1}.
    A(0, 0) = h[1];
    A(0, 1) = -(h[0] + h[1]);
    A(0, 2) = h[0];
    A(n - 1, n - 3) = h[n - 2];
    A(n - 1, n - 2) = -(h[n - 3] + h[n - 2]);
    A(n - 1, n - 1) = h[n - 3];
    for (int i = 1; i < n - 1; ++i) {
      A(i, i - 1) = h[i - 1] / 6.0;
      A(i, i) = (h[i - 1] + h[i]) / 3.0;
      A(i, i + 1) = h[i] / 6.0;
      rhs.row(i) = (values.row(i + 1) - values.row(i)) / h[i] -
                   (values.row(i) - values.row(i - 1)) / h[i - 1];
    }
    return A.partialPivLu().solve(rhs);
  }

  // Periodic: unknowns M_1..M_{n-1} with cyclic coupling, M_n = M_1.
  const int m = n - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, values.cols());
  for (int i = 0; i < m; ++i) {
    const int prev = (i + m - 1) % m;
    const int next = (i + 1) % m;
    const double hp = h[prev];
    const double hi = h[i];
    A(i, prev) += hp / 6.0;
    A(i, i) += (hp + hi) / 3.0;
    A(i, next) += hi / 6.0;
    // Divided differences d_i = (y_{i+1} - y_i)/h_i with cyclic values.
    Eigen::RowVectorXd di = (values.row(i + 1) - values.row(i)) / hi;
    Eigen::RowVectorXd dprev =
        (values.row(prev + 1) - values.row(prev)) / hp;
    rhs.row(i) = di - dprev;
  }
  Eigen::MatrixXd M = A.partialPivLu().solve(rhs);
  Eigen::MatrixXd full(n, values.cols());
  full.topRows(m) = M;
  full.row(n - 1) = M.row(0);
  return full;
}

}  // namespace

CurveSpline::CurveSpline(Partition partition, std::vector<Vec3> points,
                         bool closed, Eigen::MatrixXd moments)
    : partition_(std::move(partition)),
      points_(std::move(points)),
      closed_(closed),
      moments_(std::move(moments)) {}

CurveSpline CurveSpline::fit(const Partition& partition,
                             const std::vector<Vec3>& points, bool closed) {
  const int n = partition.size();
  if (static_cast<int>(points.size()) != n)
    throw InputError("spline_fit: expected " + std::to_string(n) +
                     " points, got " + std::to_string(points.size()));
  std::vector<Vec3> pts = points;
  if (closed) {
    double scale = 0.0;
    for (const Vec3& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    if ((pts.front() - pts.back()).norm() > 1e-8 * (1.0 + scale))
      throw InputError(
          "spline_fit: closed curve requires matching first/last points");
    pts.back() = pts.front();
  }
  Eigen::MatrixXd values(n, 3);
  for (int i = 0; i < n; ++i) values.row(i) = pts[i].transpose();
  Eigen::MatrixXd moments = solve_moments(partition, values, closed);
  return CurveSpline(partition, std::move(pts), closed, std::move(moments));
}

CurveSpline CurveSpline::with_points(const std::vector<Vec3>& points) const {
  return fit(partition_, points, closed_);
}

int CurveSpline::segment_index(double s) const {
  const auto& t = partition_.knots();
  const int n = partition_.size();
  // Last segment owns s = 1.
  int lo = static_cast<int>(std::upper_bound(t.begin(), t.end(), s) -
                            t.begin()) -
           1;
  return std::clamp(lo, 0, n - 2);
}

Vec3 CurveSpline::eval(double s, int order) const {
  if (!(s >= 0.0 && s <= 1.0))
    throw InputError("spline_eval: parameter " + std::to_string(s) +
                     " outside [0,1]");
  if (order < 0 || order > 3)
    throw InputError("spline_eval: order must be 0..3");
  const int i = segment_index(s);
  const auto& t = partition_.knots();
  const double h = t[i + 1] - t[i];
  const double a = (t[i + 1] - s) / h;
  const double b = (s - t[i]) / h;
  Vec3 yi(points_[i]), yj(points_[i + 1]);
  Vec3 Mi = moments_.row(i).transpose();
  Vec3 Mj = moments_.row(i + 1).transpose();
  switch (order) {
    case 0:
      return Mi * (h * h * a * a * a / 6.0) + Mj * (h * h * b * b * b / 6.0) +
             (yi - Mi * (h * h / 6.0)) * a + (yj - Mj * (h * h / 6.0)) * b;
    case 1:
      return -Mi * (h * a * a / 2.0) + Mj * (h * b * b / 2.0) +
             (yj - yi) / h - (Mj - Mi) * (h / 6.0);
    case 2:
      return Mi * a + Mj * b;
    default:
      return (Mj - Mi) / h;
  }
}

Eigen::MatrixXd CurveSpline::basis_matrix(const Partition& partition,
                                          const std::vector<double>& nodes,
                                          int order, bool closed) {
  if (order < 0 || order > 2)
    throw InputError("spline_basis_matrix: order must be 0..2");
  const int n = partition.size();
  const int ncp = closed ? n - 1 : n;  // closed splines share the end point
  Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(n, ncp);
  if (closed) unit(n - 1, 0) = 1.0;
  Eigen::MatrixXd moments = solve_moments(partition, unit, closed);

  const int q = static_cast<int>(nodes.size());
  Eigen::MatrixXd B(q, n);
  const auto& t = partition.knots();
  for (int row = 0; row < q; ++row) {
    const double s = nodes[row];
    if (!(s >= 0.0 && s <= 1.0))
      throw InputError("spline_basis_matrix: node outside [0,1]");
    int i = static_cast<int>(std::upper_bound(t.begin(), t.end(), s) -
                             t.begin()) -
            1;
    i = std::clamp(i, 0, n - 2);
    const double h = t[i + 1] - t[i];
    const double a = (t[i + 1] - s) / h;
    const double b = (s - t[i]) / h;
    Eigen::RowVectorXd coeffs = Eigen::RowVectorXd::Zero(ncp);
    auto value_row = [&](int knot) -> Eigen::RowVectorXd {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ncp);
      r(closed && knot == n - 1 ? 0 : knot) = 1.0;
      return r;
    };
    switch (order) {
      case 0:
        coeffs = moments.row(i) * (h * h * a * a * a / 6.0) +
                 moments.row(i + 1) * (h * h * b * b * b / 6.0) +
                 (value_row(i) - moments.row(i) * (h * h / 6.0)) * a +
                 (value_row(i + 1) - moments.row(i + 1) * (h * h / 6.0)) * b;
        break;
      case 1:
        coeffs = -moments.row(i) * (h * a * a / 2.0) +
                 moments.row(i + 1) * (h * b * b / 2.0) +
                 (value_row(i + 1) - value_row(i)) / h -
                 (moments.row(i + 1) - moments.row(i)) * (h / 6.0);
        break;
      default:
        coeffs = moments.row(i) * a + moments.row(i + 1) * b;
        break;
    }
    if (closed) {
      B.row(row).head(ncp) = coeffs;
      B(row, n - 1) = 0.0;  // last control point aliases the first
    } else {
      B.row(row) = coeffs;
    }
  }
  return B;
}

void CurveSpline::check_regular(const std::vector<double>& nodes,
                                double threshold) const {
  for (double s : nodes) {
    if (eval(s, 1).norm() <= threshold)
      throw NumericalError("curve is irregular: |p'(" + std::to_string(s) +
                           ")| <= " + std::to_string(threshold));
  }
}

FrameField frame_field(const CurveSpline& spline,
                       const std::vector<double>& nodes) {
  FrameField f;
  f.nodes = nodes;
  const int q = static_cast<int>(nodes.size());
  f.tangent.resize(q);
  f.normal.resize(q);
  f.binormal.resize(q);
  f.curvature.resize(q);
  f.torsion.resize(q);
  f.speed.resize(q);

  std::vector<Vec3> position(q), frenet_normal(q);
  std::vector<bool> frenet_ok(q);
  for (int i = 0; i < q; ++i) {
    position[i] = spline.eval(nodes[i], 0);
    Vec3 d1 = spline.eval(nodes[i], 1);
    Vec3 d2 = spline.eval(nodes[i], 2);
    Vec3 d3 = spline.eval(nodes[i], 3);
    const double speed = d1.norm();
    if (speed <= 1e-12)
      throw NumericalError("frame_field: vanishing speed at node " +
                           std::to_string(nodes[i]));
    f.speed[i] = speed;
    f.tangent[i] = d1 / speed;
    Vec3 cross = d1.cross(d2);
    const double cross_norm = cross.norm();
    f.curvature[i] = cross_norm / (speed * speed * speed);
    frenet_ok[i] = cross_norm / (speed * speed) > 1e-8;
    if (frenet_ok[i]) {
      f.torsion[i] = cross.dot(d3) / (cross_norm * cross_norm);
      frenet_normal[i] = cross.cross(d1).normalized();
    } else {
      f.torsion[i] = 0.0;
      frenet_normal[i] = Vec3::Zero();
    }
  }

  // Seed with the first usable Frenet normal.
  Vec3 seed = Vec3::Zero();
  int seed_index = -1;
  for (int i = 0; i < q; ++i) {
    if (frenet_ok[i]) {
      seed = frenet_normal[i];
      seed_index = i;
      break;
    }
  }
  if (seed_index < 0) {
    seed = perpendicular_to(f.tangent[0]);
    seed_index = 0;
  }

  // Walk outward from the seed in both directions; at each node keep the
  // Frenet normal when it agrees with the transported one (no sign flip),
  // otherwise keep the transported normal.
  auto choose = [&](int i, const Vec3& transported) {
    if (frenet_ok[i] && frenet_normal[i].dot(transported) > 0.0)
      f.normal[i] = frenet_normal[i];
    else
      f.normal[i] = transported;
    f.binormal[i] = f.tangent[i].cross(f.normal[i]);
  };
  f.normal[seed_index] = seed;
  f.binormal[seed_index] = f.tangent[seed_index].cross(seed);
  for (int i = seed_index + 1; i < q; ++i) {
    Vec3 transported =
        transport_normal(position[i - 1], f.tangent[i - 1], f.normal[i - 1],
                         position[i], f.tangent[i]);
    choose(i, transported);
  }
  for (int i = seed_index - 1; i >= 0; --i) {
    Vec3 transported =
        transport_normal(position[i + 1], f.tangent[i + 1], f.normal[i + 1],
                         position[i], f.tangent[i]);
    choose(i, transported);
  }
  return f;
}

TubeCoordinates::TubeCoordinates(CurveSpline curve,
                                 std::function<double(double)> theta,
                                 double radius)
    : curve_(std::move(curve)), theta_(std::move(theta)), radius_(radius) {
  if (!(radius_ > 0.0)) throw InputError("tube radius must be positive");
  double kappa_max = 0.0;
  const int samples = 512;
  for (int i = 0; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    Vec3 d1 = curve_.eval(s, 1);
    Vec3 d2 = curve_.eval(s, 2);
    const double speed = d1.norm();
    if (speed <= 1e-12)
      throw NumericalError("tube coordinates: curve irregular at s = " +
                           std::to_string(s));
    kappa_max = std::max(kappa_max, d1.cross(d2).norm() / (speed * speed * speed));
  }
  if (radius_ * kappa_max >= 1.0)
    throw InputError("tube radius violates r * kappa_max < 1 (kappa_max = " +
                     std::to_string(kappa_max) + ")");
}

void TubeCoordinates::check_radius(double eta, double zeta) const {
  if (eta * eta + zeta * zeta >= radius_ * radius_)
    throw InputError("tube coordinates: |(eta, zeta)| exceeds radius");
}

void TubeCoordinates::frame_at(double s, Vec3& t, Vec3& n, Vec3& b,
                               double& kappa) const {
  Vec3 d1 = curve_.eval(s, 1);
  Vec3 d2 = curve_.eval(s, 2);
  const double speed = d1.norm();
  if (speed <= 1e-12)
    throw NumericalError("tube coordinates: vanishing speed at s = " +
                         std::to_string(s));
  t = d1 / speed;
  Vec3 cross = d1.cross(d2);
  kappa = cross.norm() / (speed * speed * speed);
  if (cross.norm() / (speed * speed) > 1e-8)
    n = cross.cross(d1).normalized();
  else
    n = perpendicular_to(t);
  b = t.cross(n);
}

Vec3 TubeCoordinates::point(double s, double eta, double zeta) const {
  check_radius(eta, zeta);
  Vec3 t, n, b;
  double kappa;
  frame_at(s, t, n, b, kappa);
  const double th = theta_ ? theta_(s) : 0.0;
  const double u = std::cos(th) * eta - std::sin(th) * zeta;
  const double v = std::sin(th) * eta + std::cos(th) * zeta;
  return curve_.eval(s, 0) + n * u + b * v;
}

double TubeCoordinates::jacobian(double s, double eta, double zeta) const {
  check_radius(eta, zeta);
  Vec3 t, n, b;
  double kappa;
  frame_at(s, t, n, b, kappa);
  const double th = theta_ ? theta_(s) : 0.0;
  return 1.0 - kappa * (std::cos(th) * eta - std::sin(th) * zeta);
}

}  // namespace thintube
