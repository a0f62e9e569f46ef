#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "thintube/builtin_curves.hpp"
#include "thintube/errors.hpp"
#include "thintube/geometry.hpp"

using namespace thintube;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

CurveSpline circle_spline(int n) {
  const Partition partition = Partition::uniform(n);
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double t = partition.knot(i);
    pts[i] = Vec3(std::cos(kTwoPi * t), std::sin(kTwoPi * t), 0.0);
  }
  pts.back() = pts.front();
  return CurveSpline::fit(partition, pts, true);
}
}  // namespace

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(Partition({0.0, 0.5, 1.0}), InputError);
  CHECK_THROWS_AS(Partition({0.0, 0.5, 0.4, 1.0}), InputError);
  CHECK_THROWS_AS(Partition({0.1, 0.4, 0.7, 1.0}), InputError);
  CHECK(Partition::uniform(5).size() == 5);
}

TEST_CASE("not-a-knot spline reproduces cubics exactly") {
  auto cubic = [](double t) { return Vec3(t * t * t, t, 1.0); };
  for (int n : {4, 7, 11}) {
    const Partition partition = Partition::uniform(n);
    std::vector<Vec3> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = cubic(partition.knot(i));
    const CurveSpline spline = CurveSpline::fit(partition, pts, false);
    for (int i = 0; i <= 100; ++i) {
      const double s = i / 100.0;
      CHECK((spline.eval(s, 0) - cubic(s)).norm() < 1e-10);
      CHECK((spline.eval(s, 1) - Vec3(3 * s * s, 1.0, 0.0)).norm() < 1e-9);
    }
  }
}

TEST_CASE("constant control points give a degenerate curve") {
  const Partition partition = Partition::uniform(6);
  const std::vector<Vec3> pts(6, Vec3(1.0, 2.0, 3.0));
  const CurveSpline spline = CurveSpline::fit(partition, pts, false);
  CHECK(spline.eval(0.5, 1).norm() < 1e-14);
  CHECK_THROWS_AS(spline.check_regular({0.25, 0.5}), NumericalError);
  CHECK_THROWS_AS(frame_field(spline, {0.5}), NumericalError);
}

TEST_CASE("torus spline: interpolation nodes exact, O(h^4) refinement") {
  auto max_error = [](int n) {
    const CurveSpline spline = builtin_curve("torus", n);
    double err = 0.0;
    for (int i = 0; i <= 500; ++i) {
      const double s = i / 500.0;
      const Vec3 exact(std::cos(kTwoPi * s) + 1.0, std::sin(kTwoPi * s) + 1.0,
                       -1.0);
      err = std::max(err, (spline.eval(s, 0) - exact).norm());
    }
    return err;
  };
  const CurveSpline coarse = builtin_curve("torus", 10);
  for (int i = 0; i < 10; ++i) {
    const double t = coarse.partition().knot(i);
    const Vec3 exact(std::cos(kTwoPi * t) + 1.0, std::sin(kTwoPi * t) + 1.0,
                     -1.0);
    CHECK((coarse.eval(t, 0) - exact).norm() < 1e-13);
  }
  const double e10 = max_error(10);
  const double e20 = max_error(20);
  const double e40 = max_error(40);
  const double order1 = std::log2(e10 / e20) / std::log2(19.0 / 9.0) * 1.0;
  const double order2 = std::log2(e20 / e40) / std::log2(39.0 / 19.0) * 1.0;
  CHECK(order1 > 3.5);
  CHECK(order2 > 3.5);
}

TEST_CASE("spline_eval examples") {
  SUBCASE("straight segment derivative") {
    const CurveSpline seg = segment_curve(Vec3(0, 0, 0), Vec3(1, 0, 0), 8);
    for (double s : {0.0, 0.3, 0.77, 1.0})
      CHECK((seg.eval(s, 1) - Vec3(1, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("torus value at s = 0") {
    const CurveSpline torus = builtin_curve("torus", 30);
    CHECK((torus.eval(0.0, 0) - Vec3(2, 1, -1)).norm() < 1e-13);
  }
  SUBCASE("helix derivative at s = 0") {
    const CurveSpline helix = builtin_curve("helix", 30);
    const Vec3 expected(0.0, 2.0 * kTwoPi, 6.0);
    CHECK((helix.eval(0.0, 1) - expected).norm() < 0.25);
  }
  SUBCASE("outside parameter range") {
    const CurveSpline seg = segment_curve(Vec3(0, 0, 0), Vec3(1, 0, 0), 8);
    CHECK_THROWS_AS(seg.eval(-0.1, 0), InputError);
    CHECK_THROWS_AS(seg.eval(1.1, 0), InputError);
  }
}

TEST_CASE("basis matrix") {
  const Partition partition = Partition::uniform(9);
  SUBCASE("order 0 at knots selects control points") {
    const Eigen::MatrixXd B =
        CurveSpline::basis_matrix(partition, partition.knots(), 0, false);
    CHECK((B - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("order 1 on collinear points is a multiple of the direction") {
    const Vec3 d = Vec3(1.0, -2.0, 0.5);
    std::vector<Vec3> pts(9);
    for (int i = 0; i < 9; ++i) pts[i] = partition.knot(i) * d;
    std::vector<double> nodes = {0.1, 0.35, 0.5, 0.92};
    const Eigen::MatrixXd B =
        CurveSpline::basis_matrix(partition, nodes, 1, false);
    Eigen::VectorXd x(9), y(9), z(9);
    for (int i = 0; i < 9; ++i) {
      x(i) = pts[i].x();
      y(i) = pts[i].y();
      z(i) = pts[i].z();
    }
    for (size_t q = 0; q < nodes.size(); ++q) {
      const Vec3 v(B.row(q).dot(x), B.row(q).dot(y), B.row(q).dot(z));
      CHECK((v - v.dot(d) / d.squaredNorm() * d).norm() < 1e-10);
    }
  }
  SUBCASE("matches direct evaluation and finite differences") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vec3> pts(9);
    for (Vec3& p : pts) p = Vec3(unit(rng), unit(rng), unit(rng));
    const CurveSpline spline = CurveSpline::fit(partition, pts, false);
    std::vector<double> nodes;
    for (int i = 0; i <= 20; ++i) nodes.push_back(i / 20.0);
    for (int order : {0, 1, 2}) {
      const Eigen::MatrixXd B =
          CurveSpline::basis_matrix(partition, nodes, order, false);
      for (size_t q = 0; q < nodes.size(); ++q) {
        Vec3 via_basis = Vec3::Zero();
        for (int i = 0; i < 9; ++i) via_basis += B(q, i) * pts[i];
        CHECK((via_basis - spline.eval(nodes[q], order)).norm() < 1e-12);
      }
      // Finite differences in one control coordinate: evaluation is linear,
      // so the difference quotient matches the basis entry to roundoff.
      const double h = 1e-3;
      for (int i : {0, 4, 8}) {
        std::vector<Vec3> plus = pts, minus = pts;
        plus[i].y() += h;
        minus[i].y() -= h;
        const CurveSpline sp = CurveSpline::fit(partition, plus, false);
        const CurveSpline sm = CurveSpline::fit(partition, minus, false);
        for (size_t q = 0; q < nodes.size(); q += 5) {
          const double fd =
              (sp.eval(nodes[q], order).y() - sm.eval(nodes[q], order).y()) /
              (2.0 * h);
          CHECK(fd == doctest::Approx(B(q, i)).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("closed spline is periodic") {
  const CurveSpline torus = builtin_curve("torus", 20);
  CHECK((torus.eval(0.0, 0) - torus.eval(1.0, 0)).norm() < 1e-12);
  CHECK((torus.eval(0.0, 1) - torus.eval(1.0, 1)).norm() < 1e-9);
  CHECK((torus.eval(0.0, 2) - torus.eval(1.0, 2)).norm() < 1e-7);
}

TEST_CASE("frame field on the unit circle") {
  const CurveSpline circle = circle_spline(40);
  std::vector<double> nodes;
  for (int i = 0; i < 50; ++i) nodes.push_back(i / 50.0);
  const FrameField f = frame_field(circle, nodes);
  for (int i = 0; i < f.size(); ++i) {
    CHECK(f.curvature[i] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(std::abs(f.torsion[i]) < 1e-2);
    CHECK(std::abs(f.tangent[i].dot(f.normal[i])) < 1e-12);
    CHECK(std::abs(std::abs(f.binormal[i].z()) - 1.0) < 1e-4);
  }
}

TEST_CASE("frame field on the helix matches closed forms") {
  const double a = 2.0 * kTwoPi;  // angular rate 4 pi
  const double c = 6.0;
  const double kappa_exact = a * a / (a * a + c * c);
  const double tau_exact = a * c / (a * a + c * c);
  const CurveSpline helix = builtin_curve("helix", 200);
  std::vector<double> nodes;
  for (int i = 2; i <= 97; ++i) nodes.push_back(i / 100.0);
  const FrameField f = frame_field(helix, nodes);
  for (int i = 0; i < f.size(); ++i) {
    CHECK(f.curvature[i] == doctest::Approx(kappa_exact).epsilon(1e-3));
    CHECK(f.torsion[i] == doctest::Approx(tau_exact).epsilon(1e-3));
  }
  // Frenet consistency: dt/ds = kappa n per arc length, O(h^2) differences.
  for (int i = 1; i + 1 < f.size(); ++i) {
    const double ds = (nodes[i + 1] - nodes[i - 1]) * f.speed[i];
    const Vec3 dt = (f.tangent[i + 1] - f.tangent[i - 1]) / ds;
    CHECK((dt - f.curvature[i] * f.normal[i]).norm() < 2e-2 * f.curvature[i]);
    // Paper sign convention: db/ds = -tau n.
    const Vec3 db = (f.binormal[i + 1] - f.binormal[i - 1]) / ds;
    CHECK((db + f.torsion[i] * f.normal[i]).norm() < 2e-2 * f.torsion[i]);
  }
}

TEST_CASE("frame field orthonormality and continuity") {
  auto check_frames = [](const CurveSpline& spline) {
    std::vector<double> nodes;
    for (int i = 0; i <= 80; ++i) nodes.push_back(i / 80.0);
    const FrameField f = frame_field(spline, nodes);
    for (int i = 0; i < f.size(); ++i) {
      CHECK(std::abs(f.tangent[i].norm() - 1.0) < 1e-10);
      CHECK(std::abs(f.normal[i].norm() - 1.0) < 1e-10);
      CHECK(std::abs(f.binormal[i].norm() - 1.0) < 1e-10);
      CHECK(std::abs(f.tangent[i].dot(f.normal[i])) < 1e-10);
      CHECK(std::abs(f.tangent[i].dot(f.binormal[i])) < 1e-10);
      CHECK(std::abs(f.normal[i].dot(f.binormal[i])) < 1e-10);
      Eigen::Matrix3d V;
      V.col(0) = f.tangent[i];
      V.col(1) = f.normal[i];
      V.col(2) = f.binormal[i];
      CHECK(V.determinant() == doctest::Approx(1.0).epsilon(1e-10));
      if (i > 0) {
        // Bounded rotation between consecutive frames, and no sign flips.
        CHECK(f.normal[i].dot(f.normal[i - 1]) > 0.5);
        CHECK(f.tangent[i].dot(f.tangent[i - 1]) > 0.5);
      }
    }
  };
  check_frames(builtin_curve("helix", 60));
  check_frames(builtin_curve("figure", 60));
  // Straight segment: curvature vanishes, transport completes the frame.
  const CurveSpline seg = segment_curve(Vec3(0, 2, 0), Vec3(1, 2, 0), 12);
  std::vector<double> nodes = {0.0, 0.25, 0.5, 0.75, 1.0};
  const FrameField f = frame_field(seg, nodes);
  for (int i = 0; i < f.size(); ++i) {
    CHECK(f.curvature[i] < 1e-10);
    CHECK(std::abs(f.normal[i].dot(f.tangent[i])) < 1e-12);
    if (i > 0) CHECK((f.normal[i] - f.normal[i - 1]).norm() < 1e-10);
  }
}

TEST_CASE("tube coordinates") {
  const CurveSpline circle = circle_spline(100);
  SUBCASE("jacobian closed form") {
    TubeCoordinates tube(circle, [](double) { return 0.0; }, 0.5);
    CHECK(tube.jacobian(0.3, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(tube.jacobian(0.62, 0.3, 0.0) == doctest::Approx(0.7).epsilon(1e-3));
  }
  SUBCASE("straight curve jacobian is one") {
    const CurveSpline seg = segment_curve(Vec3(0, 0, 0), Vec3(2, 0, 0), 8);
    TubeCoordinates tube(seg, nullptr, 0.4);
    CHECK(tube.jacobian(0.5, 0.2, -0.1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("jacobian matches finite-difference determinant") {
    auto theta = [](double s) { return 0.4 * std::sin(kTwoPi * s); };
    TubeCoordinates tube(circle, theta, 0.5);
    const double s = 0.37, eta = 0.11, zeta = -0.07;
    const double h = 1e-5;
    Eigen::Matrix3d D;
    D.col(0) = (tube.point(s + h, eta, zeta) - tube.point(s - h, eta, zeta)) /
               (2 * h);
    D.col(1) = (tube.point(s, eta + h, zeta) - tube.point(s, eta - h, zeta)) /
               (2 * h);
    D.col(2) = (tube.point(s, eta, zeta + h) - tube.point(s, eta, zeta - h)) /
               (2 * h);
    // det Dr = |p'| (1 - kappa [cos, -sin] (eta, zeta)^T) for a curve
    // with parametric speed |p'|.
    const double speed = circle.eval(s, 1).norm();
    CHECK(D.determinant() / speed ==
          doctest::Approx(tube.jacobian(s, eta, zeta)).epsilon(1e-6));
  }
  SUBCASE("rotation identities") {
    std::vector<double> nodes = {0.3};
    const FrameField f = frame_field(circle, nodes);
    const double rho = 0.2;
    TubeCoordinates plain(circle, nullptr, 0.5);
    CHECK((plain.point(0.3, 0.0, 0.0) - circle.eval(0.3, 0)).norm() < 1e-14);
    CHECK((plain.point(0.3, rho, 0.0) -
           (circle.eval(0.3, 0) + rho * f.normal[0]))
              .norm() < 1e-12);
    TubeCoordinates quarter(circle, [](double) { return kTwoPi / 4.0; }, 0.5);
    CHECK((quarter.point(0.3, rho, 0.0) -
           (circle.eval(0.3, 0) + rho * f.binormal[0]))
              .norm() < 1e-12);
  }
  SUBCASE("radius bound enforced") {
    CHECK_THROWS_AS(TubeCoordinates(circle, nullptr, 1.5), InputError);
    TubeCoordinates tube(circle, nullptr, 0.5);
    CHECK_THROWS_AS(tube.point(0.2, 0.6, 0.0), InputError);
  }
}
