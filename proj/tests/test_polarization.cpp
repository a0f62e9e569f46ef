#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "thintube/builtin_curves.hpp"
#include "thintube/errors.hpp"
#include "thintube/polarization.hpp"

using namespace thintube;

namespace {

FrameField random_frames(int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FrameField f;
  f.nodes.resize(count);
  f.tangent.resize(count);
  f.normal.resize(count);
  f.binormal.resize(count);
  f.curvature.assign(count, 0.0);
  f.torsion.assign(count, 0.0);
  f.speed.assign(count, 1.0);
  for (int i = 0; i < count; ++i) {
    f.nodes[i] = static_cast<double>(i) / count;
    Vec3 t(gauss(rng), gauss(rng), gauss(rng));
    t.normalize();
    Vec3 helper(gauss(rng), gauss(rng), gauss(rng));
    Vec3 n = (helper - helper.dot(t) * t).normalized();
    f.tangent[i] = t;
    f.normal[i] = n;
    f.binormal[i] = t.cross(n);
  }
  return f;
}

}  // namespace

TEST_CASE("material validation") {
  CHECK_THROWS_AS(Material(-1.0, 1.0, 0.1), InputError);
  CHECK_THROWS_AS(Material(1.0, 0.0, 0.1), InputError);
  CHECK_THROWS_AS(Material(1.0, 1.0, -0.1), InputError);
  const Material m(2.5, 1.6, 0.03);
  CHECK(m.eps0 == doctest::Approx(8.854e-12));
}

TEST_CASE("disk tensor closed form") {
  CHECK((disk_tensor(1.3, 1.3) - Mat2::Identity()).norm() < 1e-15);
  const Mat2 m = disk_tensor(1.0, 2.5);
  CHECK(m(0, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(m(1, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(m(0, 1) == 0.0);
  // Limiting cases of the contrast.
  CHECK(disk_tensor(1.0, 1e12)(0, 0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(disk_tensor(1.0, 1e-12)(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(disk_tensor(0.0, 1.0), InputError);
}

TEST_CASE("numeric cross-section tensor") {
  auto unit_disk = [](double x, double y) { return x * x + y * y < 1.0; };
  SUBCASE("no contrast gives the identity") {
    const Mat2 m = numeric_cross_section_tensor(unit_disk, 1.7, 1.7, 64);
    CHECK((m - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("disk agrees with the closed form and refines monotonically") {
    const Mat2 exact = disk_tensor(1.0, 2.5);
    double previous = 1e9;
    for (int res : {100, 200, 400}) {
      const Mat2 m = numeric_cross_section_tensor(unit_disk, 1.0, 2.5, res);
      const double err =
          (m - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
      CHECK(err < previous);
      previous = err;
      if (res == 400) CHECK(err < 0.02);
    }
  }
  SUBCASE("empty cross-section is rejected") {
    auto nothing = [](double, double) { return false; };
    CHECK_THROWS_AS(numeric_cross_section_tensor(nothing, 1.0, 2.0, 64),
                    InputError);
  }
}

TEST_CASE("lift tensor") {
  const FrameField frames = random_frames(40, 2024);
  SUBCASE("isotropic cross-section depends only on the tangent") {
    const double c = 4.0 / 7.0;
    const TensorField field = lift_tensor(frames, c * Mat2::Identity());
    for (int i = 0; i < frames.size(); ++i) {
      const Vec3& t = frames.tangent[i];
      const Mat3 expected =
          c * Mat3::Identity() + (1.0 - c) * (t * t.transpose());
      CHECK((field.tensors[i] - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("tangent is an eigenvector with eigenvalue one") {
    const TensorField field = lift_tensor(frames, disk_tensor(1.0, 0.2));
    for (int i = 0; i < frames.size(); ++i) {
      const Vec3& t = frames.tangent[i];
      CHECK((field.tensors[i] * t - t).norm() < 1e-10);
      CHECK((field.tensors[i] - field.tensors[i].transpose()).norm() < 1e-12);
    }
  }
  SUBCASE("quarter twist swaps an anisotropic in-plane block") {
    Mat2 aniso;
    aniso << 0.3, 0.0, 0.0, 0.8;
    std::function<double(double)> theta = [](double) {
      return std::numbers::pi / 2.0;
    };
    const TensorField field = lift_tensor(frames, aniso, &theta);
    for (int i = 0; i < frames.size(); ++i) {
      const Vec3& n = frames.normal[i];
      const Vec3& b = frames.binormal[i];
      CHECK(n.dot(field.tensors[i] * n) == doctest::Approx(0.8).epsilon(1e-12));
      CHECK(b.dot(field.tensors[i] * b) == doctest::Approx(0.3).epsilon(1e-12));
    }
  }
  SUBCASE("eigenvalue bounds for disk tensors") {
    for (double gamma_r : {0.2, 1.0, 2.5, 10.0}) {
      const TensorField field = lift_tensor(frames, disk_tensor(1.0, gamma_r));
      const double lo = std::min(1.0, 1.0 / gamma_r);
      const double hi = std::max(1.0, 1.0 / gamma_r);
      for (const Mat3& m : field.tensors) {
        Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
        CHECK(eig.eigenvalues().minCoeff() >= lo - 1e-12);
        CHECK(eig.eigenvalues().maxCoeff() <= hi + 1e-12);
      }
    }
  }
  SUBCASE("disk lift is frame invariant") {
    FrameField other = frames;
    // Rotate every (n, b) pair in its plane by a random angle.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < other.size(); ++i) {
      const double a = angle(rng);
      const Vec3 n =
          std::cos(a) * other.normal[i] + std::sin(a) * other.binormal[i];
      other.binormal[i] = other.tangent[i].cross(n);
      other.normal[i] = n;
    }
    const Mat2 disk = disk_tensor(1.0, 2.5);
    const TensorField a = lift_tensor(frames, disk);
    const TensorField b = lift_tensor(other, disk);
    for (int i = 0; i < frames.size(); ++i)
      CHECK((a.tensors[i] - b.tensors[i]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tensor shape derivative") {
  const FrameField frames = random_frames(12, 99);
  SUBCASE("tangential perturbation and isotropic tensor vanish") {
    for (int i = 0; i < frames.size(); ++i) {
      FrameNode node{frames.tangent[i], frames.normal[i], frames.binormal[i],
                     1.3};
      const Mat3 d_tangent =
          tensor_shape_derivative(node, 0.5, 2.0 * frames.tangent[i]);
      CHECK(d_tangent.cwiseAbs().maxCoeff() < 1e-14);
      const Mat3 d_iso = tensor_shape_derivative(node, 1.0, Vec3(0.4, -1, 2));
      CHECK(d_iso.cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("matches finite differences of the lifted tensor") {
    // Perturb a smooth curve and difference the lifted tensors; circular
    // cross-sections make the result frame independent.
    const CurveSpline helix = builtin_curve("helix", 24);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vec3> h_points(24);
    for (Vec3& p : h_points) p = Vec3(unit(rng), unit(rng), unit(rng));
    const CurveSpline h = helix.with_points(h_points);

    const std::vector<double> nodes = {0.12, 0.4, 0.77};
    const double c = 2.0 / (2.5 + 1.0);
    const Mat2 disk = c * Mat2::Identity();
    const FrameField base = frame_field(helix, nodes);
    const double eps = 1e-6;
    std::vector<Vec3> plus(24), minus(24);
    for (int i = 0; i < 24; ++i) {
      plus[i] = helix.control_points()[i] + eps * h_points[i];
      minus[i] = helix.control_points()[i] - eps * h_points[i];
    }
    const TensorField lift_plus =
        lift_tensor(frame_field(helix.with_points(plus), nodes), disk);
    const TensorField lift_minus =
        lift_tensor(frame_field(helix.with_points(minus), nodes), disk);
    for (size_t q = 0; q < nodes.size(); ++q) {
      const Mat3 fd =
          (lift_plus.tensors[q] - lift_minus.tensors[q]) / (2.0 * eps);
      FrameNode node{base.tangent[q], base.normal[q], base.binormal[q],
                     base.speed[q]};
      const Mat3 analytic =
          tensor_shape_derivative(node, c, h.eval(nodes[q], 1));
      CHECK((analytic - fd).cwiseAbs().maxCoeff() <
            1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
    }
  }
  SUBCASE("zero speed is rejected") {
    FrameNode node{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), 0.0};
    CHECK_THROWS_AS(tensor_shape_derivative(node, 0.5, Vec3::UnitY()),
                    NumericalError);
  }
}
