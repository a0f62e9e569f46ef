#include "thintube/builtin_curves.hpp"

#include <cmath>
#include <numbers>

#include "thintube/errors.hpp"

namespace thintube {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

bool is_builtin_curve(const std::string& name) {
  return name == "torus" || name == "figure" || name == "helix";
}

CurveSpline builtin_curve(const std::string& name, int n) {
  const Partition partition = Partition::uniform(n);
  std::vector<Vec3> points(n);
  bool closed = false;
  if (name == "torus") {
    closed = true;
    for (int i = 0; i < n; ++i) {
      const double s = partition.knot(i);
      points[i] = Vec3(std::cos(kTwoPi * s) + 1.0, std::sin(kTwoPi * s) + 1.0,
                       -1.0);
    }
    points.back() = points.front();
  } else if (name == "figure") {
    for (int i = 0; i < n; ++i) {
      const double s = partition.knot(i);
      const double c = std::cos(kTwoPi * s);
      const double sn = std::sin(kTwoPi * s);
      points[i] = Vec3(2.0 * c / (1.0 + sn * sn),
                       4.0 * c * sn / (1.0 + 2.0 * sn * sn), 4.0 * s * s);
    }
  } else if (name == "helix") {
    for (int i = 0; i < n; ++i) {
      const double s = partition.knot(i);
      points[i] =
          Vec3(std::cos(2.0 * kTwoPi * s), std::sin(2.0 * kTwoPi * s), 6.0 * s);
    }
  } else {
    throw InputError("unknown built-in curve: " + name);
  }
  return CurveSpline::fit(partition, points, closed);
}

CurveSpline segment_curve(const Vec3& a, const Vec3& b, int n) {
  const Partition partition = Partition::uniform(n);
  std::vector<Vec3> points(n);
  for (int i = 0; i < n; ++i) {
    const double s = partition.knot(i);
    points[i] = (1.0 - s) * a + s * b;
  }
  return CurveSpline::fit(partition, points, false);
}

}  // namespace thintube
