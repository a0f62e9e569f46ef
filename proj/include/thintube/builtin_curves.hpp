#pragma once

#include <string>

#include "thintube/geometry.hpp"

namespace thintube {

bool is_builtin_curve(const std::string& name);

/// Named center curves sampled onto a spline with n uniform knots:
///   torus  - circle (cos 2 pi s + 1, sin 2 pi s + 1, -1), closed
///   figure - figure-eight-over-parabola curve, open
///   helix  - two-turn helix (cos 4 pi s, sin 4 pi s, 6 s), open
CurveSpline builtin_curve(const std::string& name, int n);

/// Straight segment from a to b on n uniform knots.
CurveSpline segment_curve(const Vec3& a, const Vec3& b, int n);

}  // namespace thintube
