#include "thintube/forward.hpp"

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "thintube/errors.hpp"

namespace thintube {

namespace {
constexpr double kPi = std::numbers::pi;
const Complex kImag(0.0, 1.0);
}  // namespace

PlaneWave::PlaneWave(double k, const Vec3& theta, const CVec3& A)
    : k(k), theta(theta), A(A) {
  if (!(k > 0.0)) throw InputError("plane wave: wavenumber must be positive");
  if (std::abs(theta.norm() - 1.0) > 1e-12)
    throw InputError("plane wave: direction must be a unit vector");
  if (A.norm() == 0.0) throw InputError("plane wave: zero polarization");
  if (std::abs(A.real().dot(theta)) > 1e-12 * A.norm() ||
      std::abs(A.imag().dot(theta)) > 1e-12 * A.norm())
    throw InputError("plane wave: polarization must be orthogonal to theta");
}

FarFieldGrid FarFieldGrid::equiangular(int N) {
  if (N < 2) throw InputError("far-field grid: N must be >= 2");
  FarFieldGrid grid;
  grid.N = N;
  grid.directions.reserve(2 * N * (N - 1));
  grid.weights.reserve(2 * N * (N - 1));
  for (int j = 1; j <= N - 1; ++j) {
    const double tj = j * kPi / N;
    const double w = (kPi * kPi) / (N * N) * std::sin(tj);
    for (int l = 1; l <= 2 * N; ++l) {
      const double pl = (l - 1) * kPi / N;
      grid.directions.emplace_back(std::sin(tj) * std::cos(pl),
                                   std::sin(tj) * std::sin(pl), std::cos(tj));
      grid.weights.push_back(w);
    }
  }
  return grid;
}

double sphere_norm(const FarFieldGrid& grid) {
  if (!grid.has_samples())
    throw InputError("sphere_norm: grid carries no samples");
  double sum = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    sum += grid.weights[i] * grid.samples[i].squaredNorm();
  return std::sqrt(sum);
}

QuadratureRule QuadratureRule::simpson(const Partition& partition, int M) {
  if (M < 3 || M % 2 == 0)
    throw InputError("Simpson rule needs an odd node count M >= 3");
  QuadratureRule rule;
  rule.nodes_per_segment = M;
  rule.segments = partition.segments();
  const int total = (M - 1) * rule.segments + 1;
  rule.nodes.assign(total, 0.0);
  rule.weights.assign(total, 0.0);
  rule.segment_weights.assign(static_cast<size_t>(rule.segments) * M, 0.0);
  for (int seg = 0; seg < rule.segments; ++seg) {
    const double a = partition.knot(seg);
    const double b = partition.knot(seg + 1);
    const double h = (b - a) / (M - 1);
    for (int i = 0; i < M; ++i) {
      const int g = seg * (M - 1) + i;
      rule.nodes[g] = (i == M - 1) ? b : a + i * h;
      double w = (i == 0 || i == M - 1) ? h / 3.0
                 : (i % 2 == 1)         ? 4.0 * h / 3.0
                                        : 2.0 * h / 3.0;
      rule.weights[g] += w;
      rule.segment_weights[static_cast<size_t>(seg) * M + i] = w;
    }
  }
  return rule;
}

CurveQuadratureData CurveQuadratureData::build(const CurveSpline& spline,
                                               const Material& material,
                                               const QuadratureRule& quad) {
  CurveQuadratureData data;
  data.frame = frame_field(spline, quad.nodes);
  const int q = data.frame.size();
  data.position.resize(q);
  for (int i = 0; i < q; ++i) data.position[i] = spline.eval(quad.nodes[i], 0);
  const Mat2 m_mu = disk_tensor(1.0, material.mu_r);
  const Mat2 m_eps = disk_tensor(1.0, material.eps_r);
  data.tensor_mu = lift_tensor(data.frame, m_mu);
  data.tensor_eps = lift_tensor(data.frame, m_eps);
  return data;
}

CVec3 far_field_direction(const Vec3& xhat, const Material& material,
                          const PlaneWave& wave, const QuadratureRule& quad,
                          const CurveQuadratureData& data) {
  const double pref = (wave.k * material.rho) * (wave.k * material.rho) * kPi;
  const CVec3 curl_pol = complex_cross(wave.theta.cast<Complex>(), wave.A);
  const double mu_contrast = material.mu_r - 1.0;
  const double eps_contrast = material.eps_r - 1.0;
  CVec3 integral_mu = CVec3::Zero();
  CVec3 integral_eps = CVec3::Zero();
  const int q = static_cast<int>(quad.nodes.size());
  for (int i = 0; i < q; ++i) {
    const Vec3& p = data.position[i];
    const double phase = wave.k * (wave.theta - xhat).dot(p);
    const Complex e = std::exp(kImag * phase);
    const Complex ws = e * (quad.weights[i] * data.frame.speed[i]);
    if (mu_contrast != 0.0) {
      CVec3 v = data.tensor_mu.tensors[i].cast<Complex>() * curl_pol;
      integral_mu += ws * complex_cross(xhat.cast<Complex>(), v);
    }
    if (eps_contrast != 0.0) {
      CVec3 v = data.tensor_eps.tensors[i].cast<Complex>() * wave.A;
      // xhat x (v x xhat) projects v onto the plane orthogonal to xhat.
      integral_eps += ws * complex_cross(xhat.cast<Complex>(),
                                    complex_cross(v, xhat.cast<Complex>()));
    }
  }
  return pref * (-mu_contrast * integral_mu + eps_contrast * integral_eps);
}

void far_field_serial(const CurveSpline& spline, const Material& material,
                      const PlaneWave& wave, FarFieldGrid& grid,
                      const QuadratureRule& quad) {
  spline.check_regular(quad.nodes);
  const CurveQuadratureData data =
      CurveQuadratureData::build(spline, material, quad);
  grid.samples.resize(grid.directions.size());
  for (int g = 0; g < grid.size(); ++g)
    grid.samples[g] =
        far_field_direction(grid.directions[g], material, wave, quad, data);
}

void far_field(const CurveSpline& spline, const Material& material,
               const PlaneWave& wave, FarFieldGrid& grid,
               const QuadratureRule& quad, int workers) {
  spline.check_regular(quad.nodes);
  const CurveQuadratureData data =
      CurveQuadratureData::build(spline, material, quad);
  grid.samples.resize(grid.directions.size());
  const int g_count = grid.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) \
    num_threads(workers > 0 ? workers : omp_get_max_threads())
#endif
  for (int g = 0; g < g_count; ++g)
    grid.samples[g] =
        far_field_direction(grid.directions[g], material, wave, quad, data);
}

CMat3 dyadic_green(double k, const Vec3& x, const Vec3& y) {
  const Vec3 d = x - y;
  const double r = d.norm();
  if (r <= 0.0) throw NumericalError("dyadic Green's function at x = y");
  const Complex phi = std::exp(kImag * (k * r)) / (4.0 * kPi * r);
  const double kr = k * r;
  const Complex a = 1.0 + kImag / kr - 1.0 / (kr * kr);
  const Complex b = -1.0 - 3.0 * kImag / kr + 3.0 / (kr * kr);
  const Vec3 dh = d / r;
  CMat3 G = (phi * a) * CMat3::Identity();
  G += (phi * b) * (dh * dh.transpose()).cast<Complex>();
  return G;
}

CVec3 curl_green_apply(double k, const Vec3& x, const Vec3& y,
                       const CVec3& a) {
  const Vec3 d = x - y;
  const double r = d.norm();
  if (r <= 0.0) throw NumericalError("curl of Green's function at x = y");
  const Complex phi = std::exp(kImag * (k * r)) / (4.0 * kPi * r);
  const Complex dphi = (kImag * k - 1.0 / r) * phi;  // radial derivative
  const CVec3 grad = (dphi / r) * d.cast<Complex>();
  return complex_cross(grad, a);
}

std::vector<CVec3> near_field(const CurveSpline& spline,
                              const Material& material, const PlaneWave& wave,
                              const std::vector<Vec3>& points,
                              const QuadratureRule& quad) {
  spline.check_regular(quad.nodes);
  const CurveQuadratureData data =
      CurveQuadratureData::build(spline, material, quad);
  const double pref = material.rho * material.rho * kPi;
  const double mu_contrast = material.mu_r - 1.0;
  const double eps_contrast = material.eps_r - 1.0;
  const int q = static_cast<int>(quad.nodes.size());

  std::vector<CVec3> out(points.size(), CVec3::Zero());
  for (size_t pi = 0; pi < points.size(); ++pi) {
    const Vec3& x = points[pi];
    for (int i = 0; i < q; ++i)
      if ((x - data.position[i]).norm() <= 1e-3)
        throw InputError("near_field: observation point too close to curve");
    CVec3 acc = CVec3::Zero();
    for (int i = 0; i < q; ++i) {
      const Vec3& p = data.position[i];
      const Complex inc_phase = std::exp(kImag * (wave.k * wave.theta.dot(p)));
      const double ws = quad.weights[i] * data.frame.speed[i];
      if (mu_contrast != 0.0) {
        // curl E^i = i k theta x A e^{ik theta.x}
        CVec3 curl_inc =
            (kImag * wave.k * inc_phase) *
            complex_cross(wave.theta.cast<Complex>(), wave.A);
        CVec3 v = data.tensor_mu.tensors[i].cast<Complex>() * curl_inc;
        acc += (mu_contrast * ws) * curl_green_apply(wave.k, x, p, v);
      }
      if (eps_contrast != 0.0) {
        CVec3 v = data.tensor_eps.tensors[i].cast<Complex>() * (wave.A * inc_phase);
        acc += (eps_contrast * wave.k * wave.k * ws) *
               (dyadic_green(wave.k, x, p) * v);
      }
    }
    out[pi] = pref * acc;
  }
  return out;
}

}  // namespace thintube
