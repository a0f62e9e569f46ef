// Timing comparison of the serial reference kernels against the
// OpenMP-parallel ones: far-field evaluation and residual/Jacobian assembly.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "thintube/builtin_curves.hpp"
#include "thintube/inverse.hpp"

using namespace thintube;

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
  using clock = std::chrono::steady_clock;
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  const Material material(2.5, 1.6, 0.03);
  const double k = 2.0958012150464055;
  const PlaneWave wave(k, Vec3(1.0, -1.0, 1.0).normalized(),
                       CVec3(Complex(-1.0, 0.0), Complex(0.0, 1.0),
                             Complex(1.0, 1.0)));
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads available: %d\n\n", threads);
  std::printf("%-28s %8s %10s %10s %8s\n", "kernel", "size", "serial[s]",
              "openmp[s]", "speedup");

  for (int N : {10, 20}) {
    const CurveSpline curve = builtin_curve("torus", 30);
    const QuadratureRule quad = QuadratureRule::simpson(curve.partition(), 11);
    FarFieldGrid serial_grid = FarFieldGrid::equiangular(N);
    FarFieldGrid parallel_grid = FarFieldGrid::equiangular(N);
    const double ts = seconds(
        [&] { far_field_serial(curve, material, wave, serial_grid, quad); },
        5);
    const double tp = seconds(
        [&] { far_field(curve, material, wave, parallel_grid, quad, 0); }, 5);
    bool identical = true;
    for (int g = 0; g < serial_grid.size(); ++g)
      identical = identical && serial_grid.samples[g] == parallel_grid.samples[g];
    std::printf("%-28s %8d %10.4f %10.4f %7.2fx %s\n", "far_field", N, ts, tp,
                ts / tp, identical ? "" : "MISMATCH");
  }

  for (int N : {6, 10}) {
    const CurveSpline curve = builtin_curve("torus", 30);
    const QuadratureRule quad = QuadratureRule::simpson(curve.partition(), 11);
    FarFieldGrid data = FarFieldGrid::equiangular(N);
    far_field_serial(curve, material, wave, data, quad);
    const CurveSpline guess = segment_curve(Vec3(0, 2, 0), Vec3(1, 2, 0), 30);
    const double ts = seconds(
        [&] {
          assemble_residual(guess, material, wave, data, quad, 0.2, 0.9, true,
                            1);
        },
        3);
    const double tp = seconds(
        [&] {
          assemble_residual(guess, material, wave, data, quad, 0.2, 0.9, true,
                            0);
        },
        3);
    std::printf("%-28s %8d %10.4f %10.4f %7.2fx\n", "assemble_residual", N,
                ts, tp, ts / tp);
  }
  return 0;
}
