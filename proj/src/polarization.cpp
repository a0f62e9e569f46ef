#include "thintube/polarization.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <limits>

#include "thintube/errors.hpp"
#include "thintube/log.hpp"

namespace thintube {

Material::Material(double eps_r, double mu_r, double rho)
    : eps_r(eps_r), mu_r(mu_r), rho(rho) {
  if (!(eps_r > 0.0) || !(mu_r > 0.0) || !(rho > 0.0))
    throw InputError("material parameters must be positive");
}

Material::Material(double eps_r, double mu_r, double rho, double eps0,
                   double mu0)
    : Material(eps_r, mu_r, rho) {
  if (!(eps0 > 0.0) || !(mu0 > 0.0))
    throw InputError("background constants must be positive");
  this->eps0 = eps0;
  this->mu0 = mu0;
}

Mat2 disk_tensor(double gamma0, double gamma1) {
  if (!(gamma0 > 0.0) || !(gamma1 > 0.0))
    throw InputError("disk_tensor: parameters must be positive");
  return (2.0 * gamma0 / (gamma1 + gamma0)) * Mat2::Identity();
}

Mat2 numeric_cross_section_tensor(
    const std::function<bool(double, double)>& inside, double gamma0,
    double gamma1, int resolution, double truncation_radius) {
  if (!(gamma0 > 0.0) || !(gamma1 > 0.0))
    throw InputError("numeric_cross_section_tensor: parameters must be positive");
  if (resolution < 8)
    throw InputError("numeric_cross_section_tensor: resolution too small");
  const double R = truncation_radius;
  const int res = resolution;
  const double h = 2.0 * R / res;

  // Cell-centered lattice: unknowns at cell midpoints of the truncated disk
  // |x| < R. Cell centers never fall exactly on the unit circle for even
  // resolutions, which keeps the indicator classification stable.
  auto coord = [&](int i) { return -R + (i + 0.5) * h; };
  std::vector<double> gamma(static_cast<size_t>(res) * res);
  std::vector<char> active(static_cast<size_t>(res) * res);
  std::vector<int> unknown(static_cast<size_t>(res) * res, -1);
  int count = 0;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const double x = coord(i), y = coord(j);
      const int id = j * res + i;
      gamma[id] = inside(x, y) ? gamma1 : gamma0;
      active[id] = (x * x + y * y < R * R) ? 1 : 0;
      if (active[id]) unknown[id] = count++;
    }
  }
  if (count == 0)
    throw InputError("numeric_cross_section_tensor: empty computational domain");

  auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
  auto cell_gamma = [&](int i, int j) {
    if (i < 0 || i >= res || j < 0 || j >= res) return gamma0;
    return gamma[j * res + i];
  };

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<size_t>(count) * 5);
  Eigen::VectorXd rhs1 = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd rhs2 = Eigen::VectorXd::Zero(count);
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const int id = j * res + i;
      if (!active[id]) continue;
      const int row = unknown[id];
      const double rc = std::hypot(coord(i), coord(j));
      double diag = 0.0;
      for (int d = 0; d < 4; ++d) {
        const int ii = i + di[d], jj = j + dj[d];
        const bool in_grid = ii >= 0 && ii < res && jj >= 0 && jj < res;
        const double ge = harmonic(gamma[id], cell_gamma(ii, jj));
        if (in_grid && active[jj * res + ii]) {
          diag += ge;
          triplets.emplace_back(row, unknown[jj * res + ii], -ge / (h * h));
        } else {
          // Outer ring: the corrector decays like 1/r, eliminate the ghost
          // value w_ghost = w * r_c / r_g into the diagonal.
          const double rg =
              std::hypot(coord(i) + di[d] * h, coord(j) + dj[d] * h);
          diag += ge * (1.0 - rc / rg);
        }
        // Discrete -div((gamma - gamma0) e_k) source on the same edges.
        const double sign = (di[d] + dj[d] > 0) ? 1.0 : -1.0;
        if (di[d] != 0) rhs1(row) += sign * (ge - gamma0) / h;
        if (dj[d] != 0) rhs2(row) += sign * (ge - gamma0) / h;
      }
      triplets.emplace_back(row, row, diag / (h * h));
    }
  }
  Eigen::SparseMatrix<double> A(count, count);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success)
    throw NumericalError("numeric_cross_section_tensor: factorization failed");
  const Eigen::VectorXd w1 = solver.solve(rhs1);
  const Eigen::VectorXd w2 = solver.solve(rhs2);
  if (solver.info() != Eigen::Success)
    throw NumericalError("numeric_cross_section_tensor: solve failed");
  log_debug("cross-section solve: ", count, " unknowns, resolution ", res);

  // Total potentials u_k = w_k + x_k; their face gradients, rescaled into
  // the cell's phase through the flux, avoid smearing the jump in grad w
  // across the interface.
  auto total = [&](const Eigen::VectorXd& w, int i, int j, int k) {
    const double x = (k == 0) ? coord(i) : coord(j);
    if (i < 0 || i >= res || j < 0 || j >= res) return x;
    const int id = j * res + i;
    return (active[id] ? w(unknown[id]) : 0.0) + x;
  };
  // Gradient of the total potential across the face (i0,j0)-(i1,j1), scaled
  // into the phase of the cell being integrated.
  auto face_gradient = [&](const Eigen::VectorXd& w, int k, int i0, int j0,
                           int i1, int j1, double phase) {
    const double ge = harmonic(cell_gamma(i0, j0), cell_gamma(i1, j1));
    return ge * (total(w, i1, j1, k) - total(w, i0, j0, k)) / (h * phase);
  };

  // Midpoint quadrature of grad w over the cells of B'.
  Mat2 m = Mat2::Zero();
  long cells_inside = 0;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      if (!inside(coord(i), coord(j))) continue;
      ++cells_inside;
      const double gc = gamma[j * res + i];
      for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXd& w = (k == 0) ? w1 : w2;
        const double wx = 0.5 * (face_gradient(w, k, i, j, i + 1, j, gc) +
                                 face_gradient(w, k, i - 1, j, i, j, gc));
        const double wy = 0.5 * (face_gradient(w, k, i, j, i, j + 1, gc) +
                                 face_gradient(w, k, i, j - 1, i, j, gc));
        m(0, k) += wx - ((k == 0) ? 1.0 : 0.0);
        m(1, k) += wy - ((k == 1) ? 1.0 : 0.0);
      }
    }
  }
  if (cells_inside == 0)
    throw InputError("numeric_cross_section_tensor: cross-section is empty");
  m /= static_cast<double>(cells_inside);
  m += Mat2::Identity();
  return 0.5 * (m + m.transpose());
}

TensorField lift_tensor(const FrameField& frame, const Mat2& m2d,
                        const std::function<double(double)>* theta) {
  TensorField field;
  field.nodes = frame.nodes;
  field.tensors.resize(frame.size());
  for (int i = 0; i < frame.size(); ++i) {
    Mat2 inplane = m2d;
    if (theta) {
      const double th = (*theta)(frame.nodes[i]);
      Mat2 rot;
      rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      inplane = rot * m2d * rot.inverse();
    }
    Mat3 V;
    V.col(0) = frame.tangent[i];
    V.col(1) = frame.normal[i];
    V.col(2) = frame.binormal[i];
    Mat3 D = Mat3::Zero();
    D(0, 0) = 1.0;
    D.block<2, 2>(1, 1) = inplane;
    field.tensors[i] = V * D * V.transpose();
  }
  return field;
}

Mat3 tensor_shape_derivative(const FrameNode& frame, double c,
                             const Vec3& hprime) {
  if (!(frame.speed > 0.0))
    throw NumericalError("tensor_shape_derivative: zero speed");
  const Vec3& t = frame.tangent;
  const Vec3& n = frame.normal;
  const Vec3& b = frame.binormal;
  const double hn = hprime.dot(n);
  const double hb = hprime.dot(b);
  Mat3 V;
  V.col(0) = t;
  V.col(1) = n;
  V.col(2) = b;
  Mat3 Vp;
  Vp.col(0) = (hn * n + hb * b) / frame.speed;
  Vp.col(1) = -(hn / frame.speed) * t;
  Vp.col(2) = -(hb / frame.speed) * t;
  Mat3 M = Mat3::Zero();
  M(0, 0) = 1.0;
  M(1, 1) = c;
  M(2, 2) = c;
  Mat3 d = Vp * M * V.transpose();
  return d + d.transpose();
}

}  // namespace thintube
