#include "thintube/inverse.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "thintube/errors.hpp"
#include "thintube/log.hpp"

namespace thintube {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kImag(0.0, 1.0);

// Curvature vector p''/|p'|^2 - (p'.p'') p'/|p'|^4 (= kappa * principal
// normal); its squared norm integrates to the curvature penalty.
Vec3 curvature_vector(const Vec3& d1, const Vec3& d2) {
  const double sp2 = d1.squaredNorm();
  return d2 / sp2 - (d1.dot(d2) / (sp2 * sp2)) * d1;
}

struct JacobianTerms {
  // One entry per quadrature node: polarization tensors applied to the wave
  // inputs, and their shape derivatives with respect to the three unit
  // directions of h'.
  std::vector<CVec3> mv_mu, mv_eps;
  std::vector<std::array<CVec3, 3>> dmv_mu, dmv_eps;
  std::vector<Vec3> d1, d2;
};

JacobianTerms precompute_terms(const CurveSpline& spline,
                               const Material& material, const PlaneWave& wave,
                               const QuadratureRule& quad,
                               const CurveQuadratureData& data,
                               bool with_derivatives) {
  JacobianTerms terms;
  const int q = static_cast<int>(quad.nodes.size());
  const CVec3 curl_pol = complex_cross(wave.theta.cast<Complex>(), wave.A);
  const double c_mu = 2.0 / (material.mu_r + 1.0);
  const double c_eps = 2.0 / (material.eps_r + 1.0);
  terms.mv_mu.resize(q);
  terms.mv_eps.resize(q);
  terms.d1.resize(q);
  terms.d2.resize(q);
  if (with_derivatives) {
    terms.dmv_mu.resize(q);
    terms.dmv_eps.resize(q);
  }
  for (int i = 0; i < q; ++i) {
    terms.mv_mu[i] = data.tensor_mu.tensors[i].cast<Complex>() * curl_pol;
    terms.mv_eps[i] = data.tensor_eps.tensors[i].cast<Complex>() * wave.A;
    terms.d1[i] = spline.eval(quad.nodes[i], 1);
    terms.d2[i] = spline.eval(quad.nodes[i], 2);
    if (!with_derivatives) continue;
    FrameNode node{data.frame.tangent[i], data.frame.normal[i],
                   data.frame.binormal[i], data.frame.speed[i]};
    for (int c = 0; c < 3; ++c) {
      const Mat3 dmu = tensor_shape_derivative(node, c_mu, Vec3::Unit(c));
      const Mat3 deps = tensor_shape_derivative(node, c_eps, Vec3::Unit(c));
      terms.dmv_mu[i][c] = dmu.cast<Complex>() * curl_pol;
      terms.dmv_eps[i][c] = deps.cast<Complex>() * wave.A;
    }
  }
  return terms;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(s_max > 0.0)) throw InputError("solver: s_max must be positive");
  if (alpha1 < 0.0 || alpha2 < 0.0)
    throw InputError("solver: regularization parameters must be nonnegative");
  if (line_search_steps < 1)
    throw InputError("solver: line_search_steps must be >= 1");
  if (max_iterations < 0)
    throw InputError("solver: max_iterations must be >= 0");
}

ResidualSystem assemble_residual(const CurveSpline& spline,
                                 const Material& material,
                                 const PlaneWave& wave,
                                 const FarFieldGrid& data,
                                 const QuadratureRule& quad, double alpha1,
                                 double alpha2, bool with_jacobian,
                                 int workers) {
  if (!data.has_samples())
    throw InputError("assemble_residual: data grid carries no samples");
  const double denom = sphere_norm(data);
  if (!(denom > 0.0)) throw InputError("assemble_residual: zero data norm");
  spline.check_regular(quad.nodes);

  const int n = spline.partition().size();
  const int cols = 3 * n;
  const int g_count = data.size();
  const int q_count = static_cast<int>(quad.nodes.size());
  const int data_rows = 6 * g_count;
  const int curv_rows = 3 * q_count;
  const int len_rows = n - 1;

  ResidualSystem sys;
  sys.data_rows = data_rows;
  sys.curvature_rows = curv_rows;
  sys.length_rows = len_rows;
  sys.data_norm = denom;
  sys.residual.setZero(data_rows + curv_rows + len_rows);
  if (with_jacobian)
    sys.jacobian.setZero(data_rows + curv_rows + len_rows, cols);

  const CurveQuadratureData cdata =
      CurveQuadratureData::build(spline, material, quad);
  const JacobianTerms terms =
      precompute_terms(spline, material, wave, quad, cdata, with_jacobian);

  const Eigen::MatrixXd B1 = CurveSpline::basis_matrix(
      spline.partition(), quad.nodes, 1, spline.closed());
  Eigen::MatrixXd B0, B2;
  if (with_jacobian) {
    B0 = CurveSpline::basis_matrix(spline.partition(), quad.nodes, 0,
                                   spline.closed());
    B2 = CurveSpline::basis_matrix(spline.partition(), quad.nodes, 2,
                                   spline.closed());
  }

  const double pref = (wave.k * material.rho) * (wave.k * material.rho) * kPi;
  const double mu_contrast = material.mu_r - 1.0;
  const double eps_contrast = material.eps_r - 1.0;

  // Far-field misfit block, Re/Im interleaved per component per direction.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) \
    num_threads(workers > 0 ? workers : omp_get_max_threads())
#endif
  for (int g = 0; g < g_count; ++g) {
    const Vec3& xhat = data.directions[g];
    const double scale = std::sqrt(data.weights[g]) / denom;
    const CVec3 cxhat = xhat.cast<Complex>();
    CVec3 value = CVec3::Zero();
    Eigen::Matrix<Complex, 3, Eigen::Dynamic> jac_block;
    if (with_jacobian) jac_block.setZero(3, cols);
    for (int i = 0; i < q_count; ++i) {
      const double phase = wave.k * (wave.theta - xhat).dot(cdata.position[i]);
      const Complex e = std::exp(kImag * phase);
      const double speed = cdata.frame.speed[i];
      const Complex ws = e * (quad.weights[i] * speed);
      const CVec3 x_mu = complex_cross(cxhat, terms.mv_mu[i]);
      const CVec3 p_eps =
          complex_cross(cxhat, complex_cross(terms.mv_eps[i], cxhat));
      const CVec3 combined = -mu_contrast * x_mu + eps_contrast * p_eps;
      value += ws * combined;
      if (!with_jacobian) continue;
      const Complex wq_e = e * quad.weights[i];
      for (int c = 0; c < 3; ++c) {
        // T'_1: transport of the phase; T'_2: tensor shape derivative;
        // T'_3: derivative of the parametric speed.
        const Complex phase_coef =
            kImag * wave.k * (wave.theta[c] - xhat[c]) * speed;
        const CVec3 contrib0 = (wq_e * phase_coef) * combined;
        CVec3 tensor_part =
            -mu_contrast * complex_cross(cxhat, terms.dmv_mu[i][c]) +
            eps_contrast *
                complex_cross(cxhat,
                              complex_cross(terms.dmv_eps[i][c], cxhat));
        const CVec3 contrib1 =
            wq_e * (speed * tensor_part + (terms.d1[i][c] / speed) * combined);
        for (int cp = 0; cp < n; ++cp) {
          jac_block.col(3 * cp + c) +=
              contrib0 * B0(i, cp) + contrib1 * B1(i, cp);
        }
      }
    }
    value *= pref;
    for (int m = 0; m < 3; ++m) {
      const Complex r = scale * (value[m] - data.samples[g][m]);
      sys.residual(6 * g + 2 * m) = r.real();
      sys.residual(6 * g + 2 * m + 1) = r.imag();
      if (with_jacobian) {
        for (int col = 0; col < cols; ++col) {
          const Complex d = scale * pref * jac_block(m, col);
          sys.jacobian(6 * g + 2 * m, col) = d.real();
          sys.jacobian(6 * g + 2 * m + 1, col) = d.imag();
        }
      }
    }
  }

  // Curvature penalty block: alpha1 sqrt(w_q) times the curvature vector.
  for (int i = 0; i < q_count; ++i) {
    const Vec3& d1 = terms.d1[i];
    const Vec3& d2 = terms.d2[i];
    const double sw = alpha1 * std::sqrt(quad.weights[i]);
    const Vec3 cv = curvature_vector(d1, d2);
    const int row0 = data_rows + 3 * i;
    sys.residual.segment<3>(row0) = sw * cv;
    if (!with_jacobian) continue;
    const double sp2 = d1.squaredNorm();
    const double sp4 = sp2 * sp2;
    const double dot12 = d1.dot(d2);
    for (int cp = 0; cp < n; ++cp) {
      const double b1 = B1(i, cp);
      const double b2 = B2(i, cp);
      if (b1 == 0.0 && b2 == 0.0) continue;
      for (int c = 0; c < 3; ++c) {
        Vec3 dcv = -(2.0 * b1 * d1[c] / sp4) * d2 -
                   ((b1 * d2[c] + b2 * d1[c]) / sp4) * d1 +
                   (4.0 * dot12 * b1 * d1[c] / (sp4 * sp2)) * d1;
        dcv[c] += b2 / sp2;
        dcv -= (dot12 * b1 / sp4) * Vec3::Unit(c);
        sys.jacobian.block<3, 1>(row0, 3 * cp + c) = sw * dcv;
      }
    }
  }

  // Segment-length penalty block.
  const int segs = quad.segments;
  const int M = quad.nodes_per_segment;
  double total_length = 0.0;
  std::vector<double> seg_length(segs, 0.0);
  std::vector<double> speed(q_count);
  for (int i = 0; i < q_count; ++i) speed[i] = terms.d1[i].norm();
  for (int seg = 0; seg < segs; ++seg) {
    for (int local = 0; local < M; ++local) {
      const int g = quad.segment_start(seg) + local;
      seg_length[seg] += quad.segment_weight(seg, local) * speed[g];
    }
    total_length += seg_length[seg];
  }
  for (int j = 0; j < segs; ++j) {
    const int row = data_rows + curv_rows + j;
    sys.residual(row) = alpha2 * (total_length / segs - seg_length[j]);
    if (!with_jacobian) continue;
    for (int cp = 0; cp < n; ++cp) {
      for (int c = 0; c < 3; ++c) {
        double dl = 0.0;
        for (int i = 0; i < q_count; ++i)
          dl += quad.weights[i] * B1(i, cp) * terms.d1[i][c] / speed[i];
        double dlj = 0.0;
        for (int local = 0; local < M; ++local) {
          const int g = quad.segment_start(j) + local;
          dlj += quad.segment_weight(j, local) * B1(g, cp) *
                 terms.d1[g][c] / speed[g];
        }
        sys.jacobian(row, 3 * cp + c) = alpha2 * (dl / segs - dlj);
      }
    }
  }
  return sys;
}

std::vector<CVec3> frechet_T(const CurveSpline& spline,
                             const Material& material, const PlaneWave& wave,
                             const FarFieldGrid& grid,
                             const QuadratureRule& quad,
                             const std::vector<Vec3>& h_points) {
  spline.check_regular(quad.nodes);
  const CurveSpline h = spline.with_points(h_points);
  const CurveQuadratureData cdata =
      CurveQuadratureData::build(spline, material, quad);

  const double pref = (wave.k * material.rho) * (wave.k * material.rho) * kPi;
  const double mu_contrast = material.mu_r - 1.0;
  const double eps_contrast = material.eps_r - 1.0;
  const double c_mu = 2.0 / (material.mu_r + 1.0);
  const double c_eps = 2.0 / (material.eps_r + 1.0);
  const CVec3 curl_pol = complex_cross(wave.theta.cast<Complex>(), wave.A);
  const int q_count = static_cast<int>(quad.nodes.size());

  std::vector<CVec3> mv_mu(q_count), mv_eps(q_count);
  std::vector<CVec3> dmv_mu(q_count), dmv_eps(q_count);
  std::vector<Vec3> hval(q_count), d1(q_count);
  std::vector<double> tangential(q_count);
  for (int i = 0; i < q_count; ++i) {
    mv_mu[i] = cdata.tensor_mu.tensors[i].cast<Complex>() * curl_pol;
    mv_eps[i] = cdata.tensor_eps.tensors[i].cast<Complex>() * wave.A;
    hval[i] = h.eval(quad.nodes[i], 0);
    const Vec3 hprime = h.eval(quad.nodes[i], 1);
    d1[i] = spline.eval(quad.nodes[i], 1);
    tangential[i] = d1[i].dot(hprime) / cdata.frame.speed[i];
    FrameNode node{cdata.frame.tangent[i], cdata.frame.normal[i],
                   cdata.frame.binormal[i], cdata.frame.speed[i]};
    dmv_mu[i] = tensor_shape_derivative(node, c_mu, hprime).cast<Complex>() *
                curl_pol;
    dmv_eps[i] = tensor_shape_derivative(node, c_eps, hprime).cast<Complex>() *
                 wave.A;
  }

  std::vector<CVec3> out(grid.size(), CVec3::Zero());
  for (int g = 0; g < grid.size(); ++g) {
    const Vec3& xhat = grid.directions[g];
    const CVec3 cxhat = xhat.cast<Complex>();
    CVec3 acc = CVec3::Zero();
    for (int i = 0; i < q_count; ++i) {
      const double phase = wave.k * (wave.theta - xhat).dot(cdata.position[i]);
      const Complex e = std::exp(kImag * phase);
      const double speed = cdata.frame.speed[i];
      const Complex wq_e = e * quad.weights[i];
      const CVec3 x_mu = complex_cross(cxhat, mv_mu[i]);
      const CVec3 p_eps = complex_cross(cxhat, complex_cross(mv_eps[i], cxhat));
      const CVec3 combined = -mu_contrast * x_mu + eps_contrast * p_eps;
      const Complex phase_term =
          kImag * wave.k * (wave.theta - xhat).dot(hval[i]) * speed;
      const CVec3 tensor_part =
          -mu_contrast * complex_cross(cxhat, dmv_mu[i]) +
          eps_contrast * complex_cross(cxhat, complex_cross(dmv_eps[i], cxhat));
      acc += wq_e * (phase_term * combined + speed * tensor_part +
                     tangential[i] * combined);
    }
    out[g] = pref * acc;
  }
  return out;
}

Eigen::VectorXd gauss_newton_step(const ResidualSystem& system) {
  if (system.jacobian.size() == 0)
    throw InputError("gauss_newton_step: system assembled without Jacobian");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system.jacobian);
  if (qr.rank() < system.jacobian.cols()) {
    log_info("gauss_newton_step: rank-deficient Jacobian (rank ", qr.rank(),
             " of ", system.jacobian.cols(), "), adding Levenberg shift");
    const double shift = 1e-10 * system.jacobian.squaredNorm();
    const Eigen::MatrixXd normal =
        system.jacobian.transpose() * system.jacobian +
        shift * Eigen::MatrixXd::Identity(system.jacobian.cols(),
                                          system.jacobian.cols());
    return normal.ldlt().solve(-system.jacobian.transpose() * system.residual);
  }
  return qr.solve(-system.residual);
}

double golden_section_search(const std::function<double(double)>& phi,
                             double s_max, int steps,
                             double improvement_margin) {
  if (!(s_max > 0.0)) throw InputError("line search: s_max must be positive");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double phi0 = phi(0.0);
  const double margin = improvement_margin * std::abs(phi0);

  double a = 0.0, b = s_max;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = phi(c);
  double fd = phi(d);
  double best_s = c, best_f = fc;
  if (fd < best_f) {
    best_s = d;
    best_f = fd;
  }
  for (int step = 0; step < steps; ++step) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = phi(c);
      if (fc < best_f) {
        best_f = fc;
        best_s = c;
      }
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = phi(d);
      if (fd < best_f) {
        best_f = fd;
        best_s = d;
      }
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = phi(mid);
  if (fmid < phi0 - margin) return mid;
  if (best_f < phi0 - margin) return best_s;
  return 0.0;
}

namespace {

std::vector<Vec3> to_points(const Eigen::VectorXd& x) {
  std::vector<Vec3> pts(x.size() / 3);
  for (size_t i = 0; i < pts.size(); ++i)
    pts[i] = Vec3(x(3 * i), x(3 * i + 1), x(3 * i + 2));
  return pts;
}

Eigen::VectorXd to_vector(const std::vector<Vec3>& pts) {
  Eigen::VectorXd x(3 * pts.size());
  for (size_t i = 0; i < pts.size(); ++i) x.segment<3>(3 * i) = pts[i];
  return x;
}

}  // namespace

ReconstructionResult reconstruct(const CurveSpline& initial,
                                 const Material& material,
                                 const PlaneWave& wave,
                                 const FarFieldGrid& data,
                                 const QuadratureRule& quad,
                                 const SolverConfig& config) {
  config.validate();
  if (!data.has_samples() || !(sphere_norm(data) > 0.0))
    throw InputError("reconstruct: data grid is empty or has zero norm");

  double alpha1 = config.alpha1;
  double alpha2 = config.alpha2;
  // Closed splines alias the last control point to the first; optimize over
  // the distinct points only.
  const int n = initial.partition().size();
  const int free_points = initial.closed() ? n - 1 : n;
  auto expand = [&](const Eigen::VectorXd& coords) {
    std::vector<Vec3> pts = to_points(coords);
    if (initial.closed()) pts.push_back(pts.front());
    return pts;
  };
  std::vector<Vec3> start(initial.control_points().begin(),
                          initial.control_points().begin() + free_points);
  Eigen::VectorXd x = to_vector(start);
  CurveSpline current = initial;

  ReconstructionResult result{initial, {}, "max_iterations"};

  auto objective = [&](const Eigen::VectorXd& coords) -> double {
    try {
      const CurveSpline trial = initial.with_points(expand(coords));
      return assemble_residual(trial, material, wave, data, quad, alpha1,
                               alpha2, false, config.workers)
          .phi();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  auto assemble = [&]() {
    ResidualSystem sys = assemble_residual(current, material, wave, data, quad,
                                           alpha1, alpha2, true,
                                           config.workers);
    if (initial.closed())
      sys.jacobian = sys.jacobian.leftCols(3 * free_points).eval();
    return sys;
  };
  ResidualSystem sys = assemble();

  auto record = [&](int iter, double step, const std::string& event) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.control_points = current.control_points();
    rec.phi = sys.phi();
    rec.data_term = sys.data_term();
    rec.curvature_term = sys.curvature_term();
    rec.length_term = sys.length_term();
    rec.step = step;
    rec.alpha1 = alpha1;
    rec.alpha2 = alpha2;
    rec.event = event;
    result.history.push_back(std::move(rec));
  };

  for (int iter = 0; iter <= config.max_iterations; ++iter) {
    if (iter == config.max_iterations) {
      record(iter, 0.0, "stop");
      result.stop_reason = "max_iterations";
      break;
    }
    const Eigen::VectorXd direction = gauss_newton_step(sys);
    auto phi_of_step = [&](double s) -> double {
      if (s == 0.0) return sys.phi();
      return objective(x + s * direction);
    };
    // A direction below representable curve changes counts as a stall.
    double step = 0.0;
    if (direction.norm() > 1e-14 * (1.0 + x.norm()))
      step = golden_section_search(phi_of_step, config.s_max,
                                   config.line_search_steps,
                                   config.improvement_margin);
    if (step > 0.0) {
      x += step * direction;
      current = initial.with_points(expand(x));
      sys = assemble();
      record(iter, step, "step");
      log_debug("iter ", iter, " step ", step, " phi ", sys.phi());
      continue;
    }
    // Stalled line search: decide by the dominant block of Phi_N.
    const double phi = sys.phi();
    const double data_share = phi > 0.0 ? sys.data_term() / phi : 1.0;
    const double curv_share = phi > 0.0 ? sys.curvature_term() / phi : 0.0;
    const double len_share = phi > 0.0 ? sys.length_term() / phi : 0.0;
    const double thr = config.dominance_threshold;
    std::string event;
    if (data_share > thr) {
      event = "stop";
    } else if (curv_share > thr) {
      event = "halve_alpha1";
    } else if (len_share > thr) {
      event = "halve_alpha2";
    } else if (curv_share + len_share > thr) {
      // No single majority; the penalties jointly dominate, reduce the
      // larger one (curvature first on ties).
      event = (curv_share >= len_share) ? "halve_alpha1" : "halve_alpha2";
    } else {
      event = "stop";
    }
    if (event == "stop") {
      record(iter, 0.0, "stop");
      result.stop_reason = "data_dominates";
      break;
    }
    if (event == "halve_alpha1")
      alpha1 /= 2.0;
    else
      alpha2 /= 2.0;
    sys = assemble();
    record(iter, 0.0, event);
    log_debug("iter ", iter, " ", event, " -> alpha1 ", alpha1, " alpha2 ",
              alpha2);
  }
  result.curve = current;
  return result;
}

FarFieldGrid add_noise(const FarFieldGrid& data, double level, uint64_t seed) {
  if (level < 0.0) throw InputError("add_noise: negative noise level");
  if (!data.has_samples())
    throw InputError("add_noise: data grid carries no samples");
  FarFieldGrid out = data;
  if (level == 0.0) return out;

  double weight_sum = 0.0;
  for (double w : data.weights) weight_sum += w;
  const double sigma = level * sphere_norm(data) / std::sqrt(2.0 * weight_sum);

  std::mt19937_64 rng(seed);
  auto uniform_pm1 = [&rng]() {
    // 53-bit mantissa draw mapped to [-1, 1); reproducible across platforms.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  };
  for (int g = 0; g < out.size(); ++g) {
    for (int m = 0; m < 3; ++m) {
      const double re = uniform_pm1();
      const double im = uniform_pm1();
      out.samples[g][m] += sigma * Complex(re, im);
    }
  }
  return out;
}

}  // namespace thintube
