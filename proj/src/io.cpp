#include "thintube/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "thintube/builtin_curves.hpp"
#include "thintube/errors.hpp"

namespace thintube {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class LineReader {
 public:
  LineReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw InputError("cannot open " + path);
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty()) return true;
    }
    return false;
  }

  std::string require() {
    std::string line;
    if (!next(line)) throw ParseError(path_, line_, "unexpected end of file");
    return line;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(path_, line_, what);
  }

  long line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  long line_ = 0;
};

double parse_finite(LineReader& reader, const std::string& token) {
  try {
    size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) reader.fail("trailing characters in '" + token + "'");
    if (!std::isfinite(v)) reader.fail("non-finite value '" + token + "'");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    reader.fail("expected a number, got '" + token + "'");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tokens;
  std::string t;
  while (is >> t) tokens.push_back(t);
  return tokens;
}

double keyed_value(LineReader& reader, const std::string& key) {
  const auto tokens = split(reader.require());
  if (tokens.size() != 2 || tokens[0] != key)
    reader.fail("expected '" + key + " <value>'");
  return parse_finite(reader, tokens[1]);
}

Vec3 keyed_vec3(LineReader& reader, const std::string& key) {
  const auto tokens = split(reader.require());
  if (tokens.size() != 4 || tokens[0] != key)
    reader.fail("expected '" + key + " <x> <y> <z>'");
  return Vec3(parse_finite(reader, tokens[1]), parse_finite(reader, tokens[2]),
              parse_finite(reader, tokens[3]));
}

}  // namespace

void write_far_field(const std::string& path, const FarFieldFile& file) {
  if (!file.grid.has_samples())
    throw InputError("write_far_field: grid carries no samples");
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  const int N = file.grid.N;
  out << "thintube-farfield v1\n";
  out << "N " << N << "\n";
  out << "k " << fmt(file.k) << "\n";
  out << "theta " << fmt(file.theta.x()) << " " << fmt(file.theta.y()) << " "
      << fmt(file.theta.z()) << "\n";
  out << "A_re " << fmt(file.A.x().real()) << " " << fmt(file.A.y().real())
      << " " << fmt(file.A.z().real()) << "\n";
  out << "A_im " << fmt(file.A.x().imag()) << " " << fmt(file.A.y().imag())
      << " " << fmt(file.A.z().imag()) << "\n";
  out << "eps_r " << fmt(file.eps_r) << "\n";
  out << "mu_r " << fmt(file.mu_r) << "\n";
  out << "rho " << fmt(file.rho) << "\n";
  for (int j = 1; j <= N - 1; ++j) {
    for (int l = 1; l <= 2 * N; ++l) {
      const int g = file.grid.flat_index(j, l);
      const Vec3& d = file.grid.directions[g];
      const CVec3& s = file.grid.samples[g];
      out << j << " " << l << " " << fmt(d.x()) << " " << fmt(d.y()) << " "
          << fmt(d.z());
      for (int m = 0; m < 3; ++m)
        out << " " << fmt(s[m].real()) << " " << fmt(s[m].imag());
      out << "\n";
    }
  }
  if (!out) throw InputError("failed writing " + path);
}

FarFieldFile read_far_field(const std::string& path) {
  LineReader reader(path);
  const std::string magic = reader.require();
  if (magic != "thintube-farfield v1")
    reader.fail("not a thintube far-field file");
  FarFieldFile file;
  const auto n_tokens = split(reader.require());
  if (n_tokens.size() != 2 || n_tokens[0] != "N")
    reader.fail("expected 'N <value>'");
  const int N = std::stoi(n_tokens[1]);
  if (N < 2) reader.fail("header N must be >= 2");
  file.k = keyed_value(reader, "k");
  file.theta = keyed_vec3(reader, "theta");
  const Vec3 a_re = keyed_vec3(reader, "A_re");
  const Vec3 a_im = keyed_vec3(reader, "A_im");
  for (int m = 0; m < 3; ++m) file.A[m] = Complex(a_re[m], a_im[m]);
  file.eps_r = keyed_value(reader, "eps_r");
  file.mu_r = keyed_value(reader, "mu_r");
  file.rho = keyed_value(reader, "rho");

  file.grid = FarFieldGrid::equiangular(N);
  file.grid.samples.assign(file.grid.directions.size(), CVec3::Zero());
  const int expected = 2 * N * (N - 1);
  int count = 0;
  std::string line;
  while (reader.next(line)) {
    const auto tokens = split(line);
    if (tokens.size() != 11)
      reader.fail("expected 11 fields per far-field record");
    const int j = std::stoi(tokens[0]);
    const int l = std::stoi(tokens[1]);
    if (j < 1 || j > N - 1 || l < 1 || l > 2 * N)
      reader.fail("record index (j=" + tokens[0] + ", l=" + tokens[1] +
                  ") outside the N=" + std::to_string(N) + " grid");
    const int g = file.grid.flat_index(j, l);
    Vec3 d(parse_finite(reader, tokens[2]), parse_finite(reader, tokens[3]),
           parse_finite(reader, tokens[4]));
    file.grid.directions[g] = d;
    file.grid.samples[g] = CVec3(
        Complex(parse_finite(reader, tokens[5]), parse_finite(reader, tokens[6])),
        Complex(parse_finite(reader, tokens[7]), parse_finite(reader, tokens[8])),
        Complex(parse_finite(reader, tokens[9]), parse_finite(reader, tokens[10])));
    ++count;
  }
  if (count != expected)
    throw ParseError(path, reader.line(),
                     "grid dimension mismatch: header N=" + std::to_string(N) +
                         " implies " + std::to_string(expected) +
                         " records, file has " + std::to_string(count));
  return file;
}

void write_curve(const std::string& path, const CurveSpline& curve) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  const int n = curve.partition().size();
  out << "thintube-curve v1\n";
  out << "closed " << (curve.closed() ? 1 : 0) << "\n";
  out << "n " << n << "\n";
  for (int i = 0; i < n; ++i) out << fmt(curve.partition().knot(i)) << "\n";
  for (int i = 0; i < n; ++i) {
    const Vec3& p = curve.control_points()[i];
    out << fmt(p.x()) << " " << fmt(p.y()) << " " << fmt(p.z()) << "\n";
  }
  if (!out) throw InputError("failed writing " + path);
}

CurveSpline read_curve(const std::string& path) {
  LineReader reader(path);
  if (reader.require() != "thintube-curve v1")
    reader.fail("not a thintube curve file");
  const auto closed_tokens = split(reader.require());
  if (closed_tokens.size() != 2 || closed_tokens[0] != "closed")
    reader.fail("expected 'closed <0|1>'");
  const bool closed = closed_tokens[1] == "1";
  const auto n_tokens = split(reader.require());
  if (n_tokens.size() != 2 || n_tokens[0] != "n")
    reader.fail("expected 'n <count>'");
  const int n = std::stoi(n_tokens[1]);
  if (n < 4) reader.fail("curve needs at least 4 knots");
  std::vector<double> knots(n);
  for (int i = 0; i < n; ++i) {
    const auto tokens = split(reader.require());
    if (tokens.size() != 1) reader.fail("expected one knot per line");
    knots[i] = parse_finite(reader, tokens[0]);
  }
  std::vector<Vec3> points(n);
  for (int i = 0; i < n; ++i) {
    const auto tokens = split(reader.require());
    if (tokens.size() != 3) reader.fail("expected 3 coordinates per line");
    points[i] = Vec3(parse_finite(reader, tokens[0]),
                     parse_finite(reader, tokens[1]),
                     parse_finite(reader, tokens[2]));
  }
  return CurveSpline::fit(Partition(std::move(knots)), points, closed);
}

void write_tensor_field(const std::string& path, const TensorField& field) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "thintube-tensors v1\n";
  out << "n " << field.nodes.size() << "\n";
  for (size_t i = 0; i < field.nodes.size(); ++i) {
    const Mat3& m = field.tensors[i];
    out << fmt(field.nodes[i]);
    // Upper triangle of the symmetric matrix.
    out << " " << fmt(m(0, 0)) << " " << fmt(m(0, 1)) << " " << fmt(m(0, 2))
        << " " << fmt(m(1, 1)) << " " << fmt(m(1, 2)) << " " << fmt(m(2, 2))
        << "\n";
  }
  if (!out) throw InputError("failed writing " + path);
}

double rel_diff(const FarFieldGrid& test, const FarFieldGrid& reference) {
  if (test.size() != reference.size())
    throw InputError("rel_diff: grid sizes differ");
  const double denom = sphere_norm(reference);
  if (!(denom > 0.0)) throw InputError("rel_diff: zero reference norm");
  FarFieldGrid diff = reference;
  for (int i = 0; i < diff.size(); ++i)
    diff.samples[i] = test.samples[i] - reference.samples[i];
  return sphere_norm(diff) / denom;
}

void write_plot_series(const std::string& path, const PlotSeries& series) {
  if (series.x.size() != series.y.size())
    throw InputError("plot series: x/y length mismatch");
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << "# " << series.label << "\n";
  if (series.annotate_slope)
    out << "# fitted_loglog_slope " << fmt(series.slope) << "\n";
  for (size_t i = 0; i < series.x.size(); ++i) {
    if (!std::isfinite(series.x[i]) || !std::isfinite(series.y[i]))
      throw InputError("plot series: non-finite value");
    out << fmt(series.x[i]) << " " << fmt(series.y[i]) << "\n";
  }
  if (!out) throw InputError("failed writing " + path);
}

PlotSeries export_convergence_series(
    const std::vector<std::pair<double, double>>& runs,
    const std::string& label, const std::string& path) {
  if (runs.size() < 2)
    throw InputError("convergence series needs at least 2 points");
  PlotSeries series;
  series.label = label;
  bool positive = true;
  for (const auto& [x, y] : runs) {
    series.x.push_back(x);
    series.y.push_back(y);
    positive = positive && x > 0.0 && y > 0.0;
  }
  if (positive) {
    // Least-squares slope in log-log coordinates.
    const size_t m = runs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double lx = std::log(series.x[i]);
      const double ly = std::log(series.y[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    series.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    series.annotate_slope = true;
  }
  write_plot_series(path, series);
  return series;
}

void write_iteration_log(const std::string& path,
                         const std::vector<IterationRecord>& history,
                         const std::string& stop_reason) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  for (const IterationRecord& rec : history) {
    nlohmann::json line;
    line["iteration"] = rec.iteration;
    line["event"] = rec.event;
    line["phi"] = rec.phi;
    line["data_term"] = rec.data_term;
    line["curvature_term"] = rec.curvature_term;
    line["length_term"] = rec.length_term;
    line["step"] = rec.step;
    line["alpha1"] = rec.alpha1;
    line["alpha2"] = rec.alpha2;
    nlohmann::json pts = nlohmann::json::array();
    for (const Vec3& p : rec.control_points)
      pts.push_back({p.x(), p.y(), p.z()});
    line["control_points"] = pts;
    out << line.dump() << "\n";
  }
  nlohmann::json tail;
  tail["stop_reason"] = stop_reason;
  out << tail.dump() << "\n";
  if (!out) throw InputError("failed writing " + path);
}

namespace {

Vec3 json_vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    throw InputError("config: expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

SolverConfig RunConfig::solver() const {
  SolverConfig cfg;
  cfg.alpha1 = alpha1;
  cfg.alpha2 = alpha2;
  cfg.s_max = s_max;
  cfg.line_search_steps = line_search_steps;
  cfg.max_iterations = max_iterations;
  cfg.check_derivatives = check_derivatives;
  cfg.workers = workers;
  cfg.validate();
  return cfg;
}

CurveSpline RunConfig::initial_curve() const {
  if (!initial_points.empty()) {
    const Partition partition = Partition::uniform(
        static_cast<int>(initial_points.size()));
    return CurveSpline::fit(partition, initial_points, initial_closed);
  }
  if (initial_name == "segment")
    return segment_curve(segment_start, segment_end, partition_n);
  if (is_builtin_curve(initial_name))
    return builtin_curve(initial_name, partition_n);
  throw InputError("config: no usable initial guess (name '" + initial_name +
                   "')");
}

RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("material")) {
      const auto& m = j["material"];
      cfg.eps_r = m.value("eps_r", cfg.eps_r);
      cfg.mu_r = m.value("mu_r", cfg.mu_r);
      cfg.rho = m.value("rho", cfg.rho);
      cfg.eps0 = m.value("eps0", cfg.eps0);
      cfg.mu0 = m.value("mu0", cfg.mu0);
    }
    if (j.contains("wave")) {
      const auto& w = j["wave"];
      if (w.contains("k")) {
        cfg.k = w["k"].get<double>();
      } else if (w.contains("frequency")) {
        const double omega = 2.0 * std::numbers::pi *
                             w["frequency"].get<double>();
        cfg.k = omega * std::sqrt(cfg.eps0 * cfg.mu0);
      }
      if (w.contains("theta")) cfg.theta = json_vec3(w["theta"]).normalized();
      if (w.contains("A_re") || w.contains("A_im")) {
        const Vec3 re =
            w.contains("A_re") ? json_vec3(w["A_re"]) : Vec3::Zero();
        const Vec3 im =
            w.contains("A_im") ? json_vec3(w["A_im"]) : Vec3::Zero();
        for (int m = 0; m < 3; ++m) cfg.A[m] = Complex(re[m], im[m]);
      }
    }
    if (cfg.k == 0.0) {
      // Default: 100 MHz plane wave in vacuum.
      const double omega = 2.0 * std::numbers::pi * 1.0e8;
      cfg.k = omega * std::sqrt(cfg.eps0 * cfg.mu0);
    }
    cfg.grid_N = j.value("grid_N", cfg.grid_N);
    cfg.quadrature_M = j.value("quadrature_M", cfg.quadrature_M);
    cfg.partition_n = j.value("partition_n", cfg.partition_n);
    if (j.contains("initial")) {
      const auto& init = j["initial"];
      if (init.contains("control_points")) {
        for (const auto& p : init["control_points"])
          cfg.initial_points.push_back(json_vec3(p));
        cfg.initial_closed = init.value("closed", false);
      } else if (init.contains("named")) {
        cfg.initial_name = init["named"].get<std::string>();
        if (cfg.initial_name == "segment") {
          cfg.segment_start = json_vec3(init.at("start"));
          cfg.segment_end = json_vec3(init.at("end"));
        }
      }
    }
    cfg.alpha1 = j.value("alpha1", cfg.alpha1);
    cfg.alpha2 = j.value("alpha2", cfg.alpha2);
    cfg.s_max = j.value("s_max", cfg.s_max);
    cfg.line_search_steps = j.value("line_search_steps", cfg.line_search_steps);
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.check_derivatives = j.value("check_derivatives", cfg.check_derivatives);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return cfg;
}

}  // namespace thintube
