#include "hardyfem/study.hpp"

#include "hardyfem/analytic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hardyfem {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Theoretical error predictor for the subcritical rates by dimension:
// h^{2m} below the threshold order, h^2 |log h| at m = 1 for N >= 5, and
// h^2 at the smooth end m = (N-2)/2.
double subcritical_predictor(int N, double m, double h) {
  const double top = 0.5 * (N - 2);
  if (N >= 5) {
    if (m < 1.0) return std::pow(h, 2.0 * m);
    if (m == 1.0) return h * h * std::abs(std::log(h));
    return h * h;
  }
  if (m < top) return std::pow(h, 2.0 * m);
  return h * h;
}

double theoretical_scaled_error(const StudySpec& spec, double err, double h) {
  const double logh = std::abs(std::log(h));
  switch (spec.problem) {
    case StudyProblem::hardy:
      return err * logh * logh;
    case StudyProblem::critical:
      return err * logh;
    case StudyProblem::subcritical: {
      const double m = std::sqrt(hardy_const(spec.N) - spec.lambda);
      return err / subcritical_predictor(spec.N, m, h);
    }
  }
  return err;
}

}  // namespace

std::string to_string(StudyProblem p) {
  switch (p) {
    case StudyProblem::hardy: return "hardy";
    case StudyProblem::critical: return "critical";
    case StudyProblem::subcritical: return "subcritical";
  }
  return "unknown";
}

StudyReport run_study(const StudySpec& spec) {
  if (spec.levels.empty()) throw std::invalid_argument("run_study: empty level list");
  for (size_t i = 1; i < spec.levels.size(); ++i)
    if (spec.levels[i] <= spec.levels[i - 1])
      throw std::invalid_argument("run_study: levels must be increasing");
  if (spec.dim != 1 && spec.dim != 3)
    throw std::invalid_argument("run_study: dim must be 1 or 3");
  const int N = spec.dim == 3 ? 3 : spec.N;

  StudyReport report;
  report.spec = spec;
  switch (spec.problem) {
    case StudyProblem::hardy:
      report.reference = hardy_const(N);
      report.coupling_note =
          "upper-bound mechanism: minimizing sequence with eps^2 ~ h, beta = h^(mu/2) "
          "(recorded only; not used numerically)";
      break;
    case StudyProblem::critical:
      report.reference = phi1_critical(N).lambda;
      break;
    case StudyProblem::subcritical:
      report.reference = phi1_subcritical(N, spec.lambda).lambda;
      break;
  }

  SpectralOptions opts;
  opts.N = N;
  opts.tol = spec.tol;

  for (int level : spec.levels) {
    StudyRow row;
    row.level = level;
    const double t0 = now_seconds();
    SimplicialMesh mesh;
    if (spec.dim == 1) {
      const int n = 1 << level;
      mesh = build_interval_mesh(n, 1.0);
      row.h = 1.0 / n;
      row.dofs = n;
    } else {
      mesh = build_ball_mesh(level, spec.boundary);
      row.h = quality(mesh).h;
      row.dofs = make_dof_map(mesh).n_dofs;
    }
    EigSolution sol;
    switch (spec.problem) {
      case StudyProblem::hardy: sol = hardy_constant(mesh, opts); break;
      case StudyProblem::critical: sol = critical_eigen(mesh, opts); break;
      case StudyProblem::subcritical: sol = subcritical_eigen(mesh, spec.lambda, opts); break;
    }
    row.value = sol.value;
    row.reference = report.reference;
    row.error = row.value - row.reference;
    row.scaled_error = theoretical_scaled_error(spec, row.error, row.h);
    row.seconds = now_seconds() - t0;
    report.rows.push_back(row);
  }

  // Rate fit: logarithmic models only see levels with h <= 1/64 when enough
  // of them exist (|log h| varies too slowly at coarse h).
  const RateModel model = spec.problem == StudyProblem::subcritical
                              ? RateModel::power_in_h
                              : RateModel::power_in_log;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : report.rows)
    if (row.error > 0.0) pts.emplace_back(row.h, row.error);
  if (model == RateModel::power_in_log) {
    std::vector<std::pair<double, double>> fine;
    for (const auto& p : pts)
      if (p.first <= 1.0 / 64.0 + 1e-12) fine.push_back(p);
    if (fine.size() >= 3) pts = std::move(fine);
  }
  if (pts.size() >= 3) report.fit = fit_rate(pts, model);
  return report;
}

void write_study_csv(std::ostream& os, const StudyReport& report) {
  os << "level,h,dofs,value,reference,error,scaled_error,seconds\n";
  for (const auto& r : report.rows) {
    os << r.level << ',' << fmt17(r.h) << ',' << r.dofs << ',' << fmt17(r.value) << ','
       << fmt17(r.reference) << ',' << fmt17(r.error) << ',' << fmt17(r.scaled_error)
       << ',' << fmt17(r.seconds) << '\n';
  }
}

std::vector<StudyRow> read_study_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("read_study_csv: empty input");
  if (line != "level,h,dofs,value,reference,error,scaled_error,seconds")
    throw std::runtime_error("read_study_csv: unexpected header: " + line);
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    StudyRow r;
    auto next = [&]() {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("read_study_csv: short row: " + line);
      return field;
    };
    r.level = std::stoi(next());
    r.h = std::stod(next());
    r.dofs = std::stoi(next());
    r.value = std::stod(next());
    r.reference = std::stod(next());
    r.error = std::stod(next());
    r.scaled_error = std::stod(next());
    r.seconds = std::stod(next());
    rows.push_back(r);
  }
  return rows;
}

std::string study_to_json(const StudyReport& report) {
  // Hand-rolled emitter so that every number carries 17 significant digits.
  std::ostringstream os;
  os << "{\n";
  os << "  \"problem\": \"" << to_string(report.spec.problem) << "\",\n";
  os << "  \"dim\": " << report.spec.dim << ",\n";
  os << "  \"N\": " << report.spec.N << ",\n";
  os << "  \"lambda\": " << fmt17(report.spec.lambda) << ",\n";
  os << "  \"boundary\": \""
     << (report.spec.boundary == BoundaryRule::projected ? "projected" : "polyhedral")
     << "\",\n";
  os << "  \"tol\": " << fmt17(report.spec.tol) << ",\n";
  os << "  \"reference\": " << fmt17(report.reference) << ",\n";
  os << "  \"rows\": [\n";
  for (size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    os << "    {\"level\": " << r.level << ", \"h\": " << fmt17(r.h)
       << ", \"dofs\": " << r.dofs << ", \"value\": " << fmt17(r.value)
       << ", \"reference\": " << fmt17(r.reference) << ", \"error\": " << fmt17(r.error)
       << ", \"scaled_error\": " << fmt17(r.scaled_error)
       << ", \"seconds\": " << fmt17(r.seconds) << "}"
       << (i + 1 < report.rows.size() ? ",\n" : "\n");
  }
  os << "  ],\n";
  if (report.fit) {
    os << "  \"fit\": {\"model\": \""
       << (report.fit->model == RateModel::power_in_h ? "power_in_h" : "power_in_log")
       << "\", \"exponent\": " << fmt17(report.fit->exponent)
       << ", \"constant\": " << fmt17(report.fit->constant)
       << ", \"r_squared\": " << fmt17(report.fit->r_squared)
       << ", \"scaled_residuals\": [";
    for (size_t i = 0; i < report.fit->scaled_residuals.size(); ++i)
      os << (i ? ", " : "") << fmt17(report.fit->scaled_residuals[i]);
    os << "]},\n";
  } else {
    os << "  \"fit\": null,\n";
  }
  os << "  \"coupling_note\": \"" << report.coupling_note << "\"\n";
  os << "}\n";
  return os.str();
}

bool VerificationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

bool selected(const std::vector<std::string>& selection, const std::string& name) {
  if (selection.empty()) return true;
  for (const auto& s : selection)
    if (s == name) return true;
  return false;
}

// Per-cell interpolation errors of a smooth function against its full
// vertex interpolant (all vertices, no boundary handling involved).
void interpolation_errors(const SimplicialMesh& mesh,
                          const std::function<double(const Vec3&)>& u,
                          const std::function<Vec3(const Vec3&)>& grad_u,
                          double& energy_err, double& l2_err) {
  double acc_e = 0.0, acc_l2 = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineCellMap map = cell_map(mesh, c);
    const auto& cell = mesh.cells[c];
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i) {
      M.block<3, 1>(0, i) = mesh.vertices[cell[i]];
      M(3, i) = 1.0;
    }
    const Eigen::Matrix4d Minv = M.inverse();
    Vec3 g_interp = Vec3::Zero();
    Eigen::Vector4d vals;
    for (int i = 0; i < 4; ++i) vals[i] = u(mesh.vertices[cell[i]]);
    double off_interp = 0.0;
    for (int i = 0; i < 4; ++i) {
      g_interp += vals[i] * Vec3(Minv.block<1, 3>(i, 0).transpose());
      off_interp += vals[i] * Minv(i, 3);
    }
    acc_e += integrate_smooth(
        map, [&](const Vec3& x) { return (grad_u(x) - g_interp).squaredNorm(); }, 5);
    acc_l2 += integrate_adaptive(
        map,
        [&](const Vec3& x) {
          const double d = u(x) - (g_interp.dot(x) + off_interp);
          return d * d;
        },
        1e-10);
  }
  energy_err = std::sqrt(acc_e);
  l2_err = std::sqrt(acc_l2);
}

std::string fmt_seq(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt17(v[i]);
  return s;
}

CheckResult check_interp_c2() {
  CheckResult res{"interp_c2", false, {}};
  auto u = [](const Vec3& x) { return x[0] * x[1] * x[2]; };
  auto gu = [](const Vec3& x) { return Vec3(x[1] * x[2], x[0] * x[2], x[0] * x[1]); };
  std::vector<std::pair<double, double>> e_pts, l2_pts;
  for (int level = 1; level <= 4; ++level) {
    const SimplicialMesh mesh = build_ball_mesh(level, BoundaryRule::polyhedral);
    double ee = 0.0, el2 = 0.0;
    interpolation_errors(mesh, u, gu, ee, el2);
    const double h = quality(mesh).h;
    e_pts.emplace_back(h, ee);
    l2_pts.emplace_back(h, el2);
  }
  const RateFit fe = fit_rate(e_pts, RateModel::power_in_h);
  const RateFit fl = fit_rate(l2_pts, RateModel::power_in_h);
  res.pass = fe.exponent >= 0.8 && fe.exponent <= 1.2 && fl.exponent >= 1.8 &&
             fl.exponent <= 2.2;
  res.details = "energy slope " + fmt17(fe.exponent) + " (window [0.8,1.2]), L2 slope " +
                fmt17(fl.exponent) + " (window [1.8,2.2])";
  return res;
}

CheckResult check_log_hardy_quotient() {
  CheckResult res{"log_hardy_quotient", false, {}};
  std::vector<double> values;
  bool lower_bound = true, decreasing = true;
  for (int k = 6; k <= 12; ++k) {
    const double v = radial_solve(RadialProblem::log_hardy(3), 1 << k, 1.0, 1e-10).value;
    if (v < 0.25 - 1e-9) lower_bound = false;
    if (!values.empty() && v > values.back() + 1e-12) decreasing = false;
    values.push_back(v);
  }
  res.pass = lower_bound && decreasing;
  res.details = "radial quotient values (n=2^6..2^12, target 1/4 from above): " +
                fmt_seq(values);
  return res;
}

CheckResult check_logth() {
  CheckResult res{"logth", false, {}};
  const double R = 2.718281828459045;
  const SingularWeight w = make_weight(SingularKind::logsq_inv, R);
  std::vector<double> mins;
  for (int level = 1; level <= 4; ++level) {
    const SimplicialMesh mesh = build_ball_mesh(level, BoundaryRule::projected);
    const double h = quality(mesh).h;
    const double logh2 = std::pow(std::log(h), 2);
    double min_scaled = std::numeric_limits<double>::infinity();
    const std::function<double(const Vec3&)> one = [](const Vec3&) { return 1.0; };
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const AffineCellMap map = cell_map(mesh, c);
      const double integral = integrate_singular(map, w, one, 1e-8);
      const double vol = cell_volume(mesh, c);
      min_scaled = std::min(min_scaled, integral * logh2 / vol);
    }
    mins.push_back(min_scaled);
  }
  bool ok = true;
  for (double m : mins)
    if (m < 0.1 * mins.front()) ok = false;
  res.pass = ok;
  res.details = "per-cell min of scaled log integral, levels 1..4: " + fmt_seq(mins) +
                " (each must stay above 0.1x the level-1 value)";
  return res;
}

CheckResult check_improved_hardy() {
  CheckResult res{"improved_hardy", false, {}};
  const double LN = hardy_const(3);
  std::vector<double> cs;
  for (int k = 6; k <= 10; ++k) {
    const SimplicialMesh mesh = build_interval_mesh(1 << k, 1.0);
    const SparseSym Q =
        radial_stiffness(mesh, 3).add_scaled(-LN, radial_hardy_mass(mesh, 3));
    const SparseSym L = radial_log_stiffness(mesh, 3, 2.718281828459045);
    cs.push_back(smallest_genevp(Q, L, 1e-10, 50000).value);
  }
  double lo = cs[0], hi = cs[0];
  for (double c : cs) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  res.pass = lo > 0.0 && hi <= 2.0 * lo;
  res.details = "empirical improved-Hardy constants (n=2^6..2^10): " + fmt_seq(cs) +
                " (positive, stable within factor 2)";
  return res;
}

CheckResult check_minseq() {
  CheckResult res{"minseq", false, {}};
  std::vector<double> b_scaled, a_scaled, r_scaled;
  for (int k = 4; k <= 9; ++k) {
    CutoffParams p;
    p.eps = std::pow(2.0, -k);
    p.alpha = 1.0;
    p.N = 3;
    const MinSeqReport rep = minseq_report(p, 1e-9);
    const double L = std::abs(std::log(p.eps));
    b_scaled.push_back(rep.B_eps / (L * L * L));
    a_scaled.push_back(rep.A_eps / L);
    r_scaled.push_back(rep.ratio * L * L);
  }
  auto band_ok = [](const std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return lo > 0.0 && hi < 2.0 * lo;
  };
  res.pass = band_ok(b_scaled) && band_ok(a_scaled) && band_ok(r_scaled);
  res.details = "B/|log eps|^3: " + fmt_seq(b_scaled) + "; A/|log eps|: " + fmt_seq(a_scaled) +
                "; ratio*|log eps|^2: " + fmt_seq(r_scaled) + " (each within factor 2)";
  return res;
}

CheckResult check_membership() {
  CheckResult res{"membership", false, {}};
  // alpha = 0.49: the discrete Hardy-deficit form of the interpolated
  // profile stays bounded; alpha = 0.5: it grows, with positive but
  // shrinking increments (log|log eps| growth).
  const SimplicialMesh mesh = build_interval_mesh(1 << 13, 1.0);
  const double LN = hardy_const(3);
  const SparseSym Q = radial_stiffness(mesh, 3).add_scaled(-LN, radial_hardy_mass(mesh, 3));
  const DofMap dofs = make_dof_map(mesh);

  auto deficit_of = [&](double alpha, double eps) {
    CutoffParams p;
    p.eps = eps;
    p.alpha = alpha;
    Eigen::VectorXd x(dofs.n_dofs);
    for (int d = 0; d < dofs.n_dofs; ++d) {
      const double r = mesh.vertices[dofs.dof_to_vertex[d]].x();
      x[d] = r > 0.0 ? u_eps(p, r) : 0.0;
    }
    return quadratic_form(Q, x);
  };

  std::vector<double> q49, q50;
  for (int k = 3; k <= 7; ++k) {
    q49.push_back(deficit_of(0.49, std::pow(2.0, -k)));
    q50.push_back(deficit_of(0.50, std::pow(2.0, -k)));
  }
  double lo = q49[0], hi = q49[0];
  for (double v : q49) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool bounded_49 = lo > 0.0 && hi <= 3.0 * lo;
  bool grows_50 = true, sublog_50 = true;
  for (size_t i = 1; i < q50.size(); ++i)
    if (q50[i] <= q50[i - 1]) grows_50 = false;
  for (size_t i = 2; i < q50.size(); ++i)
    if (q50[i] - q50[i - 1] > (q50[i - 1] - q50[i - 2]) * 1.02) sublog_50 = false;
  res.pass = bounded_49 && grows_50 && sublog_50;
  res.details = "alpha=0.49 deficits: " + fmt_seq(q49) + " (bounded within factor 3); " +
                "alpha=0.50 deficits: " + fmt_seq(q50) +
                " (increasing with shrinking increments)";
  return res;
}

}  // namespace

VerificationReport verify_lemmas(const std::vector<std::string>& selection) {
  static const std::vector<std::string> known = {"interp_c2",      "log_hardy_quotient",
                                                 "logth",          "improved_hardy",
                                                 "minseq",         "membership"};
  for (const auto& s : selection) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == s;
    if (!ok) throw std::invalid_argument("verify_lemmas: unknown check " + s);
  }
  VerificationReport report;
  if (selected(selection, "interp_c2")) report.checks.push_back(check_interp_c2());
  if (selected(selection, "log_hardy_quotient"))
    report.checks.push_back(check_log_hardy_quotient());
  if (selected(selection, "logth")) report.checks.push_back(check_logth());
  if (selected(selection, "improved_hardy")) report.checks.push_back(check_improved_hardy());
  if (selected(selection, "minseq")) report.checks.push_back(check_minseq());
  if (selected(selection, "membership")) report.checks.push_back(check_membership());
  return report;
}

}  // namespace hardyfem
