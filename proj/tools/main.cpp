// Command-line driver: convergence studies for the discrete Hardy constant
// and the two related spectral problems, the minimizing-sequence report,
// lemma-level verification, rate fits, and mesh inspection.

#include "hardyfem/analytic.hpp"
#include "hardyfem/mesh.hpp"
#include "hardyfem/radial_oracle.hpp"
#include "hardyfem/study.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace hardyfem;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> parse_levels(const std::string& spec) {
  const auto dots = spec.find("..");
  std::vector<int> levels;
  if (dots == std::string::npos) {
    levels.push_back(std::stoi(spec));
    return levels;
  }
  const int a = std::stoi(spec.substr(0, dots));
  const int b = std::stoi(spec.substr(dots + 2));
  if (b < a) throw CLI::ValidationError("--levels", "range must be increasing");
  for (int k = a; k <= b; ++k) levels.push_back(k);
  return levels;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
}

void print_study(const StudyReport& report) {
  std::printf("problem=%s dim=%d N=%d reference=%.12g\n",
              to_string(report.spec.problem).c_str(), report.spec.dim, report.spec.N,
              report.reference);
  std::printf("%6s %12s %8s %18s %12s %12s %10s\n", "level", "h", "dofs", "value", "error",
              "scaled_err", "seconds");
  for (const auto& r : report.rows)
    std::printf("%6d %12.6g %8d %18.12g %12.4e %12.6g %10.3f\n", r.level, r.h, r.dofs,
                r.value, r.error, r.scaled_error, r.seconds);
  if (report.fit)
    std::printf("fit: model=%s p=%.4f C=%.6g r^2=%.6f\n",
                report.fit->model == RateModel::power_in_h ? "power_in_h" : "power_in_log",
                report.fit->exponent, report.fit->constant, report.fit->r_squared);
}

void emit_study(const StudyReport& report, const std::string& out, const std::string& format) {
  print_study(report);
  if (out.empty()) return;
  if (format == "csv") {
    std::ostringstream ss;
    write_study_csv(ss, report);
    write_output(out, ss.str());
  } else {
    write_output(out, study_to_json(report));
  }
}

int run_spectral_study(StudyProblem problem, int dim, int N, double lambda,
                       std::string levels_arg, const std::string& boundary, double tol,
                       const std::string& out, const std::string& format) {
  StudySpec spec;
  spec.problem = problem;
  spec.dim = dim;
  spec.N = N;
  spec.lambda = lambda;
  if (levels_arg.empty()) levels_arg = dim == 1 ? "6..14" : "1..4";
  spec.levels = parse_levels(levels_arg);
  spec.boundary = boundary == "polyhedral" ? BoundaryRule::polyhedral : BoundaryRule::projected;
  spec.tol = tol;
  emit_study(run_study(spec), out, format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite element studies of the Hardy constant on the unit ball"};
  app.require_subcommand(1);

  std::string levels_arg, boundary = "projected", out, format = "csv", problem_arg = "hardy";
  std::string in_path, model_arg = "log", eps_arg;
  std::vector<std::string> select;
  int dim = 1, N = 3, level = 2, cells = 64;
  double lambda = 0.0, alpha = 1.0, mu = 0.25, tol = 1e-10, grading = 1.0;

  auto add_common = [&](CLI::App* cmd, bool with_lambda) {
    cmd->add_option("--dim", dim, "mesh dimension: 1 (radial) or 3 (ball)")
        ->check(CLI::IsMember({1, 3}));
    cmd->add_option("--N", N, "ambient dimension for radial problems")->check(CLI::Range(3, 20));
    cmd->add_option("--levels", levels_arg,
                    "level range a..b (radial: n = 2^level; 3D: refinement level)");
    cmd->add_option("--boundary", boundary, "3D boundary handling")
        ->check(CLI::IsMember({"projected", "polyhedral"}));
    cmd->add_option("--tol", tol, "eigensolver tolerance");
    cmd->add_option("--out", out, "output file (default: stdout table only)");
    cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    if (with_lambda) cmd->add_option("--lambda", lambda, "potential amplitude in [0, Lambda_N)");
  };

  auto* cmd_hardy = app.add_subcommand("hardy", "discrete Hardy constant study");
  add_common(cmd_hardy, false);
  auto* cmd_critical = app.add_subcommand("critical", "critical eigenvalue study (mu_1h)");
  add_common(cmd_critical, false);
  auto* cmd_subcritical =
      app.add_subcommand("subcritical", "subcritical eigenvalue study (lambda_1h)");
  add_common(cmd_subcritical, true);

  auto* cmd_radial = app.add_subcommand("radial", "radial-oracle study of any pencil kind");
  add_common(cmd_radial, true);
  cmd_radial->add_option("--problem", problem_arg, "pencil kind")
      ->check(CLI::IsMember({"hardy", "critical", "subcritical", "weighted-mu", "log-hardy"}));

  auto* cmd_minseq = app.add_subcommand("minseq", "minimizing-sequence report across eps");
  cmd_minseq->add_option("--alpha", alpha, "log exponent alpha >= 0");
  cmd_minseq->add_option("--mu", mu, "cutoff plateau parameter in (0, 1/2)");
  cmd_minseq->add_option("--N", N, "ambient dimension")->check(CLI::Range(3, 20));
  cmd_minseq->add_option("--eps", eps_arg, "comma list of eps values (default 2^-4..2^-9)");
  cmd_minseq->add_option("--tol", tol, "quadrature tolerance");
  cmd_minseq->add_option("--out", out, "output file");
  cmd_minseq->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* cmd_verify = app.add_subcommand("verify", "run lemma-level verification checks");
  cmd_verify->add_option("--select", select, "subset of checks to run");
  cmd_verify->add_option("--out", out, "output file");
  cmd_verify->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* cmd_fit = app.add_subcommand("fit", "fit a convergence rate to (h, error) data");
  cmd_fit->add_option("--in", in_path, "input file: study CSV or two-column h/error data")
      ->required();
  cmd_fit->add_option("--model", model_arg, "rate model")->check(CLI::IsMember({"h", "log"}));
  cmd_fit->add_option("--out", out, "output file");

  auto* cmd_mesh = app.add_subcommand("mesh-info", "build or read a mesh and report quality");
  cmd_mesh->add_option("--dim", dim, "mesh dimension")->check(CLI::IsMember({1, 3}));
  cmd_mesh->add_option("--level", level, "3D refinement level");
  cmd_mesh->add_option("--cells", cells, "1D cell count");
  cmd_mesh->add_option("--grading", grading, "1D grading exponent >= 1");
  cmd_mesh->add_option("--boundary", boundary, "3D boundary handling")
      ->check(CLI::IsMember({"projected", "polyhedral"}));
  cmd_mesh->add_option("--in", in_path, "read a mesh text file instead of building");
  cmd_mesh->add_option("--out", out, "write the mesh in the text format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*cmd_hardy)
      return run_spectral_study(StudyProblem::hardy, dim, N, 0.0, levels_arg, boundary, tol,
                                out, format);
    if (*cmd_critical)
      return run_spectral_study(StudyProblem::critical, dim, N, 0.0, levels_arg, boundary,
                                tol, out, format);
    if (*cmd_subcritical)
      return run_spectral_study(StudyProblem::subcritical, dim, N, lambda, levels_arg,
                                boundary, tol, out, format);

    if (*cmd_radial) {
      if (problem_arg == "hardy" || problem_arg == "critical" || problem_arg == "subcritical") {
        const StudyProblem p = problem_arg == "hardy"
                                   ? StudyProblem::hardy
                                   : (problem_arg == "critical" ? StudyProblem::critical
                                                                : StudyProblem::subcritical);
        return run_spectral_study(p, 1, N, lambda, levels_arg, boundary, tol, out, format);
      }
      // weighted-mu / log-hardy pencils, radial only
      const bool weighted = problem_arg == "weighted-mu";
      const RadialProblem rp =
          weighted ? RadialProblem::weighted_mu(N) : RadialProblem::log_hardy(N);
      const double reference = weighted ? phi1_critical(N).lambda : 0.25;
      if (levels_arg.empty()) levels_arg = "6..12";
      StudyReport report;
      report.spec.problem = StudyProblem::critical;  // descriptor only
      report.spec.dim = 1;
      report.spec.N = N;
      report.spec.levels = parse_levels(levels_arg);
      report.spec.tol = tol;
      report.reference = reference;
      for (int k : report.spec.levels) {
        StudyRow row;
        row.level = k;
        const int n = 1 << k;
        row.h = 1.0 / n;
        row.dofs = n;
        const auto t0 = std::chrono::steady_clock::now();
        row.value = radial_solve(rp, n, 1.0, tol).value;
        row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.reference = reference;
        row.error = row.value - reference;
        row.scaled_error = weighted ? row.error / (row.h * row.h) : row.error;
        report.rows.push_back(row);
      }
      std::vector<std::pair<double, double>> pts;
      for (const auto& r : report.rows)
        if (r.error > 0.0) pts.emplace_back(r.h, r.error);
      if (pts.size() >= 3)
        report.fit =
            fit_rate(pts, weighted ? RateModel::power_in_h : RateModel::power_in_log);
      emit_study(report, out, format);
      return 0;
    }

    if (*cmd_minseq) {
      std::vector<double> eps_values;
      if (eps_arg.empty()) {
        for (int k = 4; k <= 9; ++k) eps_values.push_back(std::pow(2.0, -k));
      } else {
        std::stringstream ss(eps_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) eps_values.push_back(std::stod(tok));
      }
      if (tol == 1e-10) tol = 1e-9;  // quadrature default for this report
      std::ostringstream csv, json;
      csv << "eps,A_eps,B_eps,ratio,A_scaled,B_scaled,ratio_scaled\n";
      json << "[\n";
      std::printf("%12s %14s %14s %12s %10s %10s %12s\n", "eps", "A_eps", "B_eps", "ratio",
                  "A/L^a", "B/L^b", "ratio*L^2");
      for (size_t i = 0; i < eps_values.size(); ++i) {
        CutoffParams p;
        p.eps = eps_values[i];
        p.mu = mu;
        p.alpha = alpha;
        p.N = N;
        const MinSeqReport rep = minseq_report(p, tol);
        const double L = std::abs(std::log(p.eps));
        const double a_scaled = rep.A_eps / std::pow(L, 2.0 * alpha - 1.0);
        const double b_scaled = rep.B_eps / std::pow(L, 2.0 * alpha + 1.0);
        const double r_scaled = rep.ratio * L * L;
        std::printf("%12.6g %14.6f %14.4f %12.4e %10.4f %10.4f %12.4f\n", p.eps, rep.A_eps,
                    rep.B_eps, rep.ratio, a_scaled, b_scaled, r_scaled);
        csv << fmt17(p.eps) << ',' << fmt17(rep.A_eps) << ',' << fmt17(rep.B_eps) << ','
            << fmt17(rep.ratio) << ',' << fmt17(a_scaled) << ',' << fmt17(b_scaled) << ','
            << fmt17(r_scaled) << '\n';
        json << "  {\"eps\": " << fmt17(p.eps) << ", \"A_eps\": " << fmt17(rep.A_eps)
             << ", \"B_eps\": " << fmt17(rep.B_eps) << ", \"ratio\": " << fmt17(rep.ratio)
             << ", \"quadrature_tol\": " << fmt17(rep.quadrature_tol) << "}"
             << (i + 1 < eps_values.size() ? ",\n" : "\n");
      }
      json << "]\n";
      if (!out.empty()) write_output(out, format == "csv" ? csv.str() : json.str());
      return 0;
    }

    if (*cmd_verify) {
      const VerificationReport report = verify_lemmas(select);
      std::ostringstream csv, json;
      csv << "name,pass,details\n";
      json << "[\n";
      for (size_t i = 0; i < report.checks.size(); ++i) {
        const auto& c = report.checks[i];
        std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.details.c_str());
        csv << c.name << ',' << (c.pass ? 1 : 0) << ",\"" << c.details << "\"\n";
        json << "  {\"name\": \"" << c.name << "\", \"pass\": " << (c.pass ? "true" : "false")
             << ", \"details\": \"" << c.details << "\"}"
             << (i + 1 < report.checks.size() ? ",\n" : "\n");
      }
      json << "]\n";
      if (!out.empty()) write_output(out, format == "csv" ? csv.str() : json.str());
      return report.all_pass() ? 0 : 1;
    }

    if (*cmd_fit) {
      std::ifstream is(in_path);
      if (!is) throw std::runtime_error("cannot open " + in_path);
      std::vector<std::pair<double, double>> pts;
      std::string first;
      if (!std::getline(is, first)) throw std::runtime_error("empty input");
      if (first == "level,h,dofs,value,reference,error,scaled_error,seconds") {
        is.seekg(0);
        for (const auto& row : read_study_csv(is))
          if (row.error > 0.0) pts.emplace_back(row.h, row.error);
      } else {
        auto parse_line = [&pts](const std::string& line) {
          if (line.empty()) return;
          std::string tmp = line;
          for (char& ch : tmp)
            if (ch == ',') ch = ' ';
          std::stringstream ls(tmp);
          double h = 0.0, e = 0.0;
          if (ls >> h >> e) pts.emplace_back(h, e);
        };
        parse_line(first);
        std::string line;
        while (std::getline(is, line)) parse_line(line);
      }
      const RateFit fit = fit_rate(
          pts, model_arg == "h" ? RateModel::power_in_h : RateModel::power_in_log);
      std::printf("model=%s p=%.6f C=%.6g r^2=%.6f\n",
                  model_arg == "h" ? "power_in_h" : "power_in_log", fit.exponent,
                  fit.constant, fit.r_squared);
      std::ostringstream json;
      json << "{\"model\": \"" << (model_arg == "h" ? "power_in_h" : "power_in_log")
           << "\", \"exponent\": " << fmt17(fit.exponent)
           << ", \"constant\": " << fmt17(fit.constant)
           << ", \"r_squared\": " << fmt17(fit.r_squared) << "}\n";
      if (!out.empty()) write_output(out, json.str());
      return 0;
    }

    if (*cmd_mesh) {
      SimplicialMesh mesh;
      if (!in_path.empty()) {
        mesh = read_mesh_file(in_path);
      } else if (dim == 1) {
        mesh = build_interval_mesh(cells, grading);
      } else {
        mesh = build_ball_mesh(level, boundary == "polyhedral" ? BoundaryRule::polyhedral
                                                               : BoundaryRule::projected);
      }
      const std::string problem = validate_mesh(mesh);
      const MeshQuality q = quality(mesh);
      std::printf("dim=%d tag=%s level=%d vertices=%d cells=%d\n", mesh.dim,
                  to_string(mesh.domain_tag).c_str(), mesh.level, mesh.n_vertices(),
                  mesh.n_cells());
      std::printf("h=%.12g h_min=%.12g sigma=%.12g quasi_uniform_ratio=%.12g volume=%.12g\n",
                  q.h, q.h_min, q.sigma, q.quasi_uniform_ratio, total_volume(mesh));
      std::printf("valid=%s%s%s\n", problem.empty() ? "yes" : "no",
                  problem.empty() ? "" : ": ", problem.c_str());
      if (!out.empty()) write_mesh_file(out, mesh);
      return problem.empty() ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
