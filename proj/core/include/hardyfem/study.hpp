#pragma once

// Convergence studies for the three spectral quantities across a mesh
// family, rate fits, machine-readable reports (CSV and JSON), and the named
// verification checks behind the `verify` subcommand.

#include "hardyfem/rate_fit.hpp"
#include "hardyfem/spectral.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace hardyfem {

enum class StudyProblem { hardy, critical, subcritical };

std::string to_string(StudyProblem p);

struct StudySpec {
  StudyProblem problem = StudyProblem::hardy;
  int dim = 1;  // 1: radial oracle with n = 2^level cells; 3: ball meshes
  int N = 3;
  double lambda = 0.0;  // subcritical amplitude
  std::vector<int> levels;
  BoundaryRule boundary = BoundaryRule::projected;
  double tol = 1e-10;
};

struct StudyRow {
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;
  double scaled_error = 0.0;  // error * |log h|^p or * h^-p at the theoretical p
  double seconds = 0.0;
};

struct StudyReport {
  StudySpec spec;
  double reference = 0.0;
  std::vector<StudyRow> rows;
  std::optional<RateFit> fit;
  // Mechanism behind the logarithmic rate, recorded as metadata only: the
  // minimizing-sequence coupling eps^2 ~ h with beta = h^(mu/2).
  std::string coupling_note;
};

StudyReport run_study(const StudySpec& spec);

// CSV schema (exact header): level,h,dofs,value,reference,error,scaled_error,seconds
// Numbers are written with 17 significant digits.
void write_study_csv(std::ostream& os, const StudyReport& report);
std::vector<StudyRow> read_study_csv(std::istream& is);

std::string study_to_json(const StudyReport& report);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

/// Named lemma-level checks: interpolation rates, the 1/4 log-Hardy
/// quotient, the per-cell log integral lower bound, stability of the
/// improved-Hardy constant, the minimizing-sequence scalings, and the
/// membership threshold at alpha = 1/2.  Empty selection runs everything.
VerificationReport verify_lemmas(const std::vector<std::string>& selection = {});

}  // namespace hardyfem
