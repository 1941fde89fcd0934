#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardyfem/study.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace hardyfem;

TEST_CASE("fit_rate: exact power data") {
  std::vector<std::pair<double, double>> pts;
  for (int k = 2; k <= 6; ++k) {
    const double h = std::pow(2.0, -k);
    pts.emplace_back(h, h * h);
  }
  const RateFit fit = fit_rate(pts, RateModel::power_in_h);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.constant == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  for (double s : fit.scaled_residuals) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fit_rate: exact logarithmic data") {
  std::vector<std::pair<double, double>> pts;
  for (int k = 6; k <= 12; ++k) {
    const double h = std::pow(2.0, -k);
    pts.emplace_back(h, std::pow(std::abs(std::log(h)), -2.0));
  }
  const RateFit fit = fit_rate(pts, RateModel::power_in_log);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_rate: mild deterministic noise keeps the slope near 2") {
  std::vector<std::pair<double, double>> pts;
  for (int k = 2; k <= 8; ++k) {
    const double h = std::pow(2.0, -k);
    pts.emplace_back(h, h * h * (1.0 + 0.05 * std::sin(3.0 * k)));
  }
  const RateFit fit = fit_rate(pts, RateModel::power_in_h);
  CHECK(fit.exponent > 1.9);
  CHECK(fit.exponent < 2.1);
}

TEST_CASE("fit_rate: input validation") {
  std::vector<std::pair<double, double>> two = {{0.5, 0.1}, {0.25, 0.05}};
  CHECK_THROWS_AS(fit_rate(two, RateModel::power_in_h), std::invalid_argument);
  std::vector<std::pair<double, double>> neg = {{0.5, 0.1}, {0.25, -0.05}, {0.125, 0.01}};
  CHECK_THROWS_AS(fit_rate(neg, RateModel::power_in_h), std::invalid_argument);
  std::vector<std::pair<double, double>> dup = {{0.5, 0.1}, {0.5, 0.05}, {0.125, 0.01}};
  CHECK_THROWS_AS(fit_rate(dup, RateModel::power_in_h), std::invalid_argument);
}

TEST_CASE("run_study: radial hardy rows, bounds and CSV round trip") {
  StudySpec spec;
  spec.problem = StudyProblem::hardy;
  spec.dim = 1;
  spec.N = 3;
  spec.levels = {6, 7, 8, 9};
  const StudyReport report = run_study(spec);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.reference == doctest::Approx(0.25));
  double prev_h = 1.0, prev_v = std::numeric_limits<double>::infinity();
  for (const auto& r : report.rows) {
    CHECK(r.h < prev_h);
    CHECK(r.error > -1e-9);
    CHECK(r.value < prev_v);  // nested uniform refinements
    CHECK(r.scaled_error == doctest::Approx(r.error * std::pow(std::log(r.h), 2)));
    prev_h = r.h;
    prev_v = r.value;
  }
  REQUIRE(report.fit.has_value());
  CHECK(report.fit->model == RateModel::power_in_log);
  CHECK(!report.coupling_note.empty());

  std::stringstream ss;
  write_study_csv(ss, report);
  const std::string first_pass = ss.str();
  CHECK(first_pass.substr(0, first_pass.find('\n')) ==
        "level,h,dofs,value,reference,error,scaled_error,seconds");
  const auto rows = read_study_csv(ss);
  REQUIRE(rows.size() == report.rows.size());
  StudyReport copy = report;
  copy.rows = rows;
  std::stringstream ss2;
  write_study_csv(ss2, copy);
  CHECK(ss2.str() == first_pass);  // parse-emit-parse fixed point
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].value == report.rows[i].value);  // bitwise through 17 digits
    CHECK(rows[i].h == report.rows[i].h);
  }
}

TEST_CASE("run_study: determinism of every field except timings") {
  StudySpec spec;
  spec.problem = StudyProblem::subcritical;
  spec.dim = 1;
  spec.lambda = 3.0 / 16.0;
  spec.levels = {4, 5, 6};
  const StudyReport a = run_study(spec);
  const StudyReport b = run_study(spec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].value == b.rows[i].value);
    CHECK(a.rows[i].h == b.rows[i].h);
    CHECK(a.rows[i].error == b.rows[i].error);
    CHECK(a.rows[i].scaled_error == b.rows[i].scaled_error);
    CHECK(a.rows[i].dofs == b.rows[i].dofs);
  }
  REQUIRE(a.fit.has_value());
  REQUIRE(b.fit.has_value());
  CHECK(a.fit->exponent == b.fit->exponent);
  CHECK(a.fit->constant == b.fit->constant);
}

TEST_CASE("run_study: JSON report carries the fields verbatim") {
  StudySpec spec;
  spec.problem = StudyProblem::hardy;
  spec.dim = 1;
  spec.levels = {6, 7, 8};
  const StudyReport report = run_study(spec);
  const std::string text = study_to_json(report);
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["problem"] == "hardy");
  CHECK(j["dim"] == 1);
  CHECK(j["reference"].get<double>() == report.reference);
  REQUIRE(j["rows"].size() == report.rows.size());
  for (size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(j["rows"][i]["value"].get<double>() == report.rows[i].value);
    CHECK(j["rows"][i]["h"].get<double>() == report.rows[i].h);
  }
  CHECK(j["fit"]["exponent"].get<double>() == report.fit->exponent);
}

TEST_CASE("run_study: validation") {
  StudySpec spec;
  spec.levels = {};
  CHECK_THROWS_AS(run_study(spec), std::invalid_argument);
  spec.levels = {6, 6};
  CHECK_THROWS_AS(run_study(spec), std::invalid_argument);
  spec.levels = {6, 7};
  spec.dim = 2;
  CHECK_THROWS_AS(run_study(spec), std::invalid_argument);
  spec.dim = 1;
  spec.problem = StudyProblem::subcritical;
  spec.lambda = 0.3;  // >= Lambda_3
  CHECK_THROWS_AS(run_study(spec), std::invalid_argument);
}

TEST_CASE("verify_lemmas: selection runs named checks") {
  const VerificationReport report = verify_lemmas({"improved_hardy"});
  REQUIRE(report.checks.size() == 1);
  CHECK(report.checks[0].name == "improved_hardy");
  CHECK(report.checks[0].pass);
  CHECK(!report.checks[0].details.empty());
  CHECK(report.all_pass());
  CHECK_THROWS_AS(verify_lemmas({"no_such_check"}), std::invalid_argument);
}

TEST_CASE("verify_lemmas: minimizing-sequence scalings pass") {
  const VerificationReport report = verify_lemmas({"minseq"});
  REQUIRE(report.checks.size() == 1);
  CHECK(report.checks[0].pass);
}
