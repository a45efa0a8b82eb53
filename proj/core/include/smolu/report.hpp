#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "smolu/diagnostics.hpp"
#include "smolu/dual.hpp"
#include "smolu/kernel.hpp"
#include "smolu/measure.hpp"

namespace smolu {

std::string library_version();

struct ReportParams {
  std::string kernel;
  double a = 0.0;
  double b = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rho = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double lambda = 0.0;
  std::string mode;
  double tol = 0.0;
};

struct SolveSummary {
  std::string method;
  int iterations = 0;
  double t = 0.0;
  bool converged = false;
  double residual = 0.0;
};

struct RecursionSummary {
  double sigma = 0.0;
  double nu = 0.0;
  double theta = 0.0;
  double T = 0.0;
  double C = 0.0;
  double A0 = 0.0;
  double R_delta = 0.0;
  double delta = 0.0;
  std::vector<double> A;
  std::vector<double> margins;
  bool holds = false;
};

struct RunReport {
  std::string schema = "report_v1";
  std::string version;
  std::string started;
  std::string finished;
  ReportParams params;
  SolveSummary solve;
  std::vector<double> residual_R;
  std::vector<double> residuals;
  MembershipReport f1;
  MembershipReport f2;
  InvariantSetSpec f2_spec;
  TailFit tail_fit;
  OriginFit origin_fit;
  LEps l_eps;
  QEpsCurve q_eps;
  RecursionSummary recursion;
};

struct ReportOptions {
  double f1_tol = 1e-3;
  InvariantSetSpec f2_spec;
  double tail_decades = 2.0;
  double tail_min_x = 0.0;
  OriginFitOptions origin;
  std::vector<double> q_X = {0.01, 0.1, 1.0, 10.0, 100.0};
  double sigma = 0.9;
  double nu = 0.5;
  double theta = 0.25;
  double T = 1.0;
  double delta = 0.1;
};

// Fills every diagnostic of a solved profile. Fits that lack range are left
// at their defaults.
RunReport make_run_report(const Profile& p, const KernelSpec& kernel,
                          const RegularizationParams& reg, const ReportParams& params,
                          const SolveSummary& solve, const ReportOptions& opt = {});

// Pretty JSON; doubles round-trip, non-finite values become null.
std::string to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace smolu
