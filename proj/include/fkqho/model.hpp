#pragma once

#include "fkqho/numerics.hpp"

#include <string>
#include <vector>

namespace fkqho {

/// Model matrices (A, B, S) with R = B B' cached. The single source of truth
/// for every downstream solver; validate() checks the standing hypotheses.
struct ModelParams {
  Eigen::Index r;   // state dimension
  Eigen::Index r1;  // noise dimension
  MatrixXd A;       // r x r drift
  MatrixXd B;       // r x r1 diffusion
  MatrixXd S;       // r x r PSD potential curvature
  MatrixXd R;       // r x r, B B'

  ModelParams(MatrixXd a, MatrixXd b, MatrixXd s);
  // Explicit R, for exercising the R = BB' consistency check.
  ModelParams(MatrixXd a, MatrixXd b, MatrixXd s, MatrixXd rr);
};

struct CheckResult {
  std::string name;
  double residual;
  double threshold;
  bool passed;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed;
};

/// Symmetry/PSD checks on R and S, R = BB', and the two Kalman rank
/// conditions on (A, R^{1/2}) and (A', S^{1/2}). Dimension mismatches are
/// structural and throw; hypothesis failures land in the report.
ValidationReport validate(const ModelParams& params);

/// V(x) = x'Sx / 2
double potential(const ModelParams& params, const VectorXd& x);

/// True iff R is positive definite and A R = R A' up to a relative tolerance.
bool is_reversible(const ModelParams& params, double tol = 1e-10);

}  // namespace fkqho
