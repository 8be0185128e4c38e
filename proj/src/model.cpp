#include "fkqho/model.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace fkqho {

namespace {

void check_dims(const MatrixXd& a, const MatrixXd& b, const MatrixXd& s) {
  const Eigen::Index r = a.rows();
  if (r < 1) throw std::invalid_argument("ModelParams: dimension must be positive");
  if (a.cols() != r) throw std::invalid_argument("ModelParams: A must be square");
  if (b.rows() != r || b.cols() < 1)
    throw std::invalid_argument("ModelParams: B must be r x r1 with r1 >= 1");
  if (s.rows() != r || s.cols() != r)
    throw std::invalid_argument("ModelParams: S must be r x r");
}

}  // namespace

ModelParams::ModelParams(MatrixXd a, MatrixXd b, MatrixXd s)
    : ModelParams(std::move(a), std::move(b), std::move(s), MatrixXd()) {}

ModelParams::ModelParams(MatrixXd a, MatrixXd b, MatrixXd s, MatrixXd rr) {
  check_dims(a, b, s);
  r = a.rows();
  r1 = b.cols();
  A = std::move(a);
  B = std::move(b);
  S = std::move(s);
  if (rr.size() == 0) {
    R = B * B.transpose();
  } else {
    if (rr.rows() != r || rr.cols() != r)
      throw std::invalid_argument("ModelParams: R must be r x r");
    R = std::move(rr);
  }
}

ValidationReport validate(const ModelParams& p) {
  ValidationReport report;
  auto add = [&](const std::string& name, double residual, double threshold) {
    report.checks.push_back({name, residual, threshold, residual <= threshold});
  };

  const double sR = std::max(1.0, p.R.norm());
  const double sS = std::max(1.0, p.S.norm());
  add("R symmetric", (p.R - p.R.transpose()).norm(), 1e-12 * sR);
  add("S symmetric", (p.S - p.S.transpose()).norm(), 1e-12 * sS);

  Eigen::SelfAdjointEigenSolver<MatrixXd> esR(sym(p.R)), esS(sym(p.S));
  add("R PSD (min eigenvalue)", std::max(0.0, -esR.eigenvalues().minCoeff()), 1e-10 * sR);
  add("S PSD (min eigenvalue)", std::max(0.0, -esS.eigenvalues().minCoeff()), 1e-10 * sS);
  add("R = BB'", (p.R - p.B * p.B.transpose()).norm(), 1e-12 * sR);

  // Kalman rank conditions for (A, R^{1/2}) and (A', S^{1/2}).
  auto krylov_rank = [&](const MatrixXd& a, const MatrixXd& g) {
    MatrixXd k(p.r, p.r * p.r);
    MatrixXd block = g;
    for (Eigen::Index j = 0; j < p.r; ++j) {
      k.middleCols(j * p.r, p.r) = block;
      block = a * block;
    }
    return svd_rank(k);
  };
  const MatrixXd rhalf = sqrt_psd(sym(p.R), 1e-8);
  const MatrixXd shalf = sqrt_psd(sym(p.S), 1e-8);
  const auto rank_c = krylov_rank(p.A, rhalf);
  const auto rank_o = krylov_rank(p.A.transpose(), shalf);
  add("controllability rank (A, R^1/2)", static_cast<double>(p.r - rank_c), 0.0);
  add("controllability rank (A', S^1/2)", static_cast<double>(p.r - rank_o), 0.0);

  report.passed = true;
  for (const auto& c : report.checks) report.passed = report.passed && c.passed;
  return report;
}

double potential(const ModelParams& p, const VectorXd& x) {
  if (x.size() != p.r) throw std::invalid_argument("potential: bad vector dimension");
  return 0.5 * x.dot(p.S * x);
}

bool is_reversible(const ModelParams& p, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(p.R));
  if (es.eigenvalues().minCoeff() <= tol * std::max(1.0, es.eigenvalues().maxCoeff()))
    return false;
  const MatrixXd ar = p.A * p.R;
  return (ar - ar.transpose()).norm() <= tol * std::max(1.0, ar.norm());
}

}  // namespace fkqho
