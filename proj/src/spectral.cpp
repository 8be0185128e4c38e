#include "fkqho/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fkqho {

int MultiIndex::order() const {
  int s = 0;
  for (int k : n) s += k;
  return s;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int k : n)
    for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

namespace {

void enumerate_rec(int r, int budget, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  if (static_cast<int>(cur.size()) == r - 1) {
    for (int last = 0; last <= budget; ++last) {
      MultiIndex m;
      m.n = cur;
      m.n.push_back(last);
      out.push_back(std::move(m));
    }
    return;
  }
  for (int k = 0; k <= budget; ++k) {
    cur.push_back(k);
    enumerate_rec(r, budget - k, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(int r, int max_order) {
  if (r < 1 || max_order < 0)
    throw std::invalid_argument("enumerate_multi_indices: bad arguments");
  std::vector<MultiIndex> out;
  if (r == 1) {
    for (int k = 0; k <= max_order; ++k) out.push_back({{k}});
  } else {
    std::vector<int> cur;
    enumerate_rec(r, max_order, cur, out);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const MultiIndex& a, const MultiIndex& b) {
                     return a.order() < b.order();
                   });
  return out;
}

double hermite(int k, double z) {
  if (k < 0) throw std::invalid_argument("hermite: negative order");
  double prev = 1.0;  // He_0
  if (k == 0) return prev;
  double cur = z;  // He_1
  for (int j = 1; j < k; ++j) {
    const double next = z * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite(const MultiIndex& n, const VectorXd& z) {
  if (static_cast<Eigen::Index>(n.n.size()) != z.size())
    throw std::invalid_argument("hermite: dimension mismatch");
  double p = 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) p *= hermite(n.n[i], z(i));
  return p;
}

void gauss_hermite(int n, VectorXd& nodes, VectorXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  // Golub-Welsch on the He recurrence: z He_k = He_{k+1} + k He_{k-1}.
  MatrixXd j = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(j);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v = es.eigenvectors()(0, k);
    weights(k) = v * v;
  }
}

SpectralBasis build_basis(const GroundState& gs, int max_order) {
  const ModelParams probe(gs.sol.A, MatrixXd(sqrt_psd(gs.sol.R, 1e-8)), gs.sol.S);
  if (!is_reversible(probe))
    throw std::domain_error("build_basis: model is not reversible");

  const Eigen::Index r = gs.sol.r;
  SpectralBasis basis;
  basis.lambda0 = gs.lambda0;
  basis.max_order = max_order >= 0 ? max_order : (r <= 2 ? 12 : (r == 3 ? 6 : 4));

  const MatrixXd ph_half = sqrt_psd(gs.P_h_inf);
  const MatrixXd ph_half_inv =
      ph_half.partialPivLu().solve(MatrixXd::Identity(r, r));
  const MatrixXd root = sqrt_positive_spectrum(gs.sol.A * gs.sol.A + gs.sol.R * gs.sol.S);
  const MatrixXd direct = -ph_half_inv * root * ph_half;
  const MatrixXd via_r = sym(MatrixXd(-0.5 * ph_half_inv * gs.sol.R * ph_half_inv));
  if ((direct - via_r).norm() > 1e-8 * std::max(1.0, via_r.norm()))
    throw std::runtime_error("build_basis: the two Lambda_h routes disagree");
  basis.Lambda_h = via_r;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(basis.Lambda_h);
  if (es.eigenvalues().maxCoeff() >= 0.0)
    throw std::runtime_error("build_basis: Lambda_h is not negative definite");
  // Ascending eigenvalues of Lambda_h give descending rates; flip.
  basis.rates.resize(r);
  basis.Z.resize(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    basis.rates(i) = -es.eigenvalues()(r - 1 - i);
    basis.Z.col(i) = es.eigenvectors().col(r - 1 - i);
  }
  basis.whiten = basis.Z.transpose() * ph_half_inv;
  basis.indices = enumerate_multi_indices(static_cast<int>(r), basis.max_order);
  return basis;
}

double eigenvalue_h(const SpectralBasis& basis, const MultiIndex& n) {
  if (static_cast<Eigen::Index>(n.n.size()) != basis.rates.size())
    throw std::invalid_argument("eigenvalue_h: dimension mismatch");
  double v = 0.0;
  for (Eigen::Index i = 0; i < basis.rates.size(); ++i) v += n.n[i] * basis.rates(i);
  return v;
}

double eigenvalue(const SpectralBasis& basis, const MultiIndex& n) {
  return basis.lambda0 + eigenvalue_h(basis, n);
}

double eigenfunction_h(const SpectralBasis& basis, const MultiIndex& n, const VectorXd& x) {
  return hermite(n, basis.whiten * x) / std::sqrt(n.factorial());
}

double eigenfunction(const SpectralBasis& basis, const GroundState& gs, const MultiIndex& n,
                     const VectorXd& x) {
  const Eigen::Index r = gs.sol.r;
  const MatrixXd prec =
      sym(gs.P_h_inf.partialPivLu().solve(MatrixXd::Identity(r, r)));
  const double log_det = std::log(prec.partialPivLu().determinant());
  const double norm =
      std::exp(0.25 * (log_det - r * std::log(2.0 * std::numbers::pi)));
  return norm * std::exp(log_h0(gs, x)) * eigenfunction_h(basis, n, x);
}

double kernel_truncated(const SpectralBasis& basis, const GroundState& gs, double t,
                        const VectorXd& x, const VectorXd& y, int max_order) {
  if (!(t > 0.0)) throw std::domain_error("kernel_truncated: t must be positive");
  const int cap = max_order >= 0 ? max_order : basis.max_order;
  const double log_pdf = gaussian_log_pdf(gs.eta_h_inf, y);
  double acc = 0.0;
  const auto indices = cap == basis.max_order
                           ? basis.indices
                           : enumerate_multi_indices(
                                 static_cast<int>(basis.rates.size()), cap);
  for (const auto& n : indices) {
    acc += std::exp(-eigenvalue_h(basis, n) * t) * eigenfunction_h(basis, n, x) *
           eigenfunction_h(basis, n, y);
  }
  return acc * std::exp(log_pdf);
}

double exact_h_kernel(const GroundState& gs, double t, const VectorXd& x,
                      const VectorXd& y) {
  if (!(t > 0.0)) throw std::domain_error("exact_h_kernel: t must be positive");
  const GaussianState law{expm(gs.sol.drift_h, t) * x, gramian_delta_h(gs.sol, t)};
  return std::exp(gaussian_log_pdf(law, y));
}

double propagator_density(const GroundState& gs, double t, const VectorXd& x,
                          const VectorXd& y) {
  return std::exp(-gs.lambda0 * t + log_h0(gs, x) - log_h0(gs, y)) *
         exact_h_kernel(gs, t, x, y);
}

double mehler_propagator_density(const MatrixXd& S, double t, const VectorXd& x,
                                 const VectorXd& y) {
  const Eigen::Index r = S.rows();
  if (!(t > 0.0)) throw std::domain_error("mehler_propagator_density: t must be positive");
  const double det_s = MatrixXd(S).partialPivLu().determinant();
  const double pref = std::sqrt(det_s) / std::pow(2.0 * std::numbers::pi, 0.5 * r) *
                      std::pow(std::sinh(t), -0.5 * r);
  const double quad = -0.5 * (1.0 / std::tanh(t)) * (x.dot(S * x) + y.dot(S * y)) +
                      x.dot(S * y) / std::sinh(t);
  return pref * std::exp(quad);
}

MehlerReport mehler_check(const MatrixXd& S, double t, double grid_half, int grid_n, int M) {
  const Eigen::Index r = S.rows();
  const MatrixXd s_inv = MatrixXd(S).partialPivLu().solve(MatrixXd::Identity(r, r));
  const ModelParams params(MatrixXd::Zero(r, r), sqrt_psd(sym(s_inv)), sym(S));
  const GroundState gs = ground_state(reversible_fixed_points(params));
  const SpectralBasis basis = build_basis(gs, M);

  std::vector<VectorXd> axis_points;
  for (int k = 0; k < grid_n; ++k) {
    const double c = grid_n == 1 ? 0.0 : -grid_half + 2.0 * grid_half * k / (grid_n - 1);
    axis_points.push_back(VectorXd::Constant(1, c));
  }
  // Tensor grid [-h, h]^r, r <= 2 enumerated directly.
  std::vector<VectorXd> points;
  if (r == 1) {
    points = axis_points;
  } else if (r == 2) {
    for (const auto& a : axis_points)
      for (const auto& b : axis_points) {
        VectorXd v(2);
        v << a(0), b(0);
        points.push_back(v);
      }
  } else {
    throw std::invalid_argument("mehler_check: grid supported for r <= 2");
  }

  MehlerReport report{0.0, 0.0, M, static_cast<int>(points.size())};
  for (const auto& x : points)
    for (const auto& y : points) {
      const double series = kernel_truncated(basis, gs, t, x, y, M);
      const double exact = exact_h_kernel(gs, t, x, y);
      report.max_series_error = std::max(report.max_series_error, std::abs(series - exact));
      const double closed = mehler_propagator_density(S, t, x, y);
      const double conj = propagator_density(gs, t, x, y);
      report.max_propagator_error =
          std::max(report.max_propagator_error, std::abs(closed - conj));
    }
  return report;
}

std::vector<std::complex<double>> schrodinger_evolve(
    const SpectralBasis& basis, const std::vector<std::complex<double>>& coeffs, double t,
    bool real_time) {
  if (coeffs.size() != basis.indices.size())
    throw std::invalid_argument("schrodinger_evolve: coefficient count must match basis");
  std::vector<std::complex<double>> out(coeffs.size());
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double lam = eigenvalue(basis, basis.indices[k]);
    out[k] = real_time ? coeffs[k] * std::exp(std::complex<double>(0.0, -lam * t))
                       : coeffs[k] * std::exp(-lam * t);
  }
  return out;
}

PoincareReport poincare_check(const SpectralBasis& basis, const VectorXd& f_coeffs,
                              const std::vector<double>& ts) {
  if (f_coeffs.size() != static_cast<Eigen::Index>(basis.indices.size()))
    throw std::invalid_argument("poincare_check: coefficient count must match basis");
  PoincareReport report;
  report.holds = true;
  for (double t : ts) {
    double lhs = 0.0, var0 = 0.0;
    for (std::size_t k = 0; k < basis.indices.size(); ++k) {
      if (basis.indices[k].order() == 0) continue;
      const double c = f_coeffs(static_cast<Eigen::Index>(k));
      const double rate = eigenvalue_h(basis, basis.indices[k]);
      lhs += std::exp(-2.0 * rate * t) * c * c;
      var0 += c * c;
    }
    const double rhs = std::exp(-2.0 * basis.rates(0) * t) * var0;
    report.rows.push_back({t, lhs, rhs});
    if (lhs > rhs * (1.0 + 1e-12) + 1e-300) report.holds = false;
  }
  return report;
}

}  // namespace fkqho
