#include "fkqho/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fkqho {

namespace {

// %.17g keeps doubles round-trippable and the byte stream reproducible.
std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw std::invalid_argument("matrix_from_json: expected " + std::to_string(rows) +
                                " rows");
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged or mis-sized row " +
                                  std::to_string(i));
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        throw std::invalid_argument("matrix_from_json: non-numeric entry");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

ModelParams model_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("model: expected a JSON object");
  const std::set<std::string> allowed{"r", "A", "B", "S"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("model: unknown key \"" + it.key() + "\"");
  for (const auto& key : allowed)
    if (!j.contains(key)) throw std::invalid_argument("model: missing key \"" + key + "\"");
  if (!j["r"].is_number_integer() || j["r"].get<int>() < 1)
    throw std::invalid_argument("model: r must be a positive integer");
  const Eigen::Index r = j["r"].get<int>();
  if (!j["B"].is_array() || j["B"].empty() || !j["B"][0].is_array() || j["B"][0].empty())
    throw std::invalid_argument("model: B must be a nonempty nested array");
  const Eigen::Index r1 = static_cast<Eigen::Index>(j["B"][0].size());
  return ModelParams(matrix_from_json(j["A"], r, r), matrix_from_json(j["B"], r, r1),
                     matrix_from_json(j["S"], r, r));
}

json model_to_json(const ModelParams& p) {
  json j;
  j["r"] = static_cast<int>(p.r);
  j["A"] = matrix_to_json(p.A);
  j["B"] = matrix_to_json(p.B);
  j["S"] = matrix_to_json(p.S);
  return j;
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_model: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("load_model: malformed JSON in " + path + ": " + e.what());
  }
  return model_from_json(j);
}

json validation_to_json(const ValidationReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"residual", c.residual},
                      {"threshold", c.threshold},
                      {"passed", c.passed}});
  return {{"passed", report.passed}, {"checks", checks}};
}

json solution_to_json(const RiccatiSolution& sol, const DecayConstants& dc) {
  json j;
  j["r"] = static_cast<int>(sol.r);
  j["lambda0"] = sol.lambda0;
  j["P_inf"] = matrix_to_json(sol.P_inf);
  j["P_inf_minus"] = matrix_to_json(sol.P_inf_minus);
  j["Q_inf"] = matrix_to_json(sol.Q_inf);
  j["Q_inf_minus"] = matrix_to_json(sol.Q_inf_minus);
  j["Delta_inf"] = matrix_to_json(sol.Delta_inf);
  j["Delta_inf_h"] = matrix_to_json(sol.Delta_inf_h);
  j["drift_filter"] = matrix_to_json(sol.drift_filter);
  j["drift_h"] = matrix_to_json(sol.drift_h);
  j["residuals"] = {
      {"ricc_P_inf", care_residual(sol.A, sol.R, sol.S, sol.P_inf)},
      {"ricc_P_inf_minus", care_residual(sol.A, sol.R, sol.S, sol.P_inf_minus)},
      {"ricc_Q_inf_dual",
       care_residual(sol.A.transpose(), sol.S, sol.R, sol.Q_inf)},
      {"trace_gap",
       std::abs(0.5 * (sol.S * sol.P_inf).trace() - 0.5 * (sol.R * sol.Q_inf).trace())}};
  j["decay"] = {{"delta", dc.delta},
                {"alpha", dc.alpha},
                {"beta", dc.beta},
                {"alpha_h", dc.alpha_h},
                {"beta_h", dc.beta_h},
                {"iota_h", dc.iota_h},
                {"chi_delta", dc.chi_delta},
                {"Pi_minus_delta", matrix_to_json(dc.Pi_minus_delta)},
                {"Pi_plus_delta", matrix_to_json(dc.Pi_plus_delta)}};
  return j;
}

json ground_state_to_json(const GroundState& gs) {
  json j;
  j["lambda0"] = gs.lambda0;
  j["Q_inf"] = matrix_to_json(gs.sol.Q_inf);
  j["P_h_inf"] = matrix_to_json(gs.P_h_inf);
  j["eta_inf"] = {{"mean", vector_to_json(gs.eta_inf.mean)},
                  {"cov", matrix_to_json(gs.eta_inf.cov)}};
  j["eta_h_inf"] = {{"mean", vector_to_json(gs.eta_h_inf.mean)},
                    {"cov", matrix_to_json(gs.eta_h_inf.cov)}};
  return j;
}

json spectrum_to_json(const SpectralBasis& basis) {
  json modes = json::array();
  for (const auto& n : basis.indices) {
    json jn = json::array();
    for (int k : n.n) jn.push_back(k);
    modes.push_back({{"n", jn},
                     {"lambda_n", eigenvalue(basis, n)},
                     {"lambda_n_h", eigenvalue_h(basis, n)}});
  }
  json j;
  j["lambda0"] = basis.lambda0;
  j["rates"] = vector_to_json(basis.rates);
  j["Z"] = matrix_to_json(basis.Z);
  j["max_order"] = basis.max_order;
  j["modes"] = std::move(modes);
  return j;
}

json stability_to_json(const StabilityReport& report) {
  return {{"beta", report.beta},
          {"fitted_w2_slope", report.fitted_w2_slope},
          {"fitted_ent_slope", report.fitted_ent_slope},
          {"entropy_horizon", report.entropy_horizon},
          {"bounds_hold", report.bounds_hold}};
}

json mehler_to_json(const MehlerReport& report) {
  return {{"max_series_error", report.max_series_error},
          {"max_propagator_error", report.max_propagator_error},
          {"max_order", report.max_order},
          {"grid_points", report.grid_points}};
}

namespace {

void append_state_columns(std::ostringstream& os, const VectorXd& mean,
                          const MatrixXd& cov) {
  for (Eigen::Index i = 0; i < mean.size(); ++i) os << ',' << fmt(mean(i));
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = i; j < cov.cols(); ++j) os << ',' << fmt(cov(i, j));
}

void state_header(std::ostringstream& os, Eigen::Index r) {
  for (Eigen::Index i = 0; i < r; ++i) os << ",mean_" << i;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i; j < r; ++j) os << ",cov_" << i << '_' << j;
}

}  // namespace

std::string flow_csv(const RiccatiSolution& sol, const GroundState& gs,
                     const GaussianState& eta0, double T, int steps) {
  std::ostringstream os;
  os << "t";
  state_header(os, sol.r);
  os << ",log_mass\n";
  for (int k = 0; k <= steps; ++k) {
    const double t = T * k / steps;
    const FlowState fs = propagate(sol, gs, eta0, t);
    os << fmt(t);
    append_state_columns(os, fs.eta_t.mean, fs.eta_t.cov);
    os << ',' << fmt(fs.log_mass) << '\n';
  }
  return os.str();
}

std::string trajectory_csv(const Trajectory& traj, Eigen::Index r) {
  std::ostringstream os;
  os << "t";
  state_header(os, r);
  os << ",lambda0_estimate,jump_count\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    os << fmt(traj.t[k]);
    append_state_columns(os, traj.mean[k], traj.cov[k]);
    os << ',' << fmt(traj.lambda0_estimate[k]) << ',' << traj.jump_count[k] << '\n';
  }
  return os.str();
}

std::string entropy_report_csv(const EntropyDecayReport& report) {
  std::ostringstream os;
  os << "t,ent,fisher,fisher_weighted,dent_fd,debruijn_residual,ent_bound,"
        "fisher_bound,fisher_bound_exact,lsi_ok\n";
  for (const auto& row : report.rows) {
    os << fmt(row.t) << ',' << fmt(row.ent) << ',' << fmt(row.fisher) << ','
       << fmt(row.fisher_weighted) << ',' << fmt(row.dent_fd) << ','
       << fmt(row.debruijn_residual) << ',' << fmt(row.ent_bound) << ','
       << fmt(row.fisher_bound) << ',' << fmt(row.fisher_bound_exact) << ','
       << (row.lsi_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string stability_report_csv(const StabilityReport& report) {
  std::ostringstream os;
  os << "t,w2,ent,w2_bound,ent_bound\n";
  for (const auto& row : report.rows)
    os << fmt(row.t) << ',' << fmt(row.w2) << ',' << fmt(row.ent) << ','
       << fmt(row.w2_bound) << ',' << fmt(row.ent_bound) << '\n';
  return os.str();
}

std::string kernel_grid_csv(const SpectralBasis& basis, const GroundState& gs, double t,
                            double grid_half, int grid_n) {
  const Eigen::Index r = gs.sol.r;
  if (r > 2) throw std::invalid_argument("kernel_grid_csv: grids emitted for r <= 2");
  std::vector<VectorXd> points;
  if (r == 1) {
    for (int k = 0; k < grid_n; ++k)
      points.push_back(VectorXd::Constant(
          1, grid_n == 1 ? 0.0 : -grid_half + 2.0 * grid_half * k / (grid_n - 1)));
  } else {
    for (int i = 0; i < grid_n; ++i)
      for (int j = 0; j < grid_n; ++j) {
        VectorXd v(2);
        v << -grid_half + 2.0 * grid_half * i / (grid_n - 1),
            -grid_half + 2.0 * grid_half * j / (grid_n - 1);
        points.push_back(v);
      }
  }
  std::ostringstream os;
  os << "x,y,value\n";
  for (const auto& x : points)
    for (const auto& y : points) {
      for (Eigen::Index i = 0; i < r; ++i) os << (i ? " " : "") << fmt(x(i));
      os << ',';
      for (Eigen::Index i = 0; i < r; ++i) os << (i ? " " : "") << fmt(y(i));
      os << ',' << fmt(kernel_truncated(basis, gs, t, x, y)) << '\n';
    }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_file: cannot open " + path);
  out << content;
}

}  // namespace fkqho
