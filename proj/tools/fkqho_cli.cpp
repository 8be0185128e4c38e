// Batch front end: every solver, flow, spectral and sampling operation as a
// subcommand over JSON model files, emitting CSV/JSON artifacts.

#include "fkqho/json_io.hpp"
#include "fkqho/verify.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace fkqho;

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, content);
  }
}

VectorXd parse_vector(const std::string& text, Eigen::Index r) {
  if (text.empty()) return VectorXd::Zero(r);
  VectorXd v(r);
  std::istringstream is(text);
  std::string tok;
  Eigen::Index i = 0;
  while (std::getline(is, tok, ',')) {
    if (i >= r) throw std::invalid_argument("too many entries in vector option");
    v(i++) = std::stod(tok);
  }
  if (i != r) throw std::invalid_argument("vector option needs " + std::to_string(r) +
                                          " entries");
  return v;
}

MatrixXd parse_matrix(const std::string& text, Eigen::Index r) {
  if (text.empty()) return MatrixXd::Zero(r, r);
  MatrixXd m(r, r);
  std::istringstream rows(text);
  std::string row;
  Eigen::Index i = 0;
  while (std::getline(rows, row, ';')) {
    if (i >= r) throw std::invalid_argument("too many rows in matrix option");
    std::istringstream cols(row);
    std::string tok;
    Eigen::Index j = 0;
    while (std::getline(cols, tok, ',')) {
      if (j >= r) throw std::invalid_argument("too many columns in matrix option");
      m(i, j++) = std::stod(tok);
    }
    if (j != r) throw std::invalid_argument("matrix row needs " + std::to_string(r) +
                                            " entries");
    ++i;
  }
  if (i != r) throw std::invalid_argument("matrix option needs " + std::to_string(r) +
                                          " rows");
  return m;
}

struct Options {
  std::string model_path, out_path, format, level = "fast", scheme = "dmc";
  std::string mean_text, cov_text;
  double t = 1.0, T = 10.0, dt = 0.01, delta = 0.1, grid_half = 2.0, smin = -1.0;
  int steps = 200, N = 1000, M = -1, grid_n = 21, variant = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run(const std::string& cmd, const Options& opt) {
  const ModelParams params = load_model(opt.model_path);

  if (cmd == "validate") {
    const ValidationReport report = validate(params);
    emit(opt.out_path, validation_to_json(report).dump(2));
    return report.passed ? 0 : 2;
  }

  if (cmd == "verify") {
    const auto results = run_verification(params, opt.level == "full");
    std::ostringstream os;
    for (const auto& r : results)
      os << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
    const bool ok = all_passed(results);
    os << (ok ? "all checks passed\n" : "some checks FAILED\n");
    emit(opt.out_path, os.str());
    return ok ? 0 : 2;
  }

  if (cmd == "solve") {
    const RiccatiSolution sol = solve_care(params);
    const GroundState gs = ground_state(sol);
    json j;
    j["model"] = model_to_json(params);
    j["solution"] = solution_to_json(sol, decay_constants(sol, opt.delta));
    j["ground_state"] = ground_state_to_json(gs);
    emit(opt.out_path, j.dump(2));
    return 0;
  }

  if (cmd == "flow") {
    const RiccatiSolution sol = solve_care(params);
    const GroundState gs = ground_state(sol);
    const GaussianState eta0{parse_vector(opt.mean_text, params.r),
                             parse_matrix(opt.cov_text, params.r)};
    check_gaussian(eta0);
    if (opt.format == "json") {
      const FlowState fs = propagate(sol, gs, eta0, opt.T);
      json j;
      j["t"] = fs.t;
      j["mean"] = vector_to_json(fs.eta_t.mean);
      j["cov"] = matrix_to_json(fs.eta_t.cov);
      j["log_mass"] = fs.log_mass;
      j["survival_rate"] = -fs.log_mass / fs.t;
      emit(opt.out_path, j.dump(2));
    } else {
      emit(opt.out_path, flow_csv(sol, gs, eta0, opt.T, opt.steps));
    }
    return 0;
  }

  if (cmd == "spectrum") {
    const RiccatiSolution sol = reversible_fixed_points(params);
    const GroundState gs = ground_state(sol);
    const SpectralBasis basis = build_basis(gs, opt.M);
    if (opt.format == "csv") {
      emit(opt.out_path, kernel_grid_csv(basis, gs, opt.t, opt.grid_half, opt.grid_n));
    } else {
      emit(opt.out_path, spectrum_to_json(basis).dump(2));
    }
    return 0;
  }

  if (cmd == "mehler") {
    const MehlerReport report =
        mehler_check(params.S, opt.t, opt.grid_half, opt.grid_n,
                     opt.M > 0 ? opt.M : 25);
    emit(opt.out_path, mehler_to_json(report).dump(2));
    return 0;
  }

  if (cmd == "simulate") {
    if (!opt.seed_set)
      throw std::invalid_argument("simulate: --seed is mandatory for stochastic commands");
    const GaussianState eta0{parse_vector(opt.mean_text, params.r),
                             parse_matrix(opt.cov_text, params.r)};
    check_gaussian(eta0);
    Trajectory traj;
    if (opt.scheme == "dmc") {
      traj = dmc_run(params, eta0, opt.N, opt.T, opt.dt, opt.seed);
    } else if (opt.scheme == "enkf" || opt.scheme == "enkf1" || opt.scheme == "enkf2" ||
               opt.scheme == "enkf3") {
      int variant = opt.variant;
      if (opt.scheme.size() == 5) variant = opt.scheme[4] - '0';
      traj = enkf_run(params, variant, eta0, opt.N, opt.T, opt.dt, opt.seed);
    } else if (opt.scheme == "hproc") {
      const GroundState gs = ground_state(solve_care(params));
      traj = hproc_run(params, gs, eta0, opt.N, opt.T, opt.dt, opt.seed);
    } else if (opt.scheme == "backward") {
      const RiccatiSolution sol = solve_care(params);
      const double smin = opt.smin >= 0.0 ? opt.smin : std::max(opt.dt, 1e-3);
      const std::vector<double> snaps{smin, 0.5 * (smin + opt.T), opt.T};
      const BackwardSample bs =
          backward_sample(sol, eta0, opt.T, smin, snaps, opt.N, opt.dt, opt.seed);
      std::ostringstream os;
      os << "s,path,";
      for (Eigen::Index i = 0; i < params.r; ++i) os << (i ? "," : "") << "x_" << i;
      os << '\n';
      char buf[40];
      for (std::size_t j = 0; j < bs.snapshot_s.size(); ++j)
        for (int p = 0; p < opt.N; ++p) {
          std::snprintf(buf, sizeof(buf), "%.17g", bs.snapshot_s[j]);
          os << buf << ',' << p;
          for (Eigen::Index i = 0; i < params.r; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", bs.positions[j](p, i));
            os << ',' << buf;
          }
          os << '\n';
        }
      emit(opt.out_path, os.str());
      return 0;
    } else {
      throw std::invalid_argument("simulate: unknown scheme " + opt.scheme);
    }
    json config;
    config["scheme"] = opt.scheme;
    config["N"] = opt.N;
    config["T"] = opt.T;
    config["dt"] = opt.dt;
    config["seed"] = opt.seed;
    config["model"] = model_to_json(params);
    std::cerr << config.dump() << '\n';  // run config echo, kept off stdout
    emit(opt.out_path, trajectory_csv(traj, params.r));
    return 0;
  }

  throw std::invalid_argument("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvable quantum oscillator / absorbed-diffusion toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");  // optional config file; flags override its values

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model_path, "model JSON path")->required();
    sub->add_option("--out", opt.out_path, "output path (default stdout)");
    sub->add_option("--format", opt.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* validate_cmd = app.add_subcommand("validate", "check model hypotheses");
  add_common(validate_cmd);

  auto* solve_cmd = app.add_subcommand("solve", "fixed points, ground state, decay data");
  add_common(solve_cmd);
  solve_cmd->add_option("--delta", opt.delta, "stability window offset");

  auto* flow_cmd = app.add_subcommand("flow", "closed-form conditioned flow table");
  add_common(flow_cmd);
  flow_cmd->add_option("--T", opt.T, "horizon");
  flow_cmd->add_option("--steps", opt.steps, "table rows");
  flow_cmd->add_option("--mean", opt.mean_text, "initial mean, comma separated");
  flow_cmd->add_option("--cov", opt.cov_text, "initial covariance, rows ; separated");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "energy levels (reversible models)");
  add_common(spectrum_cmd);
  spectrum_cmd->add_option("--M", opt.M, "multi-index truncation order");
  spectrum_cmd->add_option("--t", opt.t, "kernel time for --format csv grids");
  spectrum_cmd->add_option("--grid-half", opt.grid_half, "kernel grid half width");
  spectrum_cmd->add_option("--grid-n", opt.grid_n, "kernel grid points per axis");

  auto* mehler_cmd = app.add_subcommand("mehler", "kernel reconstruction error report");
  add_common(mehler_cmd);
  mehler_cmd->add_option("--t", opt.t, "kernel time");
  mehler_cmd->add_option("--M", opt.M, "truncation order");
  mehler_cmd->add_option("--grid-half", opt.grid_half, "grid half width");
  mehler_cmd->add_option("--grid-n", opt.grid_n, "points per axis");

  auto* simulate_cmd = app.add_subcommand("simulate", "seeded particle runs");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--scheme", opt.scheme,
                           "dmc|enkf|enkf1|enkf2|enkf3|hproc|backward");
  simulate_cmd->add_option("--N", opt.N, "ensemble size");
  simulate_cmd->add_option("--T", opt.T, "horizon");
  simulate_cmd->add_option("--dt", opt.dt, "step size");
  simulate_cmd->add_option("--variant", opt.variant, "interacting-diffusion variant");
  simulate_cmd->add_option("--smin", opt.smin, "backward scheme lower time");
  simulate_cmd->add_option("--mean", opt.mean_text, "initial mean");
  simulate_cmd->add_option("--cov", opt.cov_text, "initial covariance");
  simulate_cmd->add_option("--seed", opt.seed, "RNG seed")
      ->each([&](const std::string&) { opt.seed_set = true; });

  auto* verify_cmd = app.add_subcommand("verify", "run every module's invariant suite");
  add_common(verify_cmd);
  verify_cmd->add_option("--level", opt.level, "fast|full")
      ->check(CLI::IsMember({"fast", "full"}));

  CLI11_PARSE(app, argc, argv);

  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << nlohmann::json{{"error", "invalid_input"}, {"message", e.what()}}.dump()
              << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << nlohmann::json{{"error", "domain_error"}, {"message", e.what()}}.dump()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "runtime_error"}, {"message", e.what()}}.dump()
              << '\n';
    return 3;
  }
}
