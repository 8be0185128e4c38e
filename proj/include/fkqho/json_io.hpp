#pragma once

#include "fkqho/flow.hpp"
#include "fkqho/particles.hpp"
#include "fkqho/spectral.hpp"

#include <json.hpp>

#include <string>

namespace fkqho {

using nlohmann::json;

json matrix_to_json(const MatrixXd& m);
json vector_to_json(const VectorXd& v);
MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols);

/// Model files carry exactly {"r", "A", "B", "S"}; anything else is rejected.
ModelParams model_from_json(const json& j);
json model_to_json(const ModelParams& params);
ModelParams load_model(const std::string& path);

json validation_to_json(const ValidationReport& report);
json solution_to_json(const RiccatiSolution& sol, const DecayConstants& dc);
json ground_state_to_json(const GroundState& gs);
json spectrum_to_json(const SpectralBasis& basis);
json stability_to_json(const StabilityReport& report);
json mehler_to_json(const MehlerReport& report);

/// CSV rows: t, mean components, covariance upper triangle, log_mass.
std::string flow_csv(const RiccatiSolution& sol, const GroundState& gs,
                     const GaussianState& eta0, double T, int steps);

/// CSV rows: t, mean components, covariance upper triangle, lambda0_estimate,
/// jump_count.
std::string trajectory_csv(const Trajectory& traj, Eigen::Index r);

std::string entropy_report_csv(const EntropyDecayReport& report);
std::string stability_report_csv(const StabilityReport& report);

/// CSV rows: x, y, value of the truncated conjugated kernel on the tensor
/// grid {-half..half}^r x same (r <= 2).
std::string kernel_grid_csv(const SpectralBasis& basis, const GroundState& gs, double t,
                            double grid_half, int grid_n);

void write_file(const std::string& path, const std::string& content);

}  // namespace fkqho
