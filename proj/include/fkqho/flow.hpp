#pragma once

#include "fkqho/ground_state.hpp"

#include <vector>

namespace fkqho {

/// Normalized flow state at time t: conditioned law, accumulated log survival
/// mass, and the reweighted companion law.
struct FlowState {
  double t;
  GaussianState eta_t;
  double log_mass;  // log of the survival probability from eta_0
  GaussianState eta_h_t;
};

/// Closed-form propagation of a Gaussian initial law. `panels` controls the
/// Simpson rule for the log-mass integral (0 picks a t-scaled default).
FlowState propagate(const RiccatiSolution& sol, const GroundState& gs,
                    const GaussianState& eta0, double t, int panels = 0);

/// Mean/covariance only (no quadrature): the primary exponential-semigroup route.
GaussianState propagate_state(const RiccatiSolution& sol, const GaussianState& eta0,
                              double t);

/// Same law through the time-zero Gramian parametrization; valid for every
/// PSD covariance including Dirac initial states.
GaussianState propagate_state_alt(const RiccatiSolution& sol, const GaussianState& eta0,
                                  double t);

struct SurvivalResult {
  double log_prob;
  double prob;
  double rate;  // -log(prob) / t
};

SurvivalResult survival_probability(const RiccatiSolution& sol, const GroundState& gs,
                                    const GaussianState& eta0, double t, int panels = 0);

struct KtResult {
  double k_t;     // determinant/quadratic closed form
  double form_a;  // e^{lambda0 t} K_t(1)(x) via the time-zero Gramian route
  double form_b;  // h0(x) k_t(x) / eta_inf(h0)
};

/// The scalar normalizer pair; the two members must agree.
KtResult kt_function(const RiccatiSolution& sol, const GroundState& gs, double t,
                     const VectorXd& x, int panels = 0);

struct EntropyDecayRow {
  double t;
  double ent;
  double fisher;
  double fisher_weighted;  // diffusion-weighted variant
  double dent_fd;          // central finite difference of ent
  double debruijn_residual;
  double ent_bound;           // e^{-t/iota_h} ent_0
  double fisher_bound;        // alpha_h^2 e^{-2 beta_h t} fisher_0
  double fisher_bound_exact;  // ||e^{t drift_h}||^2 fisher_0
  bool lsi_ok;                // ent <= iota_h / 2 * fisher
};

struct EntropyDecayReport {
  std::vector<EntropyDecayRow> rows;
  double fd_step;
  bool decays_hold;  // ent and fisher below their exponential bounds throughout
};

/// Entropy/Fisher table along the conjugated flow towards its stationary law.
/// The unweighted de Bruijn residual vanishes when R = I; the weighted Fisher
/// column carries the general identity.
EntropyDecayReport entropy_decay_report(const GroundState& gs, const GaussianState& eta0_h,
                                        double T, int steps, double fd_step = 1e-3);

struct StabilityRow {
  double t;
  double w2;
  double ent;
  double w2_bound;   // contraction bound with certified constants
  double ent_bound;  // valid past the entropy horizon
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double beta;
  double fitted_w2_slope;   // least-squares slope of log w2 on [5/beta, 10/beta]
  double fitted_ent_slope;  // same for log ent
  double entropy_horizon;   // time past which ent_bound applies
  bool bounds_hold;
};

StabilityReport stability_report(const RiccatiSolution& sol, const GaussianState& eta0,
                                 const GaussianState& mu0, double T, int steps,
                                 double delta = 0.1);

}  // namespace fkqho
