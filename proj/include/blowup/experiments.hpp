#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blowup/modulation.hpp"

namespace blowup {

// ---- residual scan ----

struct ResidualScanRow {
  double s = 0;
  double L2 = 0, H1 = 0, yR = 0, proj = 0;               // raw norms at s
  double s3_H1 = 0, s2_yR = 0, s4_proj = 0;              // at s
  double env_s3_H1 = 0, env_s2_yR = 0, env_s4_proj = 0;  // max over [s, s + pi]
  double ds_error = 0;
  std::size_t grid_N = 0;
};

// Residual of the ansatz on the initial-data family Gamma_s^in, differentiated
// along the m = 0 vector field.
ResidualScanRow residual_scan_point(const Ansatz& an, double s, int envelope_samples = 16, double beta = 0.0);

// ---- integrator and symmetry checks ----

struct PropagationCheck {
  double error = 0;       // L^2 error against the closed form at t1
  double mass_drift = 0;  // relative
  double energy_drift = 0;
  long steps = 0;
};
// S(t0) -> t1 with dt = c_dt t^2.
PropagationCheck propagate_S(double L, std::size_t N, double t0, double t1, double c_dt);

struct ConformalReport {
  double soliton_to_S = 0;    // ||T(e^{it}Q)(-1) - S(-1)|| at t = -1 -> tau = 1
  double involution = 0;      // ||T(T u) - u(-x)||
  double mass_change = 0;     // relative
  double commutation = 0;     // ||T(evolve u) - evolve(T u)||
};
ConformalReport conformal_check(double L, std::size_t N);

struct CoercivityReport {
  int samples = 0;
  double zeta_Lplus = 0, zeta_Lminus = 0, zeta_G = 0;
  double zeta_hat = 0;  // min of the above
  double square_identity = 0;  // max relative mismatch of the completed square
};
CoercivityReport coercivity_suite(const Ansatz& an, int samples, double amplitude, std::uint64_t seed);

struct RoundTripReport {
  int samples = 0;
  double max_param_error = 0;
  double max_ortho = 0;
  double max_eps = 0;
  int max_iters = 0;
};
RoundTripReport modulation_roundtrip(const ProfileSet& P, int samples, std::uint64_t seed);

// ---- blow-up runs ----

struct RunOptions {
  bool stop_on_exit = false;
  bool integrate_j = false;
  std::vector<double> probe_times;  // exact times at which a row is recorded
  DecomposeOptions decompose;
};

struct RunRow {
  double t = 0, s = 0;
  double dx_norm = 0, rate_ratio = 0;
  ModParams g;
  double eps_L2 = 0;
  double m_norm = 0, m_s3 = 0;
  double J = 0, g_exit = 0;
  double rstar_dev = 0, rstar_ratio = 0;
  double mass_drift = 0, energy_drift = 0, tail = 0;
  double N_fun = 0, H_fun = 0, K_fun = 0, G_fun = 0;
};

struct RunReport {
  SimConfig cfg;
  std::vector<RunRow> rows;
  std::vector<ComplexField> snapshots;
  bool completed = false;
  std::string halt_reason;
  double last_valid_t = 0;
  long steps = 0;
  int exit_sign = 0;
  double exit_s = 0, exit_t = 0;
  // decompositions that failed (modulation columns NaN; dt from ||u_x||)
  int decomposition_failures = 0;
  std::string first_failure;

  const RunRow* row_at(double t, double tol = 1e-12) const;
};

RunReport blowup_run(const Ansatz& an, const SimConfig& cfg, const RunOptions& opt = {});

struct SweepEntry {
  double beta = 0;
  int exit_sign = 0;
  double exit_s = 0, exit_t = 0;
  std::string halt_reason;
};
struct SweepReport {
  std::vector<SweepEntry> entries;
  std::vector<std::pair<double, double>> brackets;  // consecutive betas with opposite exit signs
};
SweepReport beta_sweep(const Ansatz& an, const SimConfig& base, const std::vector<double>& betas);

}  // namespace blowup
