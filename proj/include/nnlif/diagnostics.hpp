#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nnlif/fp_solver.hpp"
#include "nnlif/steady.hpp"

namespace nnlif {

// Convex entropy generator with derivatives; quadratic by default.
struct EntropyG {
  std::function<double(double)> G, dG, ddG;
  static EntropyG quadratic();
};

struct EntropyReport {
  std::vector<double> times;
  std::vector<double> E;
  std::vector<double> dE_dt_measured;
  std::vector<double> dE_dt_identity;
  std::vector<double> term_dissipation; // <= 0
  std::vector<double> term_boundary;    // <= 0
  std::vector<double> term_delay;       // vanishes at b = 0
  double mu_fit = 0.0;
  double mu_r2 = 0.0;
  double C0 = 0.0;           // sup rho0 / rho_inf
  bool hypothesis_ok = false; // rho0 <= C0 rho_inf with finite C0
  double max_identity_residual = 0.0;
};

struct MomentReport {
  std::vector<double> times;
  std::vector<double> m1;
  std::vector<double> ode_residual; // d m1/dt + m1 - mu(t-D) + (V_F-V_R) N
  double max_residual = 0.0;
};

struct PeriodicityReport {
  double period = 0.0;
  double lhs = 0.0; // first moment of the period-averaged density
  double rhs = 0.0; // (b - (V_F - V_R)) * averaged N
  double residual = 0.0;
  bool lhs_nonpositive = false; // forced when V_F <= 0
  bool rhs_positive = false;    // forced when b > V_F - V_R and N_bar > 0
  bool contradiction = false;   // both of the above: no periodic solution
};

struct L2Budget {
  double integral = 0.0; // int_J N^2
  double C_fit = 0.0;    // max over sliding windows of integral/(1+|J|)
};

// int rho_inf G(rho/rho_inf) by midpoint quadrature on cell centers.
double relative_entropy(const std::vector<double>& rho,
                        const SteadyState& steady,
                        const EntropyG& g = EntropyG::quadratic());

// Term-by-term check of the entropy dissipation identity along a run.
// initial_history must cover [-D, 0] so the delay term can be read
// before the series starts.
EntropyReport entropy_identity_check(const std::vector<DensityState>& snapshots,
                                     const FiringRateSeries& series,
                                     const RateHistory& initial_history,
                                     const SteadyState& steady,
                                     const ModelParams& p,
                                     const EntropyG& g = EntropyG::quadratic());

// Log-linear least squares on the trailing fraction of an entropy trace.
struct TailFit {
  double mu = 0.0; // decay rate (minus the fitted slope of log E)
  double r2 = 0.0;
  bool ok = false;
};

TailFit fit_decay(const std::vector<double>& times, const std::vector<double>& E,
                  double tail_fraction = 0.5);

// Smallest nonzero generalized Rayleigh quotient of the rho_inf-weighted
// stiffness against the rho_inf-weighted mass form (mean-centered).
double poincare_constant(const std::vector<double>& rho_inf, const Grid& grid,
                         double tol = 1e-12, int max_iter = 500);

L2Budget firing_rate_l2_budget(const std::vector<double>& t,
                               const std::vector<double>& N, double t_lo,
                               double t_hi);

MomentReport moment_ode_residual(const FiringRateSeries& series,
                                 const RateHistory& initial_history,
                                 const ModelParams& p);

// First-moment identity test for one candidate period, averaged over the
// trailing window [T - period, T] of the run.
PeriodicityReport periodicity_obstruction(
    const std::vector<DensityState>& snapshots, const FiringRateSeries& series,
    const ModelParams& p, const Grid& grid, double candidate_period);

} // namespace nnlif
