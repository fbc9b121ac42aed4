#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "nnlif/grid.hpp"
#include "nnlif/history.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

// Density snapshot at a single time.
struct DensityState {
  double t = 0.0;
  std::vector<double> rho; // cell averages
};

struct BlowUpRecord {
  double t_flag = 0.0;      // first threshold crossing on the coarse run
  double t_flag_fine = 0.0; // crossing on the refined confirmation run
  double T_star = 0.0;      // extrapolated divergence time from a 1/N fit
  bool confirmed = false;   // crossing time stable under refinement
  // With D > 0 a crossing cannot witness finite-time divergence: on the
  // final window [t-D, t] the drift is a recorded, bounded function, so
  // the equation there is linear and N stays finite.  Such crossings
  // are rate-ceiling stops; the blow-up flag proper is
  // confirmed && diverging.
  bool diverging = true;
};

// Firing-rate output of a simulation, sampled once per accepted step.
struct FiringRateSeries {
  std::vector<double> t;
  std::vector<double> N;
  std::vector<double> mass;
  std::vector<double> first_moment;
  std::optional<BlowUpRecord> blow_up;
};

struct SolverOptions {
  double dt = 1e-3;              // macro step; substepped to honor the CFL bound
  double T = 1.0;                // final time
  double blow_up_threshold = 1e3;
  bool detect_blow_up = true;    // rerun refined to confirm a crossing
  double snapshot_every = 0.0;   // 0 disables snapshots
  int max_substeps = 100000;
};

struct SimulationResult {
  FiringRateSeries rates;
  DensityState final_state;
  std::vector<DensityState> snapshots;
  Grid grid;
};

// Boundary firing rate N = -a d_v rho(V_F).  One-sided second-order
// stencil through the last two cell averages and the zero boundary value.
double firing_rate(const std::vector<double>& rho, const Grid& grid, double a);

// One IMEX step: explicit minmod-limited upwind advection with drift
// mu - v, then implicit backward-Euler diffusion whose V_F boundary flux
// is reinjected into the V_R cell.  Returns the firing rate assembled
// from the implicit boundary flux.  dt must already satisfy the CFL bound.
double step(std::vector<double>& rho, const Grid& grid, const ModelParams& p,
            double mu, double dt);

// Integrates on [0, T] with the delayed drift read from history, which is
// extended in place.  rho0 is sampled at cell centers and L1-normalized.
SimulationResult simulate(const ModelParams& p, const Grid& grid,
                          const std::function<double(double)>& rho0,
                          RateHistory history, const SolverOptions& opt);

SimulationResult simulate(const ModelParams& p, const Grid& grid,
                          const std::vector<double>& rho0, RateHistory history,
                          const SolverOptions& opt);

} // namespace nnlif
