#pragma once

#include <cstdint>
#include <vector>

#include "nnlif/grid.hpp"
#include "nnlif/history.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

struct Ensemble {
  std::vector<double> potentials;
  double t = 0.0;
  std::vector<double> spike_log; // crossing timestamps (step-end resolution)
};

struct ParticleResult {
  Ensemble ensemble; // terminal state
  std::vector<double> rate_t; // bin right edges
  std::vector<double> rate_N; // binned estimate, spikes / (n * bin width)
  std::vector<double> hist_density; // terminal histogram on grid cells
  std::uint64_t n_spikes = 0;
};

// Inverse-CDF sampling of n initial potentials from a cell-density profile.
std::vector<double> sample_from_density(const Grid& grid,
                                        const std::vector<double>& rho, int n,
                                        std::uint64_t seed);

// Euler-Maruyama for dV = (-V + b0 + b N_hat(t-D)) dt + sqrt(2a) dW with
// threshold reset V_F -> V_R at step end.  The delayed coupling reads the
// binned empirical rate (or the supplied history for t - D <= 0).
ParticleResult particle_simulate(const ModelParams& p,
                                 std::vector<double> initial_potentials,
                                 const RateHistory& history, double dt,
                                 double T, double rate_bandwidth,
                                 std::uint64_t seed, const Grid& hist_grid);

} // namespace nnlif
