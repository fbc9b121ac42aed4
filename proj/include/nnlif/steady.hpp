#pragma once

#include <vector>

#include "nnlif/grid.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

// Stationary profile and firing rate.  rho_inf lives on the node grid,
// vanishes exactly at V_F, and integrates to 1 up to the bisection
// tolerance of the root solve that produced it.
struct SteadyState {
  double N_inf = 0.0;
  std::vector<double> rho_inf;
  double b_used = 0.0;
  Grid grid;
};

// Mass of the (un-normalized) implicit stationary profile with firing
// rate N.  The Gaussian tail towards -infinity is integrated exactly in
// terms of erf; the remaining [V_R, V_F] integral uses the adaptive
// trapezoid with Richardson check.
double steady_mass(const ModelParams& p, double N);

// Implicit-formula profile with firing rate N sampled on grid nodes.
std::vector<double> steady_profile(const ModelParams& p, double N,
                                   const Grid& grid);

// Scans F(N) - 1 on [N_lo, N_hi], refines every sign change by
// bisection to relative tolerance 1e-10 in N.  May return an empty list
// (no steady state in the bracket).
std::vector<SteadyState> steady_state_candidates(const ModelParams& p,
                                                 double N_lo, double N_hi,
                                                 int n_scan, const Grid& grid);

} // namespace nnlif
