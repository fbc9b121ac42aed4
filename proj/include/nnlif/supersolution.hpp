#pragma once

#include <vector>

#include "nnlif/grid.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

// Exponential-in-time comparison profile rho_bar(v,t) = e^{xi t} f(v).
// f is flat left of V_R, decays through a smooth cutoff in the middle,
// and ends on the exponential branch (1/delta)(1 - e^{delta(v-V_F)}).
struct SuperSolution {
  double xi = 0.0;      // growth rate, > 1
  double delta = 0.0;   // decay parameter of the right branch
  double epsilon = 0.0; // cutoff transition width
  double B = 0.0;       // drift bound sup |-v + b N|
  double cutoff_lo = 0.0; // (V_F+V_R)/2, psi == 1 to the left
  std::vector<double> f_profile;
  std::vector<double> psi_profile;

  double V_R = 0.0, V_F = 0.0, a = 1.0;

  // analytic f and derivatives (left-branch values at v <= V_R)
  double f(double v) const;
  double df(double v) const;
  double ddf(double v) const;
  double psi(double v) const;

  // comparison envelope N_bar(t) = alpha * a * e^{xi t}
  double envelope(double alpha, double t) const;
};

struct SuperSolutionReport {
  double min_residual_left = 0.0;
  double min_residual_middle = 0.0;
  double min_residual_right = 0.0;
  double jump_lhs = 0.0; // f'(V_R+) - f'(V_R-)
  double jump_rhs = 0.0; // f'(V_F)
  bool jump_ok = false;
  bool pass = false;
};

// Builds the comparison profile for a drift bound derived from N0_max.
// Requires b0 = 0 (the construction absorbs no constant drift).
SuperSolution build_super_solution(const ModelParams& p, double N0_max,
                                   const Grid& grid);

// Evaluates the residual (xi-1) f + (-v + bN) f' - a f'' region by
// region at both ends of N in [0, N0_max] (the residual is affine in N)
// and the V_R derivative-jump inequality.
SuperSolutionReport verify_super_solution(const SuperSolution& ss,
                                          const ModelParams& p, double N0_max,
                                          const Grid& grid,
                                          double tolerance = 1e-8);

} // namespace nnlif
