#include "nnlif/supersolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nnlif {

namespace {

// standard C-infinity ramp built from bump(x) = exp(-1/x)
inline double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
inline double dbump(double x) { return x > 0.0 ? bump(x) / (x * x) : 0.0; }
inline double ddbump(double x) {
  if (x <= 0.0) return 0.0;
  double x2 = x * x;
  return bump(x) * (1.0 / (x2 * x2) - 2.0 / (x2 * x));
}

// psi(s) = A/(A+C), A = bump(1-s), C = bump(s); 1 at s<=0, 0 at s>=1
struct Ramp {
  double value, d1, d2; // psi, dpsi/ds, d2psi/ds2
};

Ramp ramp(double s) {
  if (s <= 0.0) return {1.0, 0.0, 0.0};
  if (s >= 1.0) return {0.0, 0.0, 0.0};
  double A = bump(1.0 - s), C = bump(s);
  double Ap = -dbump(1.0 - s), Cp = dbump(s);
  double App = ddbump(1.0 - s), Cpp = ddbump(s);
  double den = A + C;
  double u = Ap * C - A * Cp;
  double up = App * C - A * Cpp;
  double psi = A / den;
  double d1 = u / (den * den);
  double d2 = (up * den - 2.0 * u * (Ap + Cp)) / (den * den * den);
  return {psi, d1, d2};
}

} // namespace

double SuperSolution::psi(double v) const {
  return ramp((v - cutoff_lo) / epsilon).value;
}

double SuperSolution::f(double v) const {
  if (v <= V_R) return 1.0;
  Ramp r = ramp((v - cutoff_lo) / epsilon);
  double e1 = std::exp(V_R - v);
  double g2 = (1.0 - std::exp(delta * (v - V_F))) / delta;
  return e1 * r.value + g2 * (1.0 - r.value);
}

double SuperSolution::df(double v) const {
  if (v <= V_R) return 0.0;
  Ramp r = ramp((v - cutoff_lo) / epsilon);
  double p = r.value, p1 = r.d1 / epsilon;
  double e1 = std::exp(V_R - v);
  double g2 = (1.0 - std::exp(delta * (v - V_F))) / delta;
  double g2p = -std::exp(delta * (v - V_F));
  return -e1 * p + e1 * p1 + g2p * (1.0 - p) - g2 * p1;
}

double SuperSolution::ddf(double v) const {
  if (v <= V_R) return 0.0;
  Ramp r = ramp((v - cutoff_lo) / epsilon);
  double p = r.value, p1 = r.d1 / epsilon, p2 = r.d2 / (epsilon * epsilon);
  double e1 = std::exp(V_R - v);
  double g2 = (1.0 - std::exp(delta * (v - V_F))) / delta;
  double g2p = -std::exp(delta * (v - V_F));
  double g2pp = -delta * std::exp(delta * (v - V_F));
  return e1 * p - 2.0 * e1 * p1 + e1 * p2 + g2pp * (1.0 - p) - 2.0 * g2p * p1 -
         g2 * p2;
}

double SuperSolution::envelope(double alpha, double t) const {
  return alpha * a * std::exp(xi * t);
}

SuperSolution build_super_solution(const ModelParams& p, double N0_max,
                                   const Grid& grid) {
  p.validate();
  if (p.b0 != 0.0)
    throw InvalidParameter("build_super_solution: requires b0 = 0");
  if (!(N0_max >= 0.0))
    throw InvalidParameter("build_super_solution: N0_max must be >= 0");

  SuperSolution ss;
  ss.V_R = p.V_R;
  ss.V_F = p.V_F;
  ss.a = p.a;
  ss.cutoff_lo = 0.5 * (p.V_F + p.V_R);
  ss.epsilon = 0.25 * (p.V_F - p.V_R);

  // drift bound over (V_R, V_F) x [0, N0_max]; |-v + bN| is affine in
  // both arguments, so corners suffice
  double B = 0.0;
  for (double v : {p.V_R, p.V_F})
    for (double N : {0.0, N0_max}) B = std::max(B, std::abs(-v + p.b * N));
  ss.B = B;
  ss.delta = std::max(1.0, B / p.a);

  // minimal xi on the middle interval, plus 10% margin
  const double hi = ss.cutoff_lo + ss.epsilon;
  const int m = 4000;
  double inf_f = std::numeric_limits<double>::infinity();
  double sup_rhs = 0.0;
  for (int i = 0; i <= m; ++i) {
    double v = p.V_R + (hi - p.V_R) * i / m;
    double fv = ss.f(v);
    inf_f = std::min(inf_f, fv);
    sup_rhs = std::max(sup_rhs, B * std::abs(ss.df(v)) + p.a * std::abs(ss.ddf(v)));
  }
  if (!(inf_f > 1e-12))
    throw NumericError("build_super_solution: f vanished on the middle interval");
  const double margin = 1e-6;
  ss.xi = std::max(1.0 + margin, 1.0 + 1.1 * sup_rhs / inf_f);

  ss.f_profile.resize(grid.n_cells);
  ss.psi_profile.resize(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) {
    ss.f_profile[i] = ss.f(grid.center(i));
    ss.psi_profile[i] = ss.psi(grid.center(i));
  }
  return ss;
}

SuperSolutionReport verify_super_solution(const SuperSolution& ss,
                                          const ModelParams& p, double N0_max,
                                          const Grid& grid, double tolerance) {
  if ((int)ss.f_profile.size() != grid.n_cells)
    throw InvalidParameter("verify_super_solution: grid mismatch");

  SuperSolutionReport rep;
  double inf = std::numeric_limits<double>::infinity();
  rep.min_residual_left = inf;
  rep.min_residual_middle = inf;
  rep.min_residual_right = inf;

  const double mid_hi = ss.cutoff_lo + ss.epsilon;
  for (int i = 0; i < grid.n_cells; ++i) {
    if (i == grid.r_index) continue; // jump handled separately
    double v = grid.center(i);
    for (double N : {0.0, N0_max}) {
      double r = (ss.xi - 1.0) * ss.f(v) + (-v + p.b * N) * ss.df(v) -
                 p.a * ss.ddf(v);
      if (v < p.V_R) rep.min_residual_left = std::min(rep.min_residual_left, r);
      else if (v <= mid_hi) rep.min_residual_middle = std::min(rep.min_residual_middle, r);
      else rep.min_residual_right = std::min(rep.min_residual_right, r);
    }
  }

  // distributional condition at V_R: f'(V_R+) - f'(V_R-) <= f'(V_F)
  const double h = 1e-9 * (p.V_F - p.V_R);
  rep.jump_lhs = ss.df(p.V_R + h) - ss.df(p.V_R - h);
  rep.jump_rhs = ss.df(p.V_F);
  // the boundary slope must be strictly negative for the envelope
  // N_bar = -a f'(V_F) e^{xi t} to dominate a positive firing rate
  rep.jump_ok = rep.jump_lhs <= rep.jump_rhs + tolerance &&
                rep.jump_rhs <= -tolerance;

  rep.pass = rep.jump_ok && rep.min_residual_left >= -tolerance &&
             rep.min_residual_middle >= -tolerance &&
             rep.min_residual_right >= -tolerance;
  return rep;
}

} // namespace nnlif
