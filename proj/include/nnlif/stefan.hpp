#pragma once

#include <span>
#include <vector>

#include "nnlif/history.hpp"
#include "nnlif/params.hpp"

namespace nnlif {

// time change tau = (e^{2t} - 1)/2 and its companions
double tau_of_t(double t);
double t_of_tau(double tau);
double alpha_of_tau(double tau); // (2 tau + 1)^{-1/2}, needs 2 tau + 1 > 0

// 1-D heat kernel G(x, tau, xi, eta), tau > eta
double heat_kernel(double x, double tau, double xi, double eta);

// Flux prehistory M0(tau) = alpha^2 N0(log(2 tau + 1)/2) on (-Dbar/2, 0].
struct Prehistory {
  std::vector<double> tau;
  std::vector<double> M;
  double at(double z) const;
};

Prehistory prehistory_from(const RateHistory& history, const ModelParams& p,
                           int n_samples = 129);

// Transformed initial/boundary data.  Requires normalized params
// (a = 1, V_F = 0); the initial profile lives on x <= 0 with u0(0) = 0.
struct StefanProblem {
  ModelParams params;
  std::vector<double> x;  // increasing, x.back() == 0
  std::vector<double> u0; // u0(x_i), u0.back() == 0
  Prehistory M0;

  void validate() const;
};

struct StefanSolution {
  std::vector<double> tau; // starts at 0, uniform within each window
  std::vector<double> M, s, s1;
  double sigma = 0.0;  // horizon of the first accepted window
  double m_ball = 0.0; // iterate ball radius 1 + 2 sup|u0'|

  double M_at(double t) const;
  double s_at(double t) const;
};

// Picard solve of the Volterra fixed point for M on [0, sigma]; sigma is
// halved until the sweep contracts.  Product integration tames the
// (tau - eta)^{-1/2} endpoint singularity panel by panel.
StefanSolution fixed_point_M(const StefanProblem& pr, double sigma,
                             double tol = 1e-10, int max_iter = 80,
                             int n_panels = 256);

// Extends an accepted solution window by window up to tau_target, each
// restart taking the Duhamel field at the seam as fresh initial data.
StefanSolution piecewise_extend(const StefanProblem& pr, StefanSolution sol,
                                double tau_target, double tol = 1e-10,
                                int max_iter = 80);

// Three-term Duhamel formula at fixed tau on the given x samples.
std::vector<double> duhamel_u(const StefanProblem& pr,
                              const StefanSolution& sol,
                              std::span<const double> xs, double tau);

// Maps a PDE rate history (covering [-D, T]) through the three changes
// of variables: tau grid, M = alpha^2 N, and s by quadrature.
struct StefanSeries {
  std::vector<double> tau, M, s, s1;
  Prehistory M0;
};

StefanSeries to_stefan(const RateHistory& history, const ModelParams& p,
                       int n_tau = 257);

// (t, v) <-> (tau, x) with x = v / alpha(tau) + s(tau); s interpolated
// from precomputed samples.
struct CoordinateMap {
  ModelParams params; // normalized: a = 1, V_F = 0
  std::vector<double> tau_samples, s_samples;

  double s_of_tau(double tau) const;
  void forward(double t, double v, double& tau, double& x) const;
  void inverse(double tau, double x, double& t, double& v) const;
};

} // namespace nnlif
