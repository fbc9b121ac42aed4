#include "nnlif/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nnlif/quadrature.hpp"

namespace nnlif {

EntropyG EntropyG::quadratic() {
  EntropyG g;
  g.G = [](double x) { return (x - 1.0) * (x - 1.0); };
  g.dG = [](double x) { return 2.0 * (x - 1.0); };
  g.ddG = [](double) { return 2.0; };
  return g;
}

namespace {

constexpr double RHO_FLOOR = 1e-300;

void check_weight(const std::vector<double>& rho_inf) {
  for (double w : rho_inf)
    if (!(w > RHO_FLOOR))
      throw NumericError("diagnostics: rho_inf below floor on interior cell");
}

// N(t) across the prehistory/series seam
double rate_at(const FiringRateSeries& s, const RateHistory& h, double t) {
  if (t <= s.t.front()) return h.at(std::max(t, h.front_time()));
  return lerp_series(s.t, s.N, std::min(t, s.t.back()));
}

struct LineFit {
  double slope = 0.0, r2 = 0.0;
  bool ok = false;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  size_t n = x.size();
  if (n < 3) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i];
    sxy += x[i] * y[i]; syy += y[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  double ss_tot = syy - sy * sy / n;
  double icpt = (sy - f.slope * sx) / n;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double e = y[i] - (icpt + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.ok = true;
  return f;
}

} // namespace

double relative_entropy(const std::vector<double>& rho,
                        const SteadyState& steady, const EntropyG& g) {
  const Grid& grid = steady.grid;
  if (rho.size() != steady.rho_inf.size() ||
      (int)rho.size() != grid.n_cells)
    throw InvalidParameter("relative_entropy: size mismatch");
  check_weight(steady.rho_inf);
  double E = 0.0;
  for (int i = 0; i < grid.n_cells; ++i)
    E += steady.rho_inf[i] * g.G(rho[i] / steady.rho_inf[i]);
  return E * grid.dv;
}

EntropyReport entropy_identity_check(const std::vector<DensityState>& snapshots,
                                     const FiringRateSeries& series,
                                     const RateHistory& initial_history,
                                     const SteadyState& steady,
                                     const ModelParams& p, const EntropyG& g) {
  if (snapshots.size() < 3)
    throw InvalidParameter("entropy_identity_check: need >= 3 snapshots");
  const Grid& grid = steady.grid;
  const std::vector<double>& w = steady.rho_inf;
  check_weight(w);
  const int n = grid.n_cells;
  const double dv = grid.dv;
  const double N_inf = steady.N_inf;

  EntropyReport rep;
  rep.C0 = 0.0;
  for (int i = 0; i < n; ++i)
    rep.C0 = std::max(rep.C0, snapshots.front().rho[i] / w[i]);
  rep.hypothesis_ok = std::isfinite(rep.C0);

  // d rho_inf / dv at centers (one-sided at the ends)
  std::vector<double> dw(n);
  for (int i = 1; i + 1 < n; ++i) dw[i] = (w[i + 1] - w[i - 1]) / (2.0 * dv);
  dw[0] = (w[1] - w[0]) / dv;
  dw[n - 1] = (w[n - 1] - w[n - 2]) / dv;

  for (const DensityState& snap : snapshots) {
    double t = snap.t;
    double N = rate_at(series, initial_history, t);
    double Nd = rate_at(series, initial_history, t - p.D);
    double F = N / N_inf;

    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = snap.rho[i] / w[i];

    double diss = 0.0;
    for (int j = 1; j < n; ++j) {
      double wm = 0.5 * (w[j - 1] + w[j]);
      double dq = (q[j] - q[j - 1]) / dv;
      diss += wm * dq * dq * g.ddG(0.5 * (q[j - 1] + q[j])) * dv;
    }
    // half cell against the threshold where q(V_F) = F by l'Hopital
    {
      double dq = (F - q[n - 1]) / (0.5 * dv);
      diss += 0.5 * w[n - 1] * dq * dq * g.ddG(0.5 * (F + q[n - 1])) * 0.5 * dv;
    }
    double term_d = -p.a * diss;

    double qr = q[grid.r_index];
    double term_b = -N_inf * (g.G(F) - g.G(qr) - (F - qr) * g.dG(qr));

    double integ = 0.0;
    for (int i = 0; i < n; ++i)
      integ += dw[i] * (g.G(q[i]) - q[i] * g.dG(q[i]));
    double term_delay = p.b * (Nd - N_inf) * integ * dv;

    rep.times.push_back(t);
    rep.E.push_back(relative_entropy(snap.rho, steady, g));
    rep.term_dissipation.push_back(term_d);
    rep.term_boundary.push_back(term_b);
    rep.term_delay.push_back(term_delay);
    rep.dE_dt_identity.push_back(term_d + term_b + term_delay);
  }

  size_t m = rep.times.size();
  rep.dE_dt_measured.resize(m);
  for (size_t k = 0; k < m; ++k) {
    size_t lo = k == 0 ? 0 : k - 1;
    size_t hi = k + 1 == m ? k : k + 1;
    rep.dE_dt_measured[k] =
        (rep.E[hi] - rep.E[lo]) / (rep.times[hi] - rep.times[lo]);
  }
  rep.max_identity_residual = 0.0;
  for (size_t k = 1; k + 1 < m; ++k)
    rep.max_identity_residual =
        std::max(rep.max_identity_residual,
                 std::abs(rep.dE_dt_measured[k] - rep.dE_dt_identity[k]));

  TailFit f = fit_decay(rep.times, rep.E, 0.5);
  rep.mu_fit = f.mu;
  rep.mu_r2 = f.r2;
  return rep;
}

TailFit fit_decay(const std::vector<double>& times, const std::vector<double>& E,
                  double tail_fraction) {
  if (times.size() != E.size() || times.empty() || !(tail_fraction > 0.0))
    throw InvalidParameter("fit_decay: bad input");
  double t_cut = times.back() - tail_fraction * (times.back() - times.front());
  std::vector<double> ft, fy;
  for (size_t k = 0; k < times.size(); ++k)
    if (times[k] >= t_cut && E[k] > 0.0) {
      ft.push_back(times[k]);
      fy.push_back(std::log(E[k]));
    }
  LineFit f = fit_line(ft, fy);
  return {f.ok ? -f.slope : 0.0, f.r2, f.ok};
}

double poincare_constant(const std::vector<double>& rho_inf, const Grid& grid,
                         double tol, int max_iter) {
  const int n = grid.n_cells;
  if ((int)rho_inf.size() != n || n < 3)
    throw InvalidParameter("poincare_constant: size mismatch");
  check_weight(rho_inf);
  const double dv = grid.dv;

  // Generalized problem A h = lambda B h with the weighted stiffness
  // (face conductances) and the diagonal mass B; similarity by B^{-1/2}
  // gives a symmetric tridiagonal whose entries are *ratios* of
  // neighboring weights, so the e^{-v^2/2a} dynamic range cancels and
  // stays well scaled even on deep-tail grids.
  std::vector<double> c(n); // c[j] joins cells j-1, j
  for (int j = 1; j < n; ++j) c[j] = 0.5 * (rho_inf[j - 1] + rho_inf[j]) / dv;
  std::vector<double> d(n), e(n - 1);
  for (int i = 0; i < n; ++i) {
    double diag = (i > 0 ? c[i] : 0.0) + (i + 1 < n ? c[i + 1] : 0.0);
    d[i] = diag / (rho_inf[i] * dv);
  }
  for (int i = 0; i + 1 < n; ++i)
    e[i] = -c[i + 1] / (dv * std::sqrt(rho_inf[i] * rho_inf[i + 1]));

  // Sturm count: number of eigenvalues below sigma via the LDL^T pivots
  auto count_below = [&](double sigma) {
    int cnt = 0;
    double q = d[0] - sigma;
    if (q < 0.0) ++cnt;
    for (int i = 1; i < n; ++i) {
      if (q == 0.0) q = 1e-300;
      q = d[i] - sigma - e[i - 1] * e[i - 1] / q;
      if (q < 0.0) ++cnt;
    }
    return cnt;
  };

  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = d[i] + (i > 0 ? std::abs(e[i - 1]) : 0.0) +
               (i + 1 < n ? std::abs(e[i]) : 0.0);
    hi = std::max(hi, g);
  }
  if (!std::isfinite(hi)) throw NumericError("poincare_constant: breakdown");

  // bisect for the second-smallest eigenvalue (the smallest is the
  // constant kernel at ~0, excluded by mean-centering)
  double lo = 0.0;
  for (int it = 0; it < max_iter && hi - lo > tol * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (count_below(mid) >= 2 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

L2Budget firing_rate_l2_budget(const std::vector<double>& t,
                               const std::vector<double>& N, double t_lo,
                               double t_hi) {
  if (t.size() != N.size() || t.size() < 2 || !(t_lo < t_hi))
    throw InvalidParameter("firing_rate_l2_budget: bad window");
  t_lo = std::max(t_lo, t.front());
  t_hi = std::min(t_hi, t.back());
  if (!(t_lo < t_hi)) throw InvalidParameter("firing_rate_l2_budget: empty window");

  auto sq_int = [&](double lo, double hi) {
    std::vector<double> ks{lo};
    for (size_t i = 0; i < t.size(); ++i)
      if (t[i] > lo && t[i] < hi) ks.push_back(t[i]);
    ks.push_back(hi);
    double acc = 0.0;
    for (size_t i = 0; i + 1 < ks.size(); ++i) {
      double fa = lerp_series(t, N, ks[i]), fb = lerp_series(t, N, ks[i + 1]);
      acc += 0.5 * (fa * fa + fb * fb) * (ks[i + 1] - ks[i]);
    }
    return acc;
  };

  L2Budget out;
  out.integral = sq_int(t_lo, t_hi);
  double span = t_hi - t_lo;
  for (double frac : {0.25, 0.5, 1.0}) {
    double L = frac * span;
    for (double s = t_lo; s + L <= t_hi + 1e-12; s += 0.25 * L) {
      double C = sq_int(s, std::min(s + L, t_hi)) / (1.0 + L);
      out.C_fit = std::max(out.C_fit, C);
    }
  }
  return out;
}

MomentReport moment_ode_residual(const FiringRateSeries& series,
                                 const RateHistory& initial_history,
                                 const ModelParams& p) {
  MomentReport rep;
  size_t m = series.t.size();
  if (m < 3) throw InvalidParameter("moment_ode_residual: series too short");
  for (size_t k = 1; k + 1 < m; ++k) {
    double t = series.t[k];
    double dm = (series.first_moment[k + 1] - series.first_moment[k - 1]) /
                (series.t[k + 1] - series.t[k - 1]);
    double mu = p.b0 + p.b * rate_at(series, initial_history, t - p.D);
    double res =
        dm + series.first_moment[k] - mu + (p.V_F - p.V_R) * series.N[k];
    rep.times.push_back(t);
    rep.m1.push_back(series.first_moment[k]);
    rep.ode_residual.push_back(res);
    rep.max_residual = std::max(rep.max_residual, std::abs(res));
  }
  return rep;
}

PeriodicityReport periodicity_obstruction(
    const std::vector<DensityState>& snapshots, const FiringRateSeries& series,
    const ModelParams& p, const Grid& grid, double candidate_period) {
  if (p.b0 != 0.0)
    throw InvalidParameter("periodicity_obstruction: requires b0 = 0");
  if (snapshots.size() < 2)
    throw InvalidParameter("periodicity_obstruction: need snapshots");
  double T = snapshots.back().t;
  double t0 = T - candidate_period;
  if (candidate_period <= 0.0 || t0 < snapshots.front().t - 1e-12)
    throw InvalidParameter("periodicity_obstruction: period exceeds trajectory");

  // time-averaged density over the trailing window (trapezoid over the
  // snapshots that fall inside it)
  std::vector<const DensityState*> win;
  for (const DensityState& s : snapshots)
    if (s.t >= t0 - 1e-12) win.push_back(&s);
  if (win.size() < 2)
    throw InvalidParameter("periodicity_obstruction: too few snapshots in window");

  std::vector<double> phi(grid.n_cells, 0.0);
  double span = win.back()->t - win.front()->t;
  for (size_t k = 0; k + 1 < win.size(); ++k) {
    double wdt = 0.5 * (win[k + 1]->t - win[k]->t) / span;
    for (int i = 0; i < grid.n_cells; ++i)
      phi[i] += wdt * (win[k]->rho[i] + win[k + 1]->rho[i]);
  }

  PeriodicityReport rep;
  rep.period = candidate_period;
  for (int i = 0; i < grid.n_cells; ++i)
    rep.lhs += grid.center(i) * phi[i] * grid.dv;

  // averaged firing rate over the same window
  double acc = 0.0;
  {
    std::vector<double> ks{win.front()->t};
    for (double tt : series.t)
      if (tt > ks.front() && tt < win.back()->t) ks.push_back(tt);
    ks.push_back(win.back()->t);
    for (size_t i = 0; i + 1 < ks.size(); ++i)
      acc += 0.5 *
             (lerp_series(series.t, series.N, ks[i]) +
              lerp_series(series.t, series.N, ks[i + 1])) *
             (ks[i + 1] - ks[i]);
  }
  double N_bar = acc / span;
  rep.rhs = (p.b - (p.V_F - p.V_R)) * N_bar;
  rep.residual = rep.lhs - rep.rhs;
  rep.lhs_nonpositive = p.V_F <= 0.0 && rep.lhs <= 1e-12;
  rep.rhs_positive = rep.rhs > 0.0;
  rep.contradiction = rep.lhs_nonpositive && rep.rhs_positive;
  return rep;
}

} // namespace nnlif
