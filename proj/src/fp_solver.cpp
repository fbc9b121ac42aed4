#include "nnlif/fp_solver.hpp"

#include <algorithm>
#include <cmath>

namespace nnlif {

namespace {

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return (std::abs(a) < std::abs(b)) ? a : b;
}

// Advective fluxes c(v) rho at interior faces with minmod-limited
// reconstruction; both boundary faces carry zero advective flux (the
// exterior state is zero on the left, the Dirichlet value at V_F).
void advect(std::vector<double>& rho, const Grid& g, double mu, double dt) {
  const int n = g.n_cells;
  std::vector<double> slope(n, 0.0);
  for (int i = 1; i + 1 < n; ++i)
    slope[i] = minmod(rho[i] - rho[i - 1], rho[i + 1] - rho[i]) / g.dv;

  std::vector<double> flux(n + 1, 0.0);
  for (int i = 1; i < n; ++i) {
    double c = mu - g.face(i);
    double r = (c > 0.0) ? rho[i - 1] + 0.5 * g.dv * slope[i - 1]
                         : rho[i] - 0.5 * g.dv * slope[i];
    flux[i] = c * r;
  }
  const double lam = dt / g.dv;
  for (int i = 0; i < n; ++i) rho[i] -= lam * (flux[i + 1] - flux[i]);
}

// Crank-Nicolson diffusion with half-cell Dirichlet rows at both ends
// and the V_F outflow recycled into the reset cell inside the same
// solve: the recycled source uses the time-averaged flux, whose
// new-state half couples row r to rho_new[n-1] and is handled by a
// rank-one Sherman-Morrison correction of the Thomas solve.  With the
// half weights the recycled mass balances the discrete loss through the
// V_F face exactly; only the negligible v_min leak remains.
void diffuse(std::vector<double>& rho, const Grid& g, double a, double dt,
             int r_index) {
  const int n = g.n_cells;
  const double lam = 0.5 * a * dt / (g.dv * g.dv);
  // explicit half: rhs = (I + lam L) rho with L rho = second difference,
  // -3 rho_0 + rho_1 at both half-cell Dirichlet boundaries
  std::vector<double> rhs(n);
  rhs[0] = rho[0] + lam * (-3.0 * rho[0] + rho[1]);
  for (int i = 1; i + 1 < n; ++i)
    rhs[i] = rho[i] + lam * (rho[i - 1] - 2.0 * rho[i] + rho[i + 1]);
  rhs[n - 1] = rho[n - 1] + lam * (rho[n - 2] - 3.0 * rho[n - 1]);
  // old-state half of the recycled flux
  rhs[r_index] += 2.0 * lam * rho[n - 1];

  // implicit half: (I - lam L) rho_new = rhs + 2 lam rho_new[n-1] e_r,
  // via y = A^{-1} rhs and z = A^{-1} e_r
  std::vector<double> cp(n), y(n), z(n);
  double diag0 = 1.0 + 3.0 * lam;
  cp[0] = -lam / diag0;
  y[0] = rhs[0] / diag0;
  z[0] = (r_index == 0 ? 1.0 : 0.0) / diag0;
  for (int i = 1; i < n; ++i) {
    double diag = (i == n - 1) ? 1.0 + 3.0 * lam : 1.0 + 2.0 * lam;
    double m = diag + lam * cp[i - 1];
    cp[i] = -lam / m;
    y[i] = (rhs[i] + lam * y[i - 1]) / m;
    z[i] = ((i == r_index ? 1.0 : 0.0) + lam * z[i - 1]) / m;
  }
  for (int i = n - 2; i >= 0; --i) {
    y[i] -= cp[i] * y[i + 1];
    z[i] -= cp[i] * z[i + 1];
  }
  double last = y[n - 1] / (1.0 - 2.0 * lam * z[n - 1]);
  for (int i = 0; i < n; ++i) rho[i] = y[i] + 2.0 * lam * last * z[i];
}

} // namespace

double firing_rate(const std::vector<double>& rho, const Grid& grid, double a) {
  if ((int)rho.size() != grid.n_cells || grid.n_cells < 2)
    throw InvalidParameter("firing_rate: size mismatch");
  // quadratic through rho(V_F) = 0 and the last two center values;
  // exact for linear profiles, second order in general
  double s = (9.0 * rho[grid.n_cells - 1] - rho[grid.n_cells - 2]) / (3.0 * grid.dv);
  return std::max(0.0, a * s);
}

double step(std::vector<double>& rho, const Grid& grid, const ModelParams& p,
            double mu, double dt) {
  if ((int)rho.size() != grid.n_cells)
    throw InvalidParameter("step: size mismatch");
  if (!(dt > 0.0)) throw InvalidParameter("step: dt must be > 0");

  // Strang split: half advection around the diffusion-reset solve
  advect(rho, grid, mu, 0.5 * dt);
  diffuse(rho, grid, p.a, dt, grid.r_index);
  advect(rho, grid, mu, 0.5 * dt);

  double N = firing_rate(rho, grid, p.a);
  if (!std::isfinite(N)) throw NumericError("step: non-finite firing rate");
  return N;
}

namespace {

struct RunOutcome {
  SimulationResult result;
  bool flagged = false;
  double t_flag = 0.0;
};

RunOutcome run_once(const ModelParams& p, const Grid& grid,
                    std::vector<double> rho, RateHistory history,
                    const SolverOptions& opt) {
  RunOutcome out;
  out.result.grid = grid;
  FiringRateSeries& s = out.result.rates;

  auto record = [&](double t, double N) {
    double mass = 0.0, m1 = 0.0;
    for (int i = 0; i < grid.n_cells; ++i) {
      mass += rho[i];
      m1 += grid.center(i) * rho[i];
    }
    s.t.push_back(t);
    s.N.push_back(N);
    s.mass.push_back(mass * grid.dv);
    s.first_moment.push_back(m1 * grid.dv);
  };

  double t = 0.0;
  record(0.0, history.at(0.0));
  double next_snap = opt.snapshot_every > 0.0 ? opt.snapshot_every
                                              : 2.0 * opt.T + 1.0;
  if (opt.snapshot_every > 0.0)
    out.result.snapshots.push_back({0.0, rho});

  const double c_edge =
      std::max(std::abs(grid.v_min), std::abs(grid.v_max));
  while (t < opt.T - 1e-12) {
    double dt_macro = std::min(opt.dt, opt.T - t);
    // CFL bound on the explicit advection sweep
    double mu_now = p.b0 + p.b * history.at(std::max(t - p.D, history.front_time()));
    double c_max = c_edge + std::abs(mu_now) + 1e-12;
    int n_sub = (int)std::ceil(dt_macro * c_max / (0.45 * grid.dv));
    n_sub = std::max(1, n_sub);
    if (n_sub > opt.max_substeps)
      throw NumericError("simulate: CFL substep count exploded");
    double dt_sub = dt_macro / n_sub;

    for (int k = 0; k < n_sub; ++k) {
      double td = t - p.D;
      double mu = p.b0 + p.b * history.at(std::max(td, history.front_time()));
      double N = step(rho, grid, p, mu, dt_sub);
      t += dt_sub;
      history.append(t, N);
      if (N > opt.blow_up_threshold) break; // flag before the rate overflows
    }
    record(t, history.back_value());

    if (opt.snapshot_every > 0.0 && t >= next_snap - 1e-12) {
      out.result.snapshots.push_back({t, rho});
      next_snap += opt.snapshot_every;
    }
    if (s.N.back() > opt.blow_up_threshold) {
      out.flagged = true;
      out.t_flag = t;
      break;
    }
  }
  out.result.final_state = {t, std::move(rho)};
  return out;
}

// extrapolated divergence time from a least-squares line through 1/N
double fit_T_star(const FiringRateSeries& s, double threshold) {
  std::vector<double> ts, ys;
  for (size_t i = 0; i < s.t.size(); ++i)
    if (s.N[i] > 0.1 * threshold) {
      ts.push_back(s.t[i]);
      ys.push_back(1.0 / s.N[i]);
    }
  if (ts.size() < 2) return s.t.back();
  double n = (double)ts.size(), st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i]; sy += ys[i]; stt += ts[i] * ts[i]; sty += ts[i] * ys[i];
  }
  double slope = (n * sty - st * sy) / (n * stt - st * st);
  double icpt = (sy - slope * st) / n;
  if (slope >= 0.0) return s.t.back();
  return -icpt / slope;
}

} // namespace

SimulationResult simulate(const ModelParams& p, const Grid& grid,
                          const std::vector<double>& rho0, RateHistory history,
                          const SolverOptions& opt) {
  p.validate();
  if ((int)rho0.size() != grid.n_cells)
    throw InvalidParameter("simulate: rho0 size mismatch");
  std::vector<double> rho = rho0;
  double mass = 0.0;
  for (double r : rho) {
    if (!(r >= 0.0)) throw InvalidParameter("simulate: rho0 must be >= 0");
    mass += r;
  }
  mass *= grid.dv;
  if (!(mass > 0.0)) throw InvalidParameter("simulate: rho0 has zero mass");
  for (double& r : rho) r /= mass;

  RunOutcome coarse = run_once(p, grid, rho, history, opt);
  if (!coarse.flagged || !opt.detect_blow_up) return std::move(coarse.result);

  // confirm the crossing on a refined rerun (2x cells, dt/2) from t = 0
  Grid fine = Grid::make(p, grid.v_min, 2 * grid.n_cells);
  std::vector<double> rho_f(fine.n_cells);
  auto centers = grid.centers();
  for (int i = 0; i < fine.n_cells; ++i) {
    double v = fine.center(i);
    rho_f[i] = (v <= centers.front() || v >= centers.back())
                   ? 0.0
                   : std::max(0.0, lerp_series(centers, rho, v));
  }
  double mf = 0.0;
  for (double r : rho_f) mf += r;
  mf *= fine.dv;
  for (double& r : rho_f) r /= mf;

  SolverOptions fopt = opt;
  fopt.dt = 0.5 * opt.dt;
  fopt.snapshot_every = 0.0;
  RunOutcome refined = run_once(p, fine, rho_f, history, fopt);

  BlowUpRecord rec;
  rec.diverging = (p.D == 0.0);
  rec.t_flag = coarse.t_flag;
  rec.t_flag_fine = refined.flagged ? refined.t_flag : opt.T;
  rec.confirmed = refined.flagged &&
                  std::abs(rec.t_flag_fine - rec.t_flag) <
                      0.1 * std::max(rec.t_flag, 1e-12);
  rec.T_star = fit_T_star(refined.flagged ? refined.result.rates
                                          : coarse.result.rates,
                          opt.blow_up_threshold);
  coarse.result.rates.blow_up = rec;
  return std::move(coarse.result);
}

SimulationResult simulate(const ModelParams& p, const Grid& grid,
                          const std::function<double(double)>& rho0,
                          RateHistory history, const SolverOptions& opt) {
  std::vector<double> r(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) r[i] = rho0(grid.center(i));
  return simulate(p, grid, r, std::move(history), opt);
}

} // namespace nnlif
