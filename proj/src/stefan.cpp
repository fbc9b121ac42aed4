#include "nnlif/stefan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nnlif/quadrature.hpp"

namespace nnlif {

double tau_of_t(double t) { return 0.5 * (std::exp(2.0 * t) - 1.0); }

double t_of_tau(double tau) {
  if (!(2.0 * tau + 1.0 > 0.0)) throw InvalidParameter("t_of_tau: tau <= -1/2");
  return 0.5 * std::log(2.0 * tau + 1.0);
}

double alpha_of_tau(double tau) {
  if (!(2.0 * tau + 1.0 > 0.0))
    throw InvalidParameter("alpha_of_tau: tau <= -1/2");
  return 1.0 / std::sqrt(2.0 * tau + 1.0);
}

double heat_kernel(double x, double tau, double xi, double eta) {
  if (!(tau > eta)) throw InvalidParameter("heat_kernel: tau <= eta");
  double th = tau - eta;
  double d = x - xi;
  return std::exp(-d * d / (4.0 * th)) / std::sqrt(4.0 * M_PI * th);
}

double Prehistory::at(double z) const {
  if (tau.empty()) return 0.0;
  if (z <= tau.front()) return M.front();
  if (z >= tau.back()) return M.back();
  return lerp_series(tau, M, z);
}

Prehistory prehistory_from(const RateHistory& history, const ModelParams& p,
                           int n_samples) {
  p.validate();
  if (n_samples < 2) throw InvalidParameter("prehistory_from: n_samples < 2");
  Prehistory pre;
  double z0 = -0.5 * p.D_bar();
  pre.tau.resize(n_samples);
  pre.M.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    // keep strictly inside (-Dbar/2, 0] at the left end
    double z = z0 + (0.0 - z0) * i / (n_samples - 1);
    if (i == 0) z = z0 + 1e-12 * (1.0 + std::abs(z0));
    double al = alpha_of_tau(z);
    pre.tau[i] = z;
    pre.M[i] = al * al * history.at(t_of_tau(z));
  }
  return pre;
}

void StefanProblem::validate() const {
  params.validate();
  if (std::abs(params.a - 1.0) > 1e-12 || std::abs(params.V_F) > 1e-12)
    throw InvalidParameter("StefanProblem: params must be normalized (a=1, V_F=0)");
  if (x.size() < 3 || x.size() != u0.size())
    throw InvalidParameter("StefanProblem: bad profile arrays");
  for (size_t i = 0; i + 1 < x.size(); ++i)
    if (!(x[i] < x[i + 1]))
      throw InvalidParameter("StefanProblem: x must be increasing");
  if (std::abs(x.back()) > 1e-10 || std::abs(u0.back()) > 1e-8)
    throw InvalidParameter("StefanProblem: u0 must vanish at x = 0");
}

double StefanSolution::M_at(double t) const { return lerp_series(tau, M, t); }
double StefanSolution::s_at(double t) const { return lerp_series(tau, s, t); }

namespace {

// M over (-Dbar/2, t_end]: prehistory left of the solved samples
struct MCurve {
  const Prehistory* pre = nullptr;
  const std::vector<double>* tau = nullptr;
  const std::vector<double>* M = nullptr;

  double at(double z) const {
    if (tau && !tau->empty() && z >= tau->front())
      return lerp_series(*tau, *M, std::min(z, tau->back()));
    return pre ? pre->at(z) : 0.0;
  }
};

// s(tau) = -b0 (sqrt(2 tau + 1) - 1)
//          - b / sqrt(1 - Dbar) * int_{-Dbar/2}^{(1-Dbar) tau - Dbar/2} M alpha^{-1}
// evaluated through a cumulative fine-grid trapezoid of the integrand.
struct SEval {
  double b0 = 0.0, b = 0.0, Dbar = 0.0;
  std::vector<double> zg, C;

  SEval(const ModelParams& p, const MCurve& m, double tau_max, int n_fine) {
    b0 = p.b0;
    b = p.b;
    Dbar = p.D_bar();
    double z0 = -0.5 * Dbar;
    double z1 = std::max((1.0 - Dbar) * tau_max - 0.5 * Dbar, z0);
    n_fine = std::max(n_fine, 32);
    zg.resize(n_fine + 1);
    C.resize(n_fine + 1);
    double span = z1 - z0;
    if (span <= 0.0) span = 1.0; // degenerate: integral is identically 0
    double prev = 0.0, acc = 0.0;
    for (int i = 0; i <= n_fine; ++i) {
      double z = z0 + span * i / n_fine;
      double f = m.at(z) * std::sqrt(std::max(2.0 * z + 1.0, 0.0));
      if (i > 0) acc += 0.5 * (prev + f) * (span / n_fine);
      zg[i] = z;
      C[i] = acc;
      prev = f;
    }
  }

  double integral_to(double z) const {
    if (z <= zg.front()) return 0.0;
    if (z >= zg.back()) return C.back();
    return lerp_series(zg, C, z);
  }

  double operator()(double tau) const {
    double up = (1.0 - Dbar) * tau - 0.5 * Dbar;
    return -b0 * (std::sqrt(2.0 * tau + 1.0) - 1.0) -
           b / std::sqrt(1.0 - Dbar) * integral_to(up);
  }
};

const double INV_SQRT_4PI = 1.0 / std::sqrt(4.0 * M_PI);

// initial-data term -2 int G(s_tau, tau, xi, t0) u0'(xi) dxi with per-panel
// frozen slopes and exact Gaussian panel masses
double initial_term(std::span<const double> x, std::span<const double> u0,
                    double s_tau, double theta0) {
  double den = 2.0 * std::sqrt(theta0);
  double sum = 0.0;
  double erf_prev = std::erf((s_tau - x[0]) / den);
  for (size_t j = 0; j + 1 < x.size(); ++j) {
    double erf_next = std::erf((s_tau - x[j + 1]) / den);
    double up = (u0[j + 1] - u0[j]) / (x[j + 1] - x[j]);
    sum += up * (erf_prev - erf_next);
    erf_prev = erf_next;
  }
  return -sum;
}

// one sweep of the functional over window nodes; returns sup update
double sweep(const StefanProblem& pr, const std::vector<double>& tau_hist,
             const std::vector<double>& M_hist, std::span<const double> x,
             std::span<const double> u0, double t0, double h, int n_panels,
             std::vector<double>& Mw) {
  const ModelParams& p = pr.params;
  const double Dbar = p.D_bar();

  // combined solved samples: history up to t0 plus the current window
  std::vector<double> zt(tau_hist), zM(M_hist);
  size_t first = (!zt.empty() && std::abs(zt.back() - t0) < 1e-15) ? 1 : 0;
  for (int j = (int)first; j <= n_panels; ++j) {
    zt.push_back(t0 + j * h);
    zM.push_back(Mw[j]);
  }
  MCurve mc{&pr.M0, &zt, &zM};
  double tau_end = t0 + n_panels * h;
  SEval sev(p, mc, tau_end, (int)zt.size() * 4 + 512);

  std::vector<double> s_node(n_panels + 1), s_mid(n_panels), a_mid(n_panels);
  for (int j = 0; j <= n_panels; ++j) s_node[j] = sev(t0 + j * h);
  for (int j = 0; j < n_panels; ++j) {
    double em = t0 + (j + 0.5) * h;
    s_mid[j] = sev(em);
    a_mid[j] = alpha_of_tau(em);
  }

  double diff = 0.0;
  std::vector<double> Mn(Mw);
  for (int i = 1; i <= n_panels; ++i) {
    double tau_i = t0 + i * h;
    double st = s_node[i];
    double val = initial_term(x, u0, st, tau_i - t0);
    for (int k = 0; k < i; ++k) {
      double th_l = (i - k) * h, th_r = (i - k - 1) * h;
      double th_m = (i - k - 0.5) * h;
      double Mm = 0.5 * (Mw[k] + Mw[k + 1]);

      // free-boundary kernel: smooth factor frozen, theta^{-1/2} exact
      double d1 = st - s_mid[k];
      double g1 = -Mm * (d1 / th_m) * INV_SQRT_4PI *
                  std::exp(-d1 * d1 / (4.0 * th_m));
      val += g1 * 2.0 * (std::sqrt(th_l) - std::sqrt(th_r));

      // reset kernel: |d| bounded away from 0; theta^{-3/2} exact
      double d2 = st - (s_mid[k] + p.V_R / a_mid[k]);
      double ad = std::abs(d2);
      if (ad < 1e-14) continue;
      double er_l = std::erfc(ad / (2.0 * std::sqrt(th_l)));
      double er_r = th_r > 0.0 ? std::erfc(ad / (2.0 * std::sqrt(th_r))) : 0.0;
      val += Mm * ((d2 > 0.0) ? 1.0 : -1.0) * (er_l - er_r);
    }
    if (!std::isfinite(val)) throw NumericError("fixed_point_M: non-finite sweep");
    diff = std::max(diff, std::abs(val - Mw[i]));
    Mn[i] = val;
  }
  Mw.swap(Mn);
  (void)Dbar;
  return diff;
}

struct WindowResult {
  std::vector<double> tau, M, s, s1;
  bool ok = false;
};

WindowResult solve_window(const StefanProblem& pr,
                          const std::vector<double>& tau_hist,
                          const std::vector<double>& M_hist,
                          std::span<const double> x, std::span<const double> u0,
                          double t0, double sigma, int n_panels, double tol,
                          int max_iter) {
  WindowResult w;
  double h = sigma / n_panels;
  size_t n = x.size();
  double seam = -(u0[n - 1] - u0[n - 2]) / (x[n - 1] - x[n - 2]);

  std::vector<double> Mw(n_panels + 1, std::max(seam, 0.0));
  double prev_diff = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    double diff = sweep(pr, tau_hist, M_hist, x, u0, t0, h, n_panels, Mw);
    if (diff <= tol) {
      w.ok = true;
      break;
    }
    if (prev_diff >= 0.0 && diff > 0.95 * prev_diff && it > 4) return w;
    prev_diff = diff;
  }
  if (!w.ok) return w;

  // final geometry from the converged M
  std::vector<double> zt(tau_hist), zM(M_hist);
  size_t first = (!zt.empty() && std::abs(zt.back() - t0) < 1e-15) ? 1 : 0;
  for (int j = (int)first; j <= n_panels; ++j) {
    zt.push_back(t0 + j * h);
    zM.push_back(Mw[j]);
  }
  MCurve mc{&pr.M0, &zt, &zM};
  SEval sev(pr.params, mc, t0 + sigma, (int)zt.size() * 4 + 512);
  for (int j = 0; j <= n_panels; ++j) {
    double tj = t0 + j * h;
    w.tau.push_back(tj);
    w.M.push_back(Mw[j]);
    double sj = sev(tj);
    w.s.push_back(sj);
    w.s1.push_back(sj + pr.params.V_R / alpha_of_tau(tj));
  }
  return w;
}

} // namespace

StefanSolution fixed_point_M(const StefanProblem& pr, double sigma, double tol,
                             int max_iter, int n_panels) {
  pr.validate();
  if (!(sigma > 0.0)) throw InvalidParameter("fixed_point_M: sigma must be > 0");

  double sup_up = 0.0;
  for (size_t j = 0; j + 1 < pr.x.size(); ++j)
    sup_up = std::max(sup_up, std::abs((pr.u0[j + 1] - pr.u0[j]) /
                                       (pr.x[j + 1] - pr.x[j])));
  double m_ball = 1.0 + 2.0 * sup_up;

  // Start from the requested horizon.  Picard on the Volterra structure
  // converges far beyond the analytic contraction bound (inside the delay
  // decoupling window the map is even linear in M), so the halving
  // fallback below is the only guard that matters in practice.
  double sig = sigma;

  const double sig_floor = sigma * std::pow(2.0, -30);
  while (true) {
    WindowResult w = solve_window(pr, {}, {}, pr.x, pr.u0, 0.0, sig, n_panels,
                                  tol, max_iter);
    if (w.ok) {
      StefanSolution sol;
      sol.tau = std::move(w.tau);
      sol.M = std::move(w.M);
      sol.s = std::move(w.s);
      sol.s1 = std::move(w.s1);
      sol.sigma = sig;
      sol.m_ball = m_ball;
      return sol;
    }
    sig *= 0.5;
    if (sig < sig_floor)
      throw NumericError("fixed_point_M: contraction never achieved");
  }
}

std::vector<double> duhamel_u(const StefanProblem& pr,
                              const StefanSolution& sol,
                              std::span<const double> xs, double tau) {
  pr.validate();
  if (sol.tau.empty() || tau > sol.tau.back() + 1e-12)
    throw InvalidParameter("duhamel_u: tau beyond solved range");
  tau = std::min(tau, sol.tau.back());

  // panel list over [0, tau] following the solution nodes
  std::vector<double> et;
  for (double t : sol.tau)
    if (t < tau - 1e-14) et.push_back(t);
  et.push_back(tau);

  std::vector<double> out(xs.size(), 0.0);
  for (size_t q = 0; q < xs.size(); ++q) {
    double xq = xs[q];
    double val = 0.0;
    if (tau > 0.0) {
      double den = 2.0 * std::sqrt(tau);
      double erf_prev = std::erf((xq - pr.x[0]) / den);
      for (size_t j = 0; j + 1 < pr.x.size(); ++j) {
        double erf_next = std::erf((xq - pr.x[j + 1]) / den);
        double um = 0.5 * (pr.u0[j] + pr.u0[j + 1]);
        val += 0.5 * um * (erf_prev - erf_next);
        erf_prev = erf_next;
      }
    } else {
      val = lerp_series(pr.x, pr.u0, std::clamp(xq, pr.x.front(), pr.x.back()));
    }

    // boundary kernels with d frozen per panel and the exact primitive
    //   int theta^{-1/2} e^{-d^2/4 theta} dtheta
    //     = 2 sqrt(theta) e^{-d^2/4 theta} - |d| sqrt(pi) erfc(|d|/(2 sqrt(theta)))
    auto kernel_panel = [&](double d, double th_l, double th_r) {
      double ad = std::abs(d);
      auto prim = [&](double th) {
        if (th <= 0.0) return 0.0;
        return 2.0 * std::sqrt(th) * std::exp(-d * d / (4.0 * th)) -
               ad * std::sqrt(M_PI) * std::erfc(ad / (2.0 * std::sqrt(th)));
      };
      return INV_SQRT_4PI * (prim(th_l) - prim(th_r));
    };

    for (size_t k = 0; k + 1 < et.size(); ++k) {
      double el = et[k], er = et[k + 1], em = 0.5 * (el + er);
      double th_l = tau - el, th_r = tau - er;
      double Mm = sol.M_at(em);
      double sm = sol.s_at(em);
      double s1m = sm + pr.params.V_R / alpha_of_tau(em);
      val -= Mm * kernel_panel(xq - sm, th_l, th_r);
      val += Mm * kernel_panel(xq - s1m, th_l, th_r);
    }
    out[q] = val;
  }
  return out;
}

StefanSolution piecewise_extend(const StefanProblem& pr, StefanSolution sol,
                                double tau_target, double tol, int max_iter) {
  pr.validate();
  if (sol.tau.empty()) throw InvalidParameter("piecewise_extend: empty solution");
  double Dbar = pr.params.D_bar();
  double decouple = Dbar > 0.0 ? 0.5 * Dbar / (1.0 - Dbar)
                               : std::numeric_limits<double>::infinity();

  while (sol.tau.back() < tau_target - 1e-12) {
    double t0 = sol.tau.back();
    double win = std::min({sol.sigma, tau_target - t0, 0.95 * decouple});

    // re-anchored seam grid: same spacing, last point at s(t0)
    double st0 = sol.s.back();
    std::vector<double> xs(pr.x.size());
    for (size_t i = 0; i < xs.size(); ++i)
      xs[i] = pr.x[i] - pr.x.back() + st0;
    std::vector<double> useam = duhamel_u(pr, sol, xs, t0);
    useam.back() = 0.0;
    for (double& v : useam) v = std::max(v, 0.0);

    int n_panels = std::max(32, (int)std::lround(
                                    win / sol.sigma * 256.0));
    const double floor_win = win * std::pow(2.0, -30);
    WindowResult w;
    while (true) {
      w = solve_window(pr, sol.tau, sol.M, xs, useam, t0, win, n_panels, tol,
                       max_iter);
      if (w.ok) break;
      win *= 0.5;
      if (win < floor_win)
        throw NumericError("piecewise_extend: contraction never achieved");
    }
    for (size_t j = 1; j < w.tau.size(); ++j) {
      sol.tau.push_back(w.tau[j]);
      sol.M.push_back(w.M[j]);
      sol.s.push_back(w.s[j]);
      sol.s1.push_back(w.s1[j]);
    }
  }
  return sol;
}

StefanSeries to_stefan(const RateHistory& history, const ModelParams& p,
                       int n_tau) {
  p.validate();
  if (std::abs(p.a - 1.0) > 1e-12 || std::abs(p.V_F) > 1e-12)
    throw InvalidParameter("to_stefan: params must be normalized (a=1, V_F=0)");
  if (n_tau < 2) throw InvalidParameter("to_stefan: n_tau < 2");

  StefanSeries out;
  out.M0 = prehistory_from(history, p);
  double tau_max = tau_of_t(history.back_time());
  out.tau.resize(n_tau);
  out.M.resize(n_tau);
  for (int i = 0; i < n_tau; ++i) {
    double tau = tau_max * i / (n_tau - 1);
    double al = alpha_of_tau(tau);
    out.tau[i] = tau;
    out.M[i] = al * al * history.at(t_of_tau(tau));
  }
  MCurve mc{&out.M0, &out.tau, &out.M};
  SEval sev(p, mc, tau_max, 8 * n_tau + 512);
  out.s.resize(n_tau);
  out.s1.resize(n_tau);
  for (int i = 0; i < n_tau; ++i) {
    out.s[i] = sev(out.tau[i]);
    out.s1[i] = out.s[i] + p.V_R / alpha_of_tau(out.tau[i]);
  }
  return out;
}

double CoordinateMap::s_of_tau(double tau) const {
  if (tau_samples.empty()) return 0.0;
  return lerp_series(tau_samples, s_samples,
                     std::clamp(tau, tau_samples.front(), tau_samples.back()));
}

void CoordinateMap::forward(double t, double v, double& tau, double& x) const {
  tau = tau_of_t(t);
  x = v / alpha_of_tau(tau) + s_of_tau(tau);
}

void CoordinateMap::inverse(double tau, double x, double& t, double& v) const {
  t = t_of_tau(tau);
  v = (x - s_of_tau(tau)) * alpha_of_tau(tau);
}

} // namespace nnlif
