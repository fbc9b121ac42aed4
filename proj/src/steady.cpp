#include "nnlif/steady.hpp"

#include <algorithm>
#include <cmath>

#include "nnlif/quadrature.hpp"

namespace nnlif {

namespace {

// exponent of the profile envelope, (v-c)^2 / (2a)
inline double expo(double v, double c, double a) {
  return (v - c) * (v - c) / (2.0 * a);
}

} // namespace

double steady_mass(const ModelParams& p, double N) {
  p.validate();
  if (!(N > 0.0)) throw InvalidParameter("steady_mass: N must be > 0");
  const double a = p.a;
  const double c = p.b0 + p.b * N; // equilibrium drift offset
  const double sq = std::sqrt(2.0 * a);

  // mass = (N/a) [ I_tail + I_mid ] with the v-integral done exactly:
  //   I_tail = J * sqrt(pi a/2) (1 + erf((V_R-c)/sq)),  J = int_{V_R}^{V_F} e^{(w-c)^2/2a} dw
  //   I_mid  = sqrt(pi a/2) int_{V_R}^{V_F} e^{(w-c)^2/2a}
  //              (erf((w-c)/sq) - erf((V_R-c)/sq)) dw
  const double gauss_half = std::sqrt(M_PI * a / 2.0);

  // Fubini turns the double integral into a single one:
  //   mass = (N/a) sqrt(pi a/2) int_{V_R}^{V_F} e^{z^2}(1 + erf(z)) dw,
  // z = (w-c)/sqrt(2a).  For z << 0 the product is evaluated through the
  // scaled complementary error function to avoid huge*tiny cancellation.
  auto inner = [&](double w) {
    double z = (w - c) / sq;
    if (z < -6.0) {
      // erfcx(x) ~ (1 - 1/(2x^2) + 3/(4x^4)) / (x sqrt(pi))
      double x = -z, x2 = x * x;
      return (1.0 - 0.5 / x2 + 0.75 / (x2 * x2)) / (x * std::sqrt(M_PI));
    }
    return std::exp(std::min(z * z, 700.0)) * (1.0 + std::erf(z));
  };
  double I = adaptive_trapz(inner, p.V_R, p.V_F, 1e-13, 128);
  double mass = (N / a) * gauss_half * I;
  if (std::isnan(mass)) throw NumericError("steady_mass: non-finite integrand");
  return mass;
}

std::vector<double> steady_profile(const ModelParams& p, double N,
                                   const Grid& grid) {
  p.validate();
  if (!(N > 0.0)) throw InvalidParameter("steady_profile: N must be > 0");
  const double a = p.a;
  const double c = p.b0 + p.b * N;

  // cumulative C(v) = int_v^{V_F} e^{(w-c)^2/2a - m} dw on a refined
  // subdivision of [V_R, V_F] aligned with the cell centers
  const int sub = 16;
  const int k = grid.n_cells - 1 - grid.r_index; // V_F face is k+1/2 cells above V_R
  const int nf = k * sub + sub / 2;
  const double hf = (p.V_F - p.V_R) / nf;
  const double m = std::max(expo(p.V_R, c, a), expo(p.V_F, c, a));

  std::vector<double> C(nf + 1, 0.0); // C[j] = int from w_j to V_F, w_j = V_R + j*hf
  double prev = std::exp(expo(p.V_F, c, a) - m);
  for (int j = nf - 1; j >= 0; --j) {
    double w = p.V_R + j * hf;
    double cur = std::exp(expo(w, c, a) - m);
    C[j] = C[j + 1] + 0.5 * (prev + cur) * hf;
    prev = cur;
  }

  std::vector<double> rho(grid.n_cells, 0.0);
  for (int i = 0; i < grid.n_cells; ++i) {
    double v = grid.center(i);
    double Cv = (i <= grid.r_index) ? C[0] : C[(i - grid.r_index) * sub];
    if (Cv <= 0.0) { rho[i] = 0.0; continue; }
    rho[i] = (N / a) * std::exp(std::log(Cv) + m - expo(v, c, a));
  }
  return rho;
}

std::vector<SteadyState> steady_state_candidates(const ModelParams& p,
                                                 double N_lo, double N_hi,
                                                 int n_scan, const Grid& grid) {
  p.validate();
  if (!(0.0 < N_lo && N_lo < N_hi))
    throw InvalidParameter("steady_state_candidates: need 0 < N_lo < N_hi");
  if (n_scan < 2) throw InvalidParameter("steady_state_candidates: n_scan < 2");

  auto F = [&](double N) { return steady_mass(p, N) - 1.0; };

  std::vector<SteadyState> out;
  double hN = (N_hi - N_lo) / (n_scan - 1);
  double xa = N_lo, fa = F(xa);
  for (int i = 1; i < n_scan; ++i) {
    double xb = N_lo + i * hN, fb = F(xb);
    if (fa == 0.0 || fa * fb < 0.0) {
      double lo = xa, hi = xb, flo = fa;
      while ((hi - lo) > 1e-10 * hi) {
        double mid = 0.5 * (lo + hi);
        double fm = F(mid);
        if (flo * fm <= 0.0) hi = mid;
        else { lo = mid; flo = fm; }
      }
      double N = 0.5 * (lo + hi);
      SteadyState ss;
      ss.N_inf = N;
      ss.rho_inf = steady_profile(p, N, grid);
      ss.b_used = p.b;
      ss.grid = grid;
      out.push_back(std::move(ss));
    }
    xa = xb;
    fa = fb;
  }
  return out;
}

} // namespace nnlif
