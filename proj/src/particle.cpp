#include "nnlif/particle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nnlif {

std::vector<double> sample_from_density(const Grid& grid,
                                        const std::vector<double>& rho, int n,
                                        std::uint64_t seed) {
  if ((int)rho.size() != grid.n_cells)
    throw InvalidParameter("sample_from_density: size mismatch");
  if (n < 1) throw InvalidParameter("sample_from_density: n < 1");

  // cumulative mass at cell faces
  std::vector<double> cdf(grid.n_cells + 1, 0.0);
  for (int i = 0; i < grid.n_cells; ++i) {
    if (!(rho[i] >= 0.0))
      throw InvalidParameter("sample_from_density: negative density");
    cdf[i + 1] = cdf[i] + rho[i] * grid.dv;
  }
  double total = cdf.back();
  if (!(total > 0.0)) throw InvalidParameter("sample_from_density: zero mass");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    double u = uni(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int i = std::clamp((int)(it - cdf.begin()) - 1, 0, grid.n_cells - 1);
    double frac = (u - cdf[i]) / std::max(cdf[i + 1] - cdf[i], 1e-300);
    out[k] = grid.face(i) + frac * grid.dv;
  }
  return out;
}

ParticleResult particle_simulate(const ModelParams& p,
                                 std::vector<double> initial_potentials,
                                 const RateHistory& history, double dt,
                                 double T, double rate_bandwidth,
                                 std::uint64_t seed, const Grid& hist_grid) {
  p.validate();
  const int n = (int)initial_potentials.size();
  if (n < 1000) throw InvalidParameter("particle_simulate: n_neurons < 1000");
  if (!(dt > 0.0) || !(T > dt))
    throw InvalidParameter("particle_simulate: bad dt/T");
  if (!(rate_bandwidth > dt))
    throw InvalidParameter("particle_simulate: bandwidth must exceed dt");
  for (double v : initial_potentials)
    if (!(v <= p.V_F))
      throw InvalidParameter("particle_simulate: potential above threshold");

  ParticleResult res;
  res.ensemble.potentials = std::move(initial_potentials);
  std::vector<double>& V = res.ensemble.potentials;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double noise = std::sqrt(2.0 * p.a * dt);

  const double h = rate_bandwidth;
  std::uint64_t bin_count = 0;
  double bin_end = h;

  // delayed coupling: completed bins, else the supplied prehistory
  auto rate_lookup = [&](double u) {
    if (u <= 0.0) return history.at(std::max(u, history.front_time()));
    int k = (int)(u / h);
    if (k >= (int)res.rate_N.size()) k = (int)res.rate_N.size() - 1;
    if (k < 0) return history.at(0.0);
    return res.rate_N[k];
  };

  const long n_steps = std::lround(T / dt);
  double t = 0.0;
  for (long step = 0; step < n_steps; ++step) {
    double Nd = rate_lookup(t - p.D);
    double drift_c = (p.b0 + p.b * Nd) * dt;
    double t_next = t + dt;
    std::uint64_t crossed = 0;
    for (int i = 0; i < n; ++i) {
      double v_old = V[i];
      double v = v_old - v_old * dt + drift_c + noise * normal(rng);
      // Brownian-bridge correction: an endpoint check alone undercounts
      // threshold crossings by O(sqrt(dt))
      bool fired = v >= p.V_F;
      if (!fired) {
        double pb = std::exp(-(p.V_F - v_old) * (p.V_F - v) / (p.a * dt));
        fired = uni(rng) < pb;
      }
      if (fired) {
        v = p.V_R;
        ++crossed;
        res.ensemble.spike_log.push_back(t_next);
      }
      V[i] = v;
    }
    res.n_spikes += crossed;
    bin_count += crossed;
    t = t_next;
    if (t >= bin_end - 0.5 * dt) {
      res.rate_t.push_back(bin_end);
      res.rate_N.push_back((double)bin_count / ((double)n * h));
      bin_count = 0;
      bin_end += h;
    }
  }
  res.ensemble.t = t;

  res.hist_density.assign(hist_grid.n_cells, 0.0);
  for (double v : V) {
    int i = (int)std::floor((v - hist_grid.v_min) / hist_grid.dv);
    if (i >= 0 && i < hist_grid.n_cells) res.hist_density[i] += 1.0;
  }
  for (double& d : res.hist_density) d /= (double)n * hist_grid.dv;
  return res;
}

} // namespace nnlif
