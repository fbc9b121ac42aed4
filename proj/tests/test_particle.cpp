#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "nnlif/particle.hpp"
#include "nnlif/steady.hpp"

using namespace nnlif;

namespace {

ModelParams base_params() {
  ModelParams p;
  p.V_R = -1.0;
  p.V_F = 0.0;
  return p;
}

std::vector<double> gaussian_cells(const Grid& g, double mean, double sd) {
  std::vector<double> rho(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i) {
    double z = (g.center(i) - mean) / sd;
    double d = (g.v_max - g.center(i)) / (0.5 * sd);
    rho[i] = std::exp(-0.5 * z * z) * (-std::expm1(-d * d));
  }
  return rho;
}

} // namespace

TEST_CASE("initial sampling") {
  ModelParams p = base_params();
  Grid g = Grid::make_default(p, 200);
  std::vector<double> rho = gaussian_cells(g, -2.0, 0.5);

  std::vector<double> v1 = sample_from_density(g, rho, 5000, 7);
  std::vector<double> v2 = sample_from_density(g, rho, 5000, 7);
  std::vector<double> v3 = sample_from_density(g, rho, 5000, 8);
  REQUIRE(v1.size() == 5000);
  // [TRIVIAL] seeded determinism; a different seed gives a different draw
  CHECK(v1 == v2);
  CHECK(v1 != v3);
  double mean = 0.0;
  for (double v : v1) {
    CHECK(v >= g.v_min);
    CHECK(v <= g.v_max);
    mean += v;
  }
  mean /= v1.size();
  CHECK(mean == doctest::Approx(-2.0).epsilon(0.02));
}

TEST_CASE("seeded replay and conservation") {
  ModelParams p = base_params();
  Grid g = Grid::make_default(p, 200);
  std::vector<double> v0 = sample_from_density(g, gaussian_cells(g, -0.8, 0.4),
                                               2000, 11);
  RateHistory hist = RateHistory::constant(0.0, 0.0);

  ParticleResult r1 = particle_simulate(p, v0, hist, 1e-3, 1.0, 1e-2, 42, g);
  ParticleResult r2 = particle_simulate(p, v0, hist, 1e-3, 1.0, 1e-2, 42, g);
  ParticleResult r3 = particle_simulate(p, v0, hist, 1e-3, 1.0, 1e-2, 43, g);

  // [TRIVIAL] same seed -> identical spike log and terminal state
  CHECK(r1.ensemble.spike_log == r2.ensemble.spike_log);
  CHECK(r1.ensemble.potentials == r2.ensemble.potentials);
  CHECK(r1.n_spikes == r2.n_spikes);
  CHECK(r1.ensemble.spike_log != r3.ensemble.spike_log);

  // particle count conserved (reset, never absorbed); all below threshold
  CHECK(r1.ensemble.potentials.size() == v0.size());
  for (double v : r1.ensemble.potentials) CHECK(v <= p.V_F + 1e-12);
  CHECK(r1.n_spikes == r1.ensemble.spike_log.size());

  // empirical rate nonnegative; terminal histogram is a density
  for (double n : r1.rate_N) CHECK(n >= 0.0);
  double mass = 0.0;
  for (double h : r1.hist_density) mass += h;
  CHECK(mass * g.dv == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("stationary rate against the root solver") {
  // [DERIVED] b = 0 ensemble started from rho_inf: the time-averaged
  // empirical rate sits near N_inf (loose 10% gate at n = 20000; the
  // tight 2-standard-error gate runs in the acceptance suite at 1e5)
  ModelParams p = base_params();
  Grid g = Grid::make_default(p, 500);
  auto cands = steady_state_candidates(p, 1e-4, 10.0, 64, g);
  REQUIRE(cands.size() == 1);
  std::vector<double> v0 =
      sample_from_density(g, cands.front().rho_inf, 20000, 5);
  ParticleResult r = particle_simulate(p, std::move(v0),
                                       RateHistory::constant(0.0, 1.0), 1e-3,
                                       2.0, 1e-2, 19, g);
  double avg = 0.0;
  int used = 0;
  for (size_t i = 0; i < r.rate_t.size(); ++i)
    if (r.rate_t[i] >= 1.0) {
      avg += r.rate_N[i];
      ++used;
    }
  REQUIRE(used > 0);
  avg /= used;
  CHECK(avg == doctest::Approx(cands.front().N_inf).epsilon(0.10));
}
