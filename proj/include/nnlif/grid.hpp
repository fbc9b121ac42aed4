#pragma once

#include <cmath>
#include <vector>

#include "nnlif/params.hpp"

namespace nnlif {

// Uniform finite-volume grid on [v_min, V_F].  Cell i covers
// [v_min + i dv, v_min + (i+1) dv]; values live at cell centers and the
// threshold V_F is exactly the rightmost face.  Construction snaps dv so
// that V_R is exactly the center of cell r_index, i.e. strictly inside
// its cell (never on a cell edge), which keeps the Dirac reinjection
// second order.
struct Grid {
  double v_min = 0.0;
  double v_max = 0.0; // == V_F
  int n_cells = 0;
  double dv = 0.0;
  int r_index = 0; // cell containing V_R (V_R is its center)

  double center(int i) const { return v_min + (i + 0.5) * dv; }
  double face(int i) const { return v_min + i * dv; }

  std::vector<double> centers() const {
    std::vector<double> v(n_cells);
    for (int i = 0; i < n_cells; ++i) v[i] = center(i);
    return v;
  }

  static Grid make(const ModelParams& p, double v_min_request, int n_cells) {
    p.validate();
    if (n_cells < 4) throw InvalidParameter("Grid: n_cells must be >= 4");
    if (!(v_min_request < p.V_R))
      throw InvalidParameter("Grid: v_min must be < V_R");
    Grid g;
    g.n_cells = n_cells;
    g.v_max = p.V_F;
    double dv0 = (p.V_F - v_min_request) / n_cells;
    // snap dv so V_R sits k + 1/2 cells below the V_F face
    int k = (int)std::lround((p.V_F - p.V_R) / dv0 - 0.5);
    if (k < 2) k = 2;
    if (k > n_cells - 3) k = n_cells - 3;
    g.dv = (p.V_F - p.V_R) / (k + 0.5);
    g.v_min = p.V_F - n_cells * g.dv;
    g.r_index = n_cells - 1 - k;
    return g;
  }

  // Default truncation: steady profiles decay like exp(-v^2/2a), so
  // L = 12 sqrt(a) + |b| N_guess keeps the tail below quadrature noise.
  static Grid make_default(const ModelParams& p, int n_cells,
                           double N_guess = 1.0) {
    double L = 12.0 * std::sqrt(p.a) + std::abs(p.b) * N_guess;
    return make(p, p.V_F - L, n_cells);
  }
};

} // namespace nnlif
