#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nnlif {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scaled delay after the parabolic time change: maps [0,inf) into [0,1).
inline double scaled_delay(double D) {
  if (!(D >= 0.0)) throw InvalidParameter("scaled_delay: D must be >= 0");
  return 1.0 - std::exp(-2.0 * D);
}

// Physical parameters of the delayed NNLIF model.
struct ModelParams {
  double a = 1.0;    // diffusion coefficient, > 0
  double b = 0.0;    // connectivity (sign selects excitatory/inhibitory)
  double b0 = 0.0;   // external-stimulus drift
  double D = 0.0;    // synaptic delay, >= 0
  double V_R = -1.0; // reset potential
  double V_F = 0.0;  // threshold potential

  double D_bar() const { return scaled_delay(D); }

  void validate() const {
    if (!(a > 0.0)) throw InvalidParameter("ModelParams: a must be > 0");
    if (!(V_R < V_F)) throw InvalidParameter("ModelParams: V_R must be < V_F");
    if (!(D >= 0.0)) throw InvalidParameter("ModelParams: D must be >= 0");
    if (!std::isfinite(b) || !std::isfinite(b0))
      throw InvalidParameter("ModelParams: b, b0 must be finite");
  }
};

// Invertible affine voltage map v -> (v - shift) / scale used by the
// normalization below.  Densities pick up the Jacobian factor `scale`.
struct AffineMap {
  double scale = 1.0;
  double shift = 0.0;

  double forward(double v) const { return (v - shift) / scale; }
  double inverse(double vbar) const { return scale * vbar + shift; }
  // density transform: rho_bar(vbar) = scale * rho(inverse(vbar))
  double density_forward(double rho) const { return scale * rho; }
  double density_inverse(double rho_bar) const { return rho_bar / scale; }
};

struct NormalizedProblem {
  ModelParams params; // a = 1, V_F = 0, b0 folded to (b0 - V_F)/sqrt(a)
  AffineMap map;      // original v  ->  normalized v
};

// Rescale to a = 1, V_F = 0 via the affine map v -> (v - V_F) / sqrt(a).
// Time is unchanged, so rates (N, 1/time quantities) are unchanged and
// b scales as b / sqrt(a).  The leaky drift -v is not translation
// invariant, so the V_F translation leaves a constant drift behind: the
// returned b0 is (b0 - V_F) / sqrt(a), which vanishes exactly when
// b0 = V_F (in particular for the already-normalized b0 = V_F = 0).
inline NormalizedProblem normalize_problem(const ModelParams& p) {
  p.validate();
  const double s = std::sqrt(p.a);
  NormalizedProblem out;
  out.map.scale = s;
  out.map.shift = p.V_F;
  out.params.a = 1.0;
  out.params.b = p.b / s;
  out.params.b0 = (p.b0 - p.V_F) / s;
  out.params.D = p.D;
  out.params.V_F = 0.0;
  out.params.V_R = out.map.forward(p.V_R);
  return out;
}

} // namespace nnlif
