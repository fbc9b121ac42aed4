#pragma once

#include <span>
#include <vector>

#include "nnlif/params.hpp"
#include "nnlif/quadrature.hpp"

namespace nnlif {

// Firing-rate history: the user-supplied N^0 samples on [-D, 0] plus the
// samples appended while stepping.  Lookup is linear interpolation; the
// buffer must cover [t - D, t] at all times, which holds by construction
// as long as steps only append forward in time.
class RateHistory {
 public:
  RateHistory() = default;

  RateHistory(std::span<const double> t0, std::span<const double> N0) {
    if (t0.size() != N0.size() || t0.empty())
      throw InvalidParameter("RateHistory: bad initial samples");
    for (size_t i = 0; i + 1 < t0.size(); ++i)
      if (!(t0[i] < t0[i + 1]))
        throw InvalidParameter("RateHistory: times must be strictly increasing");
    for (double n : N0)
      if (!(n >= 0.0)) throw InvalidParameter("RateHistory: N^0 must be >= 0");
    ts_.assign(t0.begin(), t0.end());
    Ns_.assign(N0.begin(), N0.end());
  }

  static RateHistory constant(double D, double N) {
    std::vector<double> t{-std::max(D, 0.0) - 1e-12, 0.0}, n{N, N};
    return RateHistory(t, n);
  }

  void append(double t, double N) {
    if (!ts_.empty() && !(t > ts_.back()))
      throw NumericError("RateHistory: non-monotone append");
    ts_.push_back(t);
    Ns_.push_back(N);
  }

  double at(double t) const {
    if (ts_.empty() || t < ts_.front() - 1e-12)
      throw NumericError("RateHistory: lookup before buffer start");
    return lerp_series(ts_, Ns_, t);
  }

  double front_time() const { return ts_.front(); }
  double back_time() const { return ts_.back(); }
  double back_value() const { return Ns_.back(); }
  double initial_value_at_zero() const { return lerp_series(ts_, Ns_, 0.0); }
  double max_value() const {
    double m = 0.0;
    for (double n : Ns_) m = std::max(m, n);
    return m;
  }

  const std::vector<double>& times() const { return ts_; }
  const std::vector<double>& values() const { return Ns_; }

 private:
  std::vector<double> ts_, Ns_;
};

} // namespace nnlif
