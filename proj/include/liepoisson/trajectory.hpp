#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace lp {

/// A point of the dual bundle A* in chart coordinates: base q ∈ R^n and
/// fiber coefficients μ_I ∈ R^m.
struct PhasePoint {
  Vec q;
  Vec mu;
};

/// Coefficients a^I of a point of A_q.
using FiberVector = Vec;

/// Time-sampled solution on a uniform grid, with the A-path a(t) and named
/// observable series recorded at every node.
struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<Vec> apath;
  std::vector<std::pair<std::string, std::vector<double>>> observables;

  std::size_t size() const { return times.size(); }
  double dt() const { return times.size() < 2 ? 0.0 : times[1] - times[0]; }

  SampledPath q_path() const {
    SampledPath out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.q);
    return out;
  }
  SampledPath mu_path() const {
    SampledPath out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.mu);
    return out;
  }

  const std::vector<double>* observable(const std::string& name) const {
    for (const auto& [k, v] : observables)
      if (k == name) return &v;
    return nullptr;
  }

  /// Throws InputError unless times are strictly increasing and uniform to
  /// 1e-12 (relative to the step) and all per-node arrays match in length.
  void validate(bool require_apath = false) const {
    if (states.size() != times.size()) throw InputError("trajectory: states/times length mismatch");
    if (require_apath && apath.size() != times.size())
      throw InputError("trajectory: missing or mismatched apath samples");
    for (const auto& [name, series] : observables)
      if (series.size() != times.size()) throw InputError("trajectory: observable '" + name + "' length mismatch");
    if (times.size() < 2) return;
    const double h = times[1] - times[0];
    if (!(h > 0.0)) throw InputError("trajectory: times not strictly increasing");
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double step = times[k] - times[k - 1];
      if (!(step > 0.0)) throw InputError("trajectory: times not strictly increasing");
      if (std::abs(step - h) > 1e-12 * std::max(1.0, std::abs(times[k])) + 1e-12 * h)
        throw InputError("trajectory: time grid is not uniform");
    }
  }
};

/// Time derivative of a sampled path on a uniform grid. With five or more
/// samples every node uses a fourth-order stencil (five-point centered in the
/// interior, off-centered near the ends); with three or four samples,
/// second-order centered and one-sided differences.
inline SampledPath time_derivative(const SampledPath& x, double dt) {
  const std::size_t n = x.size();
  if (n < 3) throw InputError("time_derivative needs at least 3 samples");
  SampledPath d(n);
  if (n < 5) {
    d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (x[k + 1] - x[k - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
    return d;
  }
  const double h = 12.0 * dt;
  d[0] = (-25.0 * x[0] + 48.0 * x[1] - 36.0 * x[2] + 16.0 * x[3] - 3.0 * x[4]) / h;
  d[1] = (-3.0 * x[0] - 10.0 * x[1] + 18.0 * x[2] - 6.0 * x[3] + x[4]) / h;
  for (std::size_t k = 2; k + 2 < n; ++k) d[k] = (x[k - 2] - 8.0 * x[k - 1] + 8.0 * x[k + 1] - x[k + 2]) / h;
  d[n - 2] = (3.0 * x[n - 1] + 10.0 * x[n - 2] - 18.0 * x[n - 3] + 6.0 * x[n - 4] - x[n - 5]) / h;
  d[n - 1] = (25.0 * x[n - 1] - 48.0 * x[n - 2] + 36.0 * x[n - 3] - 16.0 * x[n - 4] + 3.0 * x[n - 5]) / h;
  return d;
}

}  // namespace lp
