// Copyright 2026 The qsdc-hsps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Intensity optimization and maximal-distance root finding on top of the
// capacity engine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qsdc/capacity.hpp"
#include "qsdc/error.hpp"
#include "qsdc/link_model.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

/// Capacity is zero on the whole intensity grid.
class NoPositiveCapacityError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Capacity at zero attenuation is already at or below the floor.
class ProtocolDeadError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Everything the capacity depends on except intensity and attenuation.
struct CapacityModel {
  SourceParams sp;
  LinkParams lp;
  Protocol protocol = Protocol::Hsps;
  DecoyMode mode = DecoyMode::Finite;
  double eve_ratio = 1.0;
  std::size_t n_max = kDefaultNMax;
  AttenuationAxis axis = AttenuationAxis::RoundTrip;

  CapacityPoint point(double mu, double axis_db) const {
    SourceParams s = sp;
    s.mu = mu;
    return protocol_capacity(protocol, s, lp.at_attenuation(axis_db, axis), mode, eve_ratio, n_max);
  }

  double cs(double mu, double axis_db) const { return point(mu, axis_db).cs; }
};

struct OptResult {
  double mu_star = 0.0;
  double cs_star = 0.0;
  std::size_t evaluations = 0;
  std::array<double, 2> bracket{};
};

struct MuBounds {
  double mu_min = 1e-4;
  double mu_max = 1.0;

  friend bool operator==(const MuBounds&, const MuBounds&) = default;
};

inline constexpr std::size_t kMuGridPoints = 25;
inline constexpr double kMuRelTol = 1e-3;

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? lo : std::exp(a + (b - a) * double(i) / double(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace detail

/// Intensity that maximizes capacity at the given attenuation: a log-grid
/// scan picks the bracket around the best grid point, then golden-section
/// search in log(mu) narrows it to a relative width of 1e-3.
inline OptResult optimal_mu(double axis_db, const CapacityModel& model, MuBounds bounds = {}) {
  if (!(bounds.mu_min > 0.0)) throw ValidationError("optimize.mu_min", "must be > 0");
  if (!(bounds.mu_max <= 1.0)) throw ValidationError("optimize.mu_max", "must be <= 1");
  if (!(bounds.mu_min < bounds.mu_max)) throw ValidationError("optimize.mu_min", "must be < mu_max");

  OptResult r;
  auto f = [&](double log_mu) {
    ++r.evaluations;
    return model.cs(std::exp(log_mu), axis_db);
  };

  const auto grid = detail::log_grid(bounds.mu_min, bounds.mu_max, kMuGridPoints);
  std::vector<double> vals(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = f(std::log(grid[i]));
    if (vals[i] > vals[best]) best = i;
  }
  if (!(vals[best] > 0.0)) throw NoPositiveCapacityError("capacity is zero for every intensity in the search range");

  const std::size_t lo_i = best == 0 ? 0 : best - 1;
  const std::size_t hi_i = std::min(best + 1, grid.size() - 1);
  double a = std::log(grid[lo_i]), b = std::log(grid[hi_i]);
  double fa = vals[lo_i], fb = vals[hi_i];

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double tol = std::log1p(kMuRelTol);
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d, fb = fd;
      d = c, fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c, fa = fc;
      c = d, fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }

  // Best of the surviving points, so cs_star dominates both bracket ends.
  std::array<std::pair<double, double>, 5> pts{{{vals[best], std::log(grid[best])}, {fa, a}, {fb, b}, {fc, c}, {fd, d}}};
  const auto top = *std::max_element(pts.begin(), pts.end(), [](auto& x, auto& y) { return x.first < y.first; });
  r.cs_star = top.first;
  r.mu_star = std::clamp(std::exp(top.second), bounds.mu_min, bounds.mu_max);
  r.bracket = {std::exp(a), std::exp(b)};
  return r;
}

struct RootResult {
  double alpha_star_db = 0.0;  ///< largest axis value seen with cs > floor
  double distance_km = 0.0;
  std::size_t iterations = 0;
  std::array<double, 2> bracket{};  ///< cs(first) > floor >= cs(second)
};

struct RootOptions {
  double floor = 1e-12;
  double tol_db = 0.01;
  double max_db = 1000.0;

  friend bool operator==(const RootOptions&, const RootOptions&) = default;
};

/// Largest attenuation at which the capacity stays above the floor, found
/// by bracket doubling from 1 dB followed by bisection.
inline RootResult max_distance(double mu, const CapacityModel& model, RootOptions opt = {}) {
  if (!(opt.tol_db > 0.0)) throw ValidationError("maxdist.tol_db", "must be > 0");
  if (!(opt.floor >= 0.0)) throw ValidationError("maxdist.floor", "must be >= 0");
  RootResult r;
  auto alive = [&](double x) { return model.cs(mu, x) > opt.floor; };
  if (!alive(0.0)) throw ProtocolDeadError("capacity at zero attenuation does not exceed the floor");

  double lo = 0.0, hi = 1.0;
  while (alive(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > opt.max_db) throw NumericalError("capacity stays above the floor beyond the attenuation limit");
  }
  while (hi - lo > opt.tol_db) {
    ++r.iterations;
    const double mid = 0.5 * (lo + hi);
    (alive(mid) ? lo : hi) = mid;
  }
  r.alpha_star_db = lo;
  r.distance_km = distance_km(lo, model.axis);
  r.bracket = {lo, hi};
  return r;
}

}  // namespace qsdc
