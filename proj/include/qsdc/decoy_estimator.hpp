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

// Passive decoy-state estimation of the single- and two-photon yields and
// error rates from the observed gains of several pulse classes.
//
// Every estimate is a linear combination of the observed class gains
// sum_k c_k P_k Q_k (or P_k Q_k E_k) chosen to cancel selected photon
// numbers. What remains is the target term, the known background term and a
// tail of unknown terms. Tail terms whose sign favours the bound are dropped;
// tail terms whose sign works against it are bounded from above using either
// T_n <= 1 or the observed gain of a single class, whichever is tighter. With
// the usual ratio ordering of the heralded classes the adverse set is empty
// for the single-photon yield, and the estimates reduce to the closed-form
// pair and three-class expressions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qsdc/error.hpp"
#include "qsdc/link_model.hpp"
#include "qsdc/rate_model.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

/// One pulse class as seen after the first transmission.
struct DecoyClass {
  std::string label;
  PhotonDist dist;  ///< unnormalized q(n), event probability P
  double Q = 0.0;   ///< observed BA gain
  double E = 0.0;   ///< observed BA error rate
};

struct DecoyInputs {
  std::vector<DecoyClass> classes;  ///< ordered; later classes carry more multi-photon weight
  double Y0_A = 0.0;
  static constexpr double e_0 = LinkParams::e_0;
};

struct DecoyBounds {
  double Y1_l = 0.0;
  double Y2_l = 0.0;
  double e1_u = 0.0;
  double e2_u = 0.0;
  std::string pair_choice_Y1;  ///< classes of the winning combination, '/'-joined
  std::string pair_choice_Y2;
  bool ideal = false;
  bool estimation_failed = false;  ///< a yield bound vanished; error bounds unusable
};

struct BoundCandidate {
  std::string classes;
  double value;
};

struct MonotonicityReport {
  bool ok = true;
  std::size_t i = 0;  ///< class index of the numerator of the failing ratio
  std::size_t j = 0;
  std::size_t n = 0;
};

/// Observed quantity a combination acts on.
enum class Observable {
  Gain,       ///< P Q = sum q(n) Y_n
  ErrorGain,  ///< P Q E = sum q(n) e_n Y_n
};

enum class BoundSide { Lower, Upper };

namespace detail {

// Relative accuracy assumed for the observed gains when bounding rounding
// amplification in ill-conditioned combinations.
inline constexpr double kObservableRelTol = 1e-12;

inline std::size_t common_length(const DecoyInputs& in) {
  std::size_t len = 0;
  for (const auto& c : in.classes) len = std::max(len, c.dist.weights.size());
  return len;
}

inline double observed(const DecoyClass& c, Observable obs) {
  const double pq = c.dist.event_prob * c.Q;
  return obs == Observable::Gain ? pq : pq * c.E;
}

inline double known_background(const DecoyInputs& in, Observable obs) {
  return obs == Observable::Gain ? in.Y0_A : DecoyInputs::e_0 * in.Y0_A;
}

/// Bound on the photon-number-`target` term of `obs` from the combination
/// `coeffs`, or nullopt if the target coefficient vanishes.
inline std::optional<double> combination_bound(const DecoyInputs& in, const std::vector<double>& coeffs,
                                               std::size_t target, Observable obs, BoundSide side) {
  const std::size_t len = common_length(in);
  std::vector<double> a(len, 0.0);
  double scale = 0.0;
  double lhs = 0.0;
  double lhs_abs = 0.0;
  double remainder = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const auto& cls = in.classes[k];
    for (std::size_t n = 0; n < len; ++n) a[n] += coeffs[k] * cls.dist.weight(n);
    scale += std::abs(coeffs[k] * cls.dist.weight(target));
    lhs += coeffs[k] * observed(cls, obs);
    lhs_abs += std::abs(coeffs[k] * observed(cls, obs));
    remainder += std::abs(coeffs[k]) * cls.dist.tail_bound;
  }
  if (target >= len || !(std::abs(a[target]) > 1e-12 * scale)) return std::nullopt;

  const double x0 = known_background(in, obs);
  const double at = a[target];
  const double estimate = (lhs - a[0] * x0) / at;

  // T_target = estimate - sum_{n != 0, target} (a_n / a_t) T_n, with T_n in [0, 1].
  const double adverse_sign = side == BoundSide::Lower ? 1.0 : -1.0;
  std::vector<std::size_t> adverse;
  double unit_bound = 0.0;
  for (std::size_t n = 1; n < len; ++n) {
    if (n == target) continue;
    const double r = a[n] / at;
    if (r * adverse_sign > 0.0) {
      adverse.push_back(n);
      unit_bound += std::abs(r);
    }
  }
  double correction = unit_bound;
  if (!adverse.empty()) {
    for (std::size_t k = 0; k < in.classes.size(); ++k) {
      const auto& cls = in.classes[k];
      double c_max = 0.0;
      for (std::size_t n : adverse) {
        const double w = cls.dist.weight(n);
        if (!(w > 0.0)) {
          c_max = std::numeric_limits<double>::infinity();
          break;
        }
        c_max = std::max(c_max, std::abs(a[n] / at) / w);
      }
      const double residual = std::max(0.0, observed(cls, obs) - cls.dist.weight(0) * x0);
      if (std::isfinite(c_max)) correction = std::min(correction, c_max * residual);
    }
  }
  correction += remainder / std::abs(at);
  correction += kObservableRelTol * (lhs_abs + std::abs(a[0] * x0)) / std::abs(at);
  return side == BoundSide::Lower ? estimate - correction : estimate + correction;
}

// Coefficients on classes i, j that cancel photon number m.
inline std::vector<double> pair_coefficients(const DecoyInputs& in, std::size_t i, std::size_t j, std::size_t m) {
  std::vector<double> c(in.classes.size(), 0.0);
  c[i] = -in.classes[j].dist.weight(m);
  c[j] = in.classes[i].dist.weight(m);
  return c;
}

// Coefficients on classes i, j, k that cancel photon numbers m1 and m2
// (cross product of the two weight columns).
inline std::vector<double> triple_coefficients(const DecoyInputs& in, std::size_t i, std::size_t j, std::size_t k,
                                               std::size_t m1, std::size_t m2) {
  const auto u = [&](std::size_t c) { return in.classes[c].dist.weight(m1); };
  const auto v = [&](std::size_t c) { return in.classes[c].dist.weight(m2); };
  std::vector<double> c(in.classes.size(), 0.0);
  c[i] = u(j) * v(k) - u(k) * v(j);
  c[j] = u(k) * v(i) - u(i) * v(k);
  c[k] = u(i) * v(j) - u(j) * v(i);
  return c;
}

inline std::string join_labels(const DecoyInputs& in, std::initializer_list<std::size_t> idx) {
  std::string out;
  for (std::size_t k : idx) {
    if (!out.empty()) out += '/';
    out += in.classes[k].label;
  }
  return out;
}

struct CandidateKinds {
  bool singles;
  bool pairs;
  bool triples;
};

inline std::vector<BoundCandidate> candidates(const DecoyInputs& in, std::size_t target, Observable obs,
                                              BoundSide side, CandidateKinds kinds) {
  const std::size_t other = target == 1 ? 2 : 1;
  const std::size_t m = in.classes.size();
  std::vector<BoundCandidate> out;
  const auto add = [&](const std::vector<double>& c, std::string label) {
    if (auto v = combination_bound(in, c, target, obs, side)) out.push_back({std::move(label), *v});
  };
  if (kinds.singles) {
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> c(m, 0.0);
      c[i] = 1.0;
      add(c, in.classes[i].label);
    }
  }
  if (kinds.pairs) {
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = j + 1; i < m; ++i)
        add(pair_coefficients(in, i, j, other), join_labels(in, {i, j}));
  }
  if (kinds.triples) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k)
          add(triple_coefficients(in, i, j, k, other, 3), join_labels(in, {i, j, k}));
  }
  return out;
}

inline const BoundCandidate& best(const std::vector<BoundCandidate>& c, BoundSide side, const char* what) {
  if (c.empty()) throw DegenerateError(std::string(what) + ": every combination has a vanishing denominator");
  auto it = side == BoundSide::Lower
                ? std::max_element(c.begin(), c.end(), [](auto& a, auto& b) { return a.value < b.value; })
                : std::min_element(c.begin(), c.end(), [](auto& a, auto& b) { return a.value < b.value; });
  return *it;
}

}  // namespace detail

/// Checks q_i(n)/q_j(n) >= q_i(2)/q_j(2) >= q_i(1)/q_j(1) for every class
/// pair i > j and every 3 <= n <= n_max.
inline MonotonicityReport check_monotonicity(const DecoyInputs& in, std::size_t n_max) {
  constexpr double kSlack = 1e-12;
  const auto ratio = [&](std::size_t i, std::size_t j, std::size_t n) -> std::optional<double> {
    const double num = in.classes[i].dist.weight(n);
    const double den = in.classes[j].dist.weight(n);
    if (den > 0.0) return num / den;
    if (num > 0.0) return std::numeric_limits<double>::infinity();
    return std::nullopt;
  };
  const auto below = [&](std::optional<double> lhs, std::optional<double> rhs) {
    if (!lhs || !rhs) return false;
    if (std::isinf(*lhs)) return false;
    if (std::isinf(*rhs)) return true;
    return *lhs < *rhs * (1.0 - kSlack);
  };
  for (std::size_t i = 0; i < in.classes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto r1 = ratio(i, j, 1);
      const auto r2 = ratio(i, j, 2);
      if (below(r2, r1)) return {false, i, j, 2};
      for (std::size_t n = 3; n <= n_max; ++n) {
        if (below(ratio(i, j, n), r2)) return {false, i, j, n};
      }
    }
  }
  return {};
}

inline std::vector<BoundCandidate> y1_candidates(const DecoyInputs& in) {
  return detail::candidates(in, 1, Observable::Gain, BoundSide::Lower, {false, true, false});
}

inline std::vector<BoundCandidate> y2_candidates(const DecoyInputs& in) {
  return detail::candidates(in, 2, Observable::Gain, BoundSide::Lower, {false, true, true});
}

inline std::vector<BoundCandidate> e1y1_candidates(const DecoyInputs& in) {
  return detail::candidates(in, 1, Observable::ErrorGain, BoundSide::Upper, {true, true, true});
}

inline std::vector<BoundCandidate> e2y2_candidates(const DecoyInputs& in) {
  return detail::candidates(in, 2, Observable::ErrorGain, BoundSide::Upper, {true, true, true});
}

/// Lower bound on the single-photon yield, clamped to [0, 1].
inline BoundCandidate y1_lower(const DecoyInputs& in) {
  auto b = detail::best(y1_candidates(in), BoundSide::Lower, "y1_lower");
  b.value = std::clamp(b.value, 0.0, 1.0);
  return b;
}

/// Lower bound on the two-photon yield, clamped to [0, 1].
inline BoundCandidate y2_lower(const DecoyInputs& in) {
  auto b = detail::best(y2_candidates(in), BoundSide::Lower, "y2_lower");
  b.value = std::clamp(b.value, 0.0, 1.0);
  return b;
}

/// Upper bound on the single-photon error rate; nullopt when y1_l = 0.
inline std::optional<double> e1_upper(const DecoyInputs& in, double y1_l) {
  if (!(y1_l > 0.0)) return std::nullopt;
  const double ey = std::max(0.0, detail::best(e1y1_candidates(in), BoundSide::Upper, "e1_upper").value);
  return ey / y1_l;
}

/// Upper bound on the two-photon error rate; nullopt when y2_l = 0.
inline std::optional<double> e2_upper(const DecoyInputs& in, double y2_l) {
  if (!(y2_l > 0.0)) return std::nullopt;
  const double ey = std::max(0.0, detail::best(e2y2_candidates(in), BoundSide::Upper, "e2_upper").value);
  return ey / y2_l;
}

inline DecoyBounds estimate_bounds(const DecoyInputs& in) {
  DecoyBounds b;
  const auto y1 = y1_lower(in);
  const auto y2 = y2_lower(in);
  b.Y1_l = y1.value;
  b.Y2_l = y2.value;
  b.pair_choice_Y1 = y1.classes;
  b.pair_choice_Y2 = y2.classes;
  const auto e1 = e1_upper(in, b.Y1_l);
  const auto e2 = e2_upper(in, b.Y2_l);
  if (!e1 || !e2) {
    b.estimation_failed = true;
    b.e1_u = b.e2_u = 0.5;
    return b;
  }
  b.e1_u = *e1;
  b.e2_u = *e2;
  return b;
}

/// Infinite-decoy limit: true yields and error rates of the BA leg.
inline DecoyBounds ideal_bounds(const LinkParams& lp) {
  DecoyBounds b;
  b.ideal = true;
  b.Y1_l = yield_n(lp, Leg::BA, 1);
  b.Y2_l = yield_n(lp, Leg::BA, 2);
  b.e1_u = error_yield_n(lp, Leg::BA, 1) / b.Y1_l;
  b.e2_u = error_yield_n(lp, Leg::BA, 2) / b.Y2_l;
  b.pair_choice_Y1 = b.pair_choice_Y2 = "ideal";
  return b;
}

inline DecoyBounds ideal_bounds(const SourceParams& sp, const LinkParams& lp) {
  sp.validate();
  return ideal_bounds(lp);
}

/// Observed BA statistics of the three usable heralded classes.
inline DecoyInputs hsps_decoy_inputs(const SourceParams& sp, const LinkParams& lp, std::size_t n_max = kDefaultNMax) {
  DecoyInputs in;
  in.Y0_A = lp.Y0_A;
  for (HeraldEvent ev : kUsableEvents) {
    DecoyClass c;
    c.label = std::string(to_string(ev));
    c.dist = heralded_dist(sp, ev, n_max);
    c.Q = gain(ev, Leg::BA, sp, lp);
    c.E = qber(ev, Leg::BA, sp, lp);
    in.classes.push_back(std::move(c));
  }
  return in;
}

/// Decoy intensity used by the weak-coherent baseline, relative to the signal.
inline constexpr double kDl04DecoyFraction = 0.5;

/// Vacuum, weak decoy (mu / 2) and signal (mu) classes of the WCP baseline.
inline DecoyInputs dl04_decoy_inputs(double mu, const LinkParams& lp, std::size_t n_max = kDefaultNMax) {
  DecoyInputs in;
  in.Y0_A = lp.Y0_A;
  const auto make = [&](std::string label, double m) {
    DecoyClass c;
    c.label = std::move(label);
    c.dist = poisson_dist(m, n_max);
    const auto g = detail::gains_from_log_ratio(-m * overall_efficiency(lp, Leg::BA), lp.Y0_A, lp.e_d_A);
    c.Q = g.Q;
    c.E = g.Q > 0.0 ? g.QE / g.Q : 0.0;
    return c;
  };
  in.classes.push_back(make("vacuum", 0.0));
  in.classes.push_back(make("decoy", kDl04DecoyFraction * mu));
  in.classes.push_back(make("signal", mu));
  return in;
}

}  // namespace qsdc
