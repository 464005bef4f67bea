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

// Photon-number statistics of the heralded SPDC source and of the weak
// coherent (Poisson) baseline source.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "qsdc/error.hpp"

namespace qsdc {

/// Which herald detectors fired: X1 none (pulse discarded), X2 D1 only,
/// X3 D2 only, X4 both (decoy).
enum class HeraldEvent { X1, X2, X3, X4 };

inline constexpr std::array<HeraldEvent, 4> kHeraldEvents = {
    HeraldEvent::X1, HeraldEvent::X2, HeraldEvent::X3, HeraldEvent::X4};

/// The two events that carry message bits.
inline constexpr std::array<HeraldEvent, 2> kSignalEvents = {HeraldEvent::X2,
                                                             HeraldEvent::X3};

/// The three events usable for decoy estimation, in estimator order.
inline constexpr std::array<HeraldEvent, 3> kUsableEvents = {
    HeraldEvent::X2, HeraldEvent::X3, HeraldEvent::X4};

constexpr std::string_view to_string(HeraldEvent e) noexcept {
  switch (e) {
    case HeraldEvent::X1: return "x1";
    case HeraldEvent::X2: return "x2";
    case HeraldEvent::X3: return "x3";
    case HeraldEvent::X4: return "x4";
  }
  return "?";
}

namespace detail {

inline void require_unit(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "must lie in [0, 1]");
}

inline void require_finite_nonneg(double v, const char* field) {
  if (!(std::isfinite(v) && v >= 0.0)) throw ValidationError(field, "must be finite and >= 0");
}

// 1 - (1 - d) e^y without cancellation for small |y| and d.
inline double one_minus_scaled_exp(double d, double y) {
  return -std::expm1(y) + d * std::exp(y);
}

// Upper bound on sum_{n > n_max} lambda^n e^{-lambda} / n!.
inline double poisson_tail_bound(double lambda, std::size_t n_max) {
  if (lambda <= 0.0) return 0.0;
  const double m = static_cast<double>(n_max) + 1.0;
  if (lambda >= m + 1.0) return 1.0;
  const double log_term = m * std::log(lambda) - lambda - std::lgamma(m + 1.0);
  return std::exp(log_term) / (1.0 - lambda / (m + 1.0));
}

}  // namespace detail

/// Physical parameters of the pump, splitter and herald detectors.
/// Defaults are the reference simulation parameters.
struct SourceParams {
  double mu = 0.1;      ///< mean pair number per pump pulse
  double eta_x = 0.8;   ///< signal-path transmission
  double eta_h = 0.9;   ///< herald-path transmission
  double eta_1 = 0.6;   ///< D1 detection efficiency
  double eta_2 = 0.8;   ///< D2 detection efficiency
  double t = 0.4;       ///< splitter ratio towards D1
  double d_1 = 8e-8;    ///< D1 dark-count probability per pulse
  double d_2 = 8e-8;    ///< D2 dark-count probability per pulse

  void validate() const {
    detail::require_finite_nonneg(mu, "source.mu");
    detail::require_unit(eta_x, "source.eta_x");
    detail::require_unit(eta_h, "source.eta_h");
    detail::require_unit(eta_1, "source.eta_1");
    detail::require_unit(eta_2, "source.eta_2");
    if (!(t > 0.0 && t < 1.0)) throw ValidationError("source.t", "must lie in (0, 1)");
    if (!(d_1 >= 0.0 && d_1 < 1.0)) throw ValidationError("source.d_1", "must lie in [0, 1)");
    if (!(d_2 >= 0.0 && d_2 < 1.0)) throw ValidationError("source.d_2", "must lie in [0, 1)");
  }

  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

/// Per-photon miss probabilities of the herald detectors.
///   f  : photon not registered by either detector
///   f1 : photon not registered by D2
///   f2 : photon not registered by D1
struct LossFactors {
  double f;
  double f1;
  double f2;
};

inline LossFactors loss_factors(const SourceParams& p) {
  p.validate();
  const double miss = 1.0 - p.eta_h;
  return {p.eta_h * (p.t * (1.0 - p.eta_1) + (1.0 - p.t) * (1.0 - p.eta_2)) + miss,
          p.eta_h * (1.0 - (1.0 - p.t) * p.eta_2) + miss,
          p.eta_h * (1.0 - p.t * p.eta_1) + miss};
}

namespace detail {

/// Herald responses built up one photon at a time. Each photon fires D1
/// (p1), fires D2 (p2) or is missed (p0); the state tracks which detectors
/// the photons alone have fired. All updates add non-negative terms, so
/// responses that vanish without dark counts keep full relative precision.
class HeraldRecurrence {
public:
  explicit HeraldRecurrence(const SourceParams& p)
      : p_(p), p1_(p.eta_h * p.t * p.eta_1), p2_(p.eta_h * (1.0 - p.t) * p.eta_2), p0_(loss_factors(p).f) {}

  /// Response probabilities for the current photon number.
  std::array<double, 4> gamma() const {
    const double d1 = p_.d_1, d2 = p_.d_2;
    return {(1.0 - d1) * (1.0 - d2) * none_, (1.0 - d2) * (only1_ + d1 * none_), (1.0 - d1) * (only2_ + d2 * none_),
            both_ + d1 * only2_ + d2 * only1_ + d1 * d2 * none_};
  }

  void add_photon() {
    both_ += only1_ * p2_ + only2_ * p1_;
    only1_ = only1_ * (p0_ + p1_) + none_ * p1_;
    only2_ = only2_ * (p0_ + p2_) + none_ * p2_;
    none_ *= p0_;
  }

private:
  SourceParams p_;
  double p1_, p2_, p0_;
  double none_ = 1.0, only1_ = 0.0, only2_ = 0.0, both_ = 0.0;
};

}  // namespace detail

/// Probability that k photons entering the herald path produce `event`.
inline double herald_probability(const SourceParams& p, HeraldEvent event, unsigned k) {
  detail::HeraldRecurrence r(p);
  for (unsigned i = 0; i < k; ++i) r.add_photon();
  return r.gamma()[static_cast<std::size_t>(event)];
}

/// Natural log of the event's probability generating function
/// G(z) = sum_n q(n) z^n of the signal-path photon number, in factored form.
/// Uses f - 1 = (f1 - 1) + (f2 - 1), which turns the inclusion-exclusion
/// differences into products. Returns -inf when G(z) = 0.
inline double log_generating(const SourceParams& p, HeraldEvent event, double z) {
  const auto lf = loss_factors(p);
  const double s = p.mu * (1.0 - p.eta_x * (1.0 - z));
  // P(no D2 click) and P(no D1 click) complements, conditioned on s.
  const auto a1 = [&] { return detail::one_minus_scaled_exp(p.d_2, s * (lf.f1 - 1.0)); };
  const auto a2 = [&] { return detail::one_minus_scaled_exp(p.d_1, s * (lf.f2 - 1.0)); };
  switch (event) {
    case HeraldEvent::X1:
      return std::log1p(-p.d_1) + std::log1p(-p.d_2) - p.mu + s * lf.f;
    case HeraldEvent::X2:
      return std::log1p(-p.d_2) - p.mu + s * lf.f1 + std::log(a2());
    case HeraldEvent::X3:
      return std::log1p(-p.d_1) - p.mu + s * lf.f2 + std::log(a1());
    case HeraldEvent::X4:
      return -p.mu + s + std::log(a1()) + std::log(a2());
  }
  return -std::numeric_limits<double>::infinity();
}

/// Total probability of a herald event, summed over all photon numbers.
inline double event_probability(const SourceParams& p, HeraldEvent event) {
  return std::exp(log_generating(p, event, 1.0));
}

/// Truncated, unnormalized photon-number distribution of one pulse class.
struct PhotonDist {
  std::vector<double> weights;  ///< q(0..n_max), including the event probability
  double event_prob = 0.0;      ///< closed-form total over all n
  double tail_bound = 0.0;      ///< upper bound on sum_{n > n_max} q(n)

  std::size_t n_max() const noexcept { return weights.empty() ? 0 : weights.size() - 1; }

  double weight(std::size_t n) const noexcept { return n < weights.size() ? weights[n] : 0.0; }

  double normalized(std::size_t n) const {
    if (!(event_prob > 0.0)) throw DegenerateError("photon distribution has zero total probability");
    return weight(n) / event_prob;
  }

  std::vector<double> normalized() const {
    std::vector<double> out(weights.size());
    for (std::size_t n = 0; n < weights.size(); ++n) out[n] = normalized(n);
    return out;
  }
};

inline constexpr std::size_t kDefaultNMax = 20;
inline constexpr std::size_t kMaxNMax = 60;
inline constexpr double kTailTolerance = 1e-12;

namespace detail {

// q(n) = c * x^n / n! * e^{y} for n = 0..n_max.
inline void scaled_poisson_terms(double c, double x, double y, std::vector<double>& out) {
  double term = c * std::exp(y);
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (n > 0) term *= x / static_cast<double>(n);
    out[n] = term;
  }
}

// q(n) = e^{-mu} (mu eta_x)^n / n! * sum_j (mu (1 - eta_x))^j / j! * gamma(n + j),
// summing over the j pairs whose signal photon was lost. Every term is
// non-negative, so small weights keep full relative precision.
inline PhotonDist heralded_dist_fixed(const SourceParams& p, HeraldEvent event, std::size_t n_max) {
  const auto lf = loss_factors(p);
  const double mx = p.mu * p.eta_x;
  const double lost = p.mu * (1.0 - p.eta_x);
  std::vector<double> gamma;
  HeraldRecurrence rec(p);
  const auto gamma_at = [&](std::size_t k) {
    while (gamma.size() <= k) {
      gamma.push_back(rec.gamma()[static_cast<std::size_t>(event)]);
      rec.add_photon();
    }
    return gamma[k];
  };

  PhotonDist dist;
  dist.event_prob = event_probability(p, event);
  dist.weights.assign(n_max + 1, 0.0);
  std::vector<double> prefactor(n_max + 1);
  scaled_poisson_terms(1.0, mx, -p.mu, prefactor);
  for (std::size_t n = 0; n <= n_max; ++n) {
    double sum = 0.0;
    double coef = 1.0;  // lost^j / j!
    for (std::size_t j = 0; j < 2000; ++j) {
      if (j > 0) coef *= lost / static_cast<double>(j);
      sum += coef * gamma_at(n + j);
      // Remaining terms are below coef * lost / (j + 1) / (1 - lost / (j + 2)) since gamma <= 1.
      const double rest = coef * lost / static_cast<double>(j + 1);
      if (static_cast<double>(j + 2) > 2.0 * lost && 2.0 * rest <= 1e-17 * sum) break;
      if (coef == 0.0) break;
    }
    dist.weights[n] = prefactor[n] * sum;
  }

  // Each q(n) is bounded by a scaled Poisson envelope; its tail bounds the truncation.
  double envelope_scale = 1.0;
  double envelope_lambda = mx;
  switch (event) {
    case HeraldEvent::X1:
      envelope_scale = (1.0 - p.d_1) * (1.0 - p.d_2) * std::exp(p.mu * (lf.f - 1.0));
      envelope_lambda = mx * lf.f;
      break;
    case HeraldEvent::X2:
      envelope_scale = (1.0 - p.d_2) * std::exp(p.mu * (lf.f1 - 1.0));
      envelope_lambda = mx * lf.f1;
      break;
    case HeraldEvent::X3:
      envelope_scale = (1.0 - p.d_1) * std::exp(p.mu * (lf.f2 - 1.0));
      envelope_lambda = mx * lf.f2;
      break;
    case HeraldEvent::X4:
      break;
  }
  dist.tail_bound = envelope_scale * poisson_tail_bound(envelope_lambda, n_max);
  return dist;
}

inline PhotonDist extend_until_converged(auto&& build, std::size_t n_max, const char* what) {
  if (n_max < 2) throw ValidationError("n_max", "must be >= 2");
  for (std::size_t n = n_max;; n = std::min(kMaxNMax, n + 10)) {
    PhotonDist d = build(n);
    if (d.tail_bound <= kTailTolerance * d.event_prob || d.event_prob == 0.0) return d;
    if (n >= kMaxNMax) {
      throw TruncationError(std::string(what) + ": tail mass " + std::to_string(d.tail_bound) +
                            " above tolerance at n_max = " + std::to_string(n) +
                            "; the intensity is too large for the supported truncation");
    }
  }
}

}  // namespace detail

/// Heralded signal-path distribution q_event(n). n_max is raised
/// automatically (up to kMaxNMax) until the truncated tail is negligible.
inline PhotonDist heralded_dist(const SourceParams& p, HeraldEvent event, std::size_t n_max = kDefaultNMax) {
  p.validate();
  return detail::extend_until_converged(
      [&](std::size_t n) { return detail::heralded_dist_fixed(p, event, n); }, n_max, "heralded_dist");
}

/// Poisson distribution of a phase-randomized weak coherent pulse.
inline PhotonDist poisson_dist(double mu, std::size_t n_max = kDefaultNMax) {
  detail::require_finite_nonneg(mu, "mu");
  return detail::extend_until_converged(
      [&](std::size_t n) {
        PhotonDist d;
        d.weights.resize(n + 1);
        detail::scaled_poisson_terms(1.0, mu, -mu, d.weights);
        d.event_prob = 1.0;
        d.tail_bound = detail::poisson_tail_bound(mu, n);
        return d;
      },
      n_max, "poisson_dist");
}

}  // namespace qsdc
