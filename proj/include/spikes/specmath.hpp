#pragma once

// Marchenko-Pastur law and the spike-location transforms built on it.
//
// Integrals against F_c use x = (a+b)/2 + ((b-a)/2) sin(theta), which turns
// the square-root edges of the density into a smooth integrand in theta:
//   f_c(x) dx = h^2 cos^2(theta) / (2 pi c x) dtheta,  h = (b-a)/2.
// The result is then integrated with a fixed 200-point Gauss-Legendre rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>

#include "spikes/error.hpp"
#include "spikes/quadrature.hpp"

namespace spikes {

class MpParams {
 public:
  explicit MpParams(double c) : c_(c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      std::ostringstream msg;
      msg << "MpParams: aspect ratio c must be positive and finite, got " << c;
      throw DomainError(msg.str());
    }
    const double root = std::sqrt(c);
    a_ = (1.0 - root) * (1.0 - root);
    b_ = (1.0 + root) * (1.0 + root);
  }

  static MpParams from_dimensions(std::size_t n, std::size_t p) {
    return MpParams(static_cast<double>(p) / static_cast<double>(n));
  }

  double c() const { return c_; }
  double a() const { return a_; }
  double b() const { return b_; }
  // Population spikes above this value are "distant": their sample
  // counterparts separate from the bulk.
  double threshold() const { return 1.0 + std::sqrt(c_); }
  double centre() const { return 0.5 * (a_ + b_); }
  double half_width() const { return 0.5 * (b_ - a_); }
  // Mass of the atom at zero (nonzero only when c > 1).
  double zero_mass() const { return c_ > 1.0 ? 1.0 - 1.0 / c_ : 0.0; }

 private:
  double c_;
  double a_ = 0.0;
  double b_ = 0.0;
};

namespace detail {

// Integrates g(x) f_c(x) dx over the support through the sine substitution,
// restricted to theta in [-pi/2, theta_hi].
template <typename G>
double integrate_against_mp(const MpParams& mp, G&& g, double theta_hi = std::numbers::pi / 2) {
  const double m = mp.centre();
  const double h = mp.half_width();
  const double scale = h * h / (2.0 * std::numbers::pi * mp.c());
  return scale * integrate(
                     [&](double theta) {
                       const double cs = std::cos(theta);
                       const double x = m + h * std::sin(theta);
                       return cs * cs * g(x) / x;
                     },
                     -std::numbers::pi / 2, theta_hi);
}

inline void require_distant(double lambda, const MpParams& mp, const char* op) {
  if (!(lambda > mp.threshold())) {
    std::ostringstream msg;
    msg << op << ": spike " << lambda << " is not distant; requires lambda > 1+sqrt(c) = "
        << mp.threshold();
    throw DomainError(msg.str());
  }
}

inline void require_above_edge(double d, const MpParams& mp, const char* op) {
  if (!(d > mp.b())) {
    std::ostringstream msg;
    msg << op << ": d = " << d << " must exceed the right edge b = (1+sqrt(c))^2 = " << mp.b();
    throw DomainError(msg.str());
  }
}

}  // namespace detail

/// Density of the continuous part of the Marchenko-Pastur law; 0 off (a, b).
inline double mp_density(double x, const MpParams& mp) {
  if (!(x > mp.a() && x < mp.b())) return 0.0;
  return std::sqrt((mp.b() - x) * (x - mp.a())) / (2.0 * std::numbers::pi * x * mp.c());
}

/// Distribution function F_c, including the atom 1 - 1/c at zero for c > 1.
inline double mp_cdf(double x, const MpParams& mp) {
  if (x < 0.0) return 0.0;
  if (x >= mp.b()) return 1.0;
  const double atom = mp.zero_mass();
  if (x <= mp.a()) return atom;
  const double s = std::clamp((x - mp.centre()) / mp.half_width(), -1.0, 1.0);
  const double bulk = detail::integrate_against_mp(mp, [](double) { return 1.0; }, std::asin(s));
  return std::min(1.0, atom + bulk);
}

/// Almost-sure limit of the sample eigenvalue attached to a distant spike.
inline double psi(double lambda, const MpParams& mp) {
  detail::require_distant(lambda, mp, "psi");
  return lambda + mp.c() * lambda / (lambda - 1.0);
}

/// Inverse of psi on (b, inf).
inline double psi_inv(double d, const MpParams& mp) {
  if (!(d > mp.b())) {
    std::ostringstream msg;
    msg << "psi_inv: d = " << d << " is at or below the phase transition (1+sqrt(c))^2 = "
        << mp.b();
    throw DomainError(msg.str());
  }
  const double c = mp.c();
  const double s = d + 1.0 - c;
  const double disc = std::max(0.0, s * s - 4.0 * d);
  return 0.5 * (s + std::sqrt(disc));
}

/// m1(d) = integral of x/(d-x) dF_c(x).
inline double m1(double d, const MpParams& mp) {
  detail::require_above_edge(d, mp, "m1");
  return detail::integrate_against_mp(mp, [d](double x) { return x / (d - x); });
}

/// m2(d) = integral of x/(d-x)^2 dF_c(x) = -m1'(d).
inline double m2(double d, const MpParams& mp) {
  detail::require_above_edge(d, mp, "m2");
  return detail::integrate_against_mp(mp, [d](double x) {
    const double r = d - x;
    return x / (r * r);
  });
}

/// Lower end of the consistency window for the large-p GIC multiplier.
inline double varphi(const MpParams& mp) {
  const double c = mp.c();
  return 0.5 + std::sqrt(1.0 / c) - std::log1p(std::sqrt(c)) / c;
}

/// Limiting variance of sqrt(n)(d - psi(lambda))/lambda for a diagonal
/// Gaussian population. lambda = 1+sqrt(c) is accepted as the closed end.
inline double limit_variance(double lambda, const MpParams& mp) {
  if (lambda < mp.threshold()) detail::require_distant(lambda, mp, "limit_variance");
  const double gap = lambda - 1.0;
  return std::max(0.0, 2.0 - 2.0 * mp.c() / (gap * gap));
}

struct GapMargin {
  // psi - 1 - log psi - 2c; positive iff the AIC-type gap condition holds.
  double aic_gap;
  // psi/c - 1 - log(psi/c) - 2/c; the quasi-AIC (p > n) gap condition.
  double quasi_aic_gap;
  // Largest kappa with psi - 1 - log psi > 2 c kappa (as an equality).
  double kappa;
};

inline GapMargin gap_margin(double lambda_k, const MpParams& mp) {
  const double d = psi(lambda_k, mp);
  const double c = mp.c();
  const double excess = d - 1.0 - std::log(d);
  const double scaled = d / c;
  return GapMargin{
      .aic_gap = excess - 2.0 * c,
      .quasi_aic_gap = scaled - 1.0 - std::log(scaled) - 2.0 / c,
      .kappa = excess / (2.0 * c),
  };
}

}  // namespace spikes
