#pragma once

// Rank-selection criteria for the number of spikes.
//
// Every criterion scores the candidates k' = 0..k_max on a sample spectrum
// and returns the smallest minimiser. Scores are kept on their natural
// scale (negative log-likelihood plus penalty) so they can be compared
// term by term against an independent evaluation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/specmath.hpp"
#include "spikes/spectra.hpp"
#include "spikes/summation.hpp"

namespace spikes {

namespace detail {

inline std::string format_shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw DomainError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

inline void require_positive_log_argument(double value, std::string_view what, std::size_t kprime) {
  if (!(value > 0.0)) {
    std::ostringstream msg;
    msg << what << " = " << value << " is not positive at k' = " << kprime
        << " (candidate is at or beyond the numerical rank)";
    throw DomainError(msg.str());
  }
}

}  // namespace detail

// Multiplier C_n of the fixed-p penalty.
struct PenaltySchedule {
  enum class Kind { bic, aic, ilp, ilp_half, constant };

  Kind kind = Kind::bic;
  double constant = 0.0;  // only for Kind::constant

  static PenaltySchedule bic() { return {Kind::bic}; }
  static PenaltySchedule aic() { return {Kind::aic}; }
  static PenaltySchedule ilp() { return {Kind::ilp}; }
  static PenaltySchedule ilp_half() { return {Kind::ilp_half}; }
  static PenaltySchedule fixed(double c) { return {Kind::constant, c}; }

  double evaluate(std::size_t n) const {
    const double nn = static_cast<double>(n);
    double value = 0.0;
    switch (kind) {
      case Kind::bic:
        value = std::log(nn) / 2.0;
        break;
      case Kind::aic:
        value = 1.0;
        break;
      case Kind::ilp:
        value = n > 1 ? std::log(std::log(nn)) : -1.0;
        break;
      case Kind::ilp_half: {
        const double lln = n > 1 ? std::log(std::log(nn)) : -1.0;
        value = lln > 0.0 ? std::sqrt(lln) : -1.0;
        break;
      }
      case Kind::constant:
        value = constant;
        break;
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      std::ostringstream msg;
      msg << "penalty schedule '" << name() << "' is not positive at n = " << n;
      throw DomainError(msg.str());
    }
    return value;
  }

  std::string name() const {
    switch (kind) {
      case Kind::bic:
        return "bic";
      case Kind::aic:
        return "aic";
      case Kind::ilp:
        return "ilp";
      case Kind::ilp_half:
        return "ilp-half";
      case Kind::constant:
        return "const:" + detail::format_shortest(constant);
    }
    return "bic";
  }
};

struct CriterionParams {
  std::size_t n = 0;
  std::size_t p = 0;
  std::optional<double> multiplier;  // C_n (fixed p) or gamma (large p); none for bcf
  std::size_t k_max = 0;
};

struct CriterionResult {
  std::string criterion_id;
  std::vector<double> scores;  // scores[k'] for k' = 0..k_max
  std::size_t k_hat = 0;
  CriterionParams params;
};

/// log L_{k'} = -(n/2) { sum_{i<=k'} log d_i + (p-k') log dbar_{k'+1} }.
inline double loglik(const SampleSpectrum& spec, std::size_t kprime) {
  if (kprime >= spec.p()) throw IndexError("loglik: kprime must be smaller than p");
  const auto d = spec.eigenvalues();
  CompensatedSum head;
  for (std::size_t i = 0; i < kprime; ++i) {
    detail::require_positive_log_argument(d[i], "loglik: eigenvalue", kprime);
    head += std::log(d[i]);
  }
  const double tail_mean = dbar(spec, kprime);
  detail::require_positive_log_argument(tail_mean, "loglik: trailing mean", kprime);
  head += static_cast<double>(spec.p() - kprime) * std::log(tail_mean);
  return -0.5 * static_cast<double>(spec.n()) * head.value();
}

/// Quadratic-expansion likelihood used by the fixed-p criterion:
/// -(n/2) { sum_{i<=k'} log d_i + sum_{i>k'} (d_i - 1) }.
inline double loglik_tilde(const SampleSpectrum& spec, std::size_t kprime) {
  if (kprime >= spec.p()) throw IndexError("loglik_tilde: kprime must be smaller than p");
  const auto d = spec.eigenvalues();
  CompensatedSum acc;
  for (std::size_t i = 0; i < kprime; ++i) {
    detail::require_positive_log_argument(d[i], "loglik_tilde: eigenvalue", kprime);
    acc += std::log(d[i]);
  }
  for (std::size_t i = kprime; i < d.size(); ++i) acc += d[i] - 1.0;
  return -0.5 * static_cast<double>(spec.n()) * acc.value();
}

/// Free parameters of the k'-spike model: k'(p - k'/2 + 1/2).
inline double penalty_dim(std::size_t kprime, std::size_t p) {
  const double k = static_cast<double>(kprime);
  return k * (static_cast<double>(p) - k / 2.0 + 0.5);
}

namespace detail {

inline void require_grid(const SampleSpectrum& spec, std::size_t k_max, std::string_view op) {
  const std::size_t cap = std::min(spec.n(), spec.p());
  if (k_max >= cap) {
    std::ostringstream msg;
    msg << op << ": k_max = " << k_max << " must be smaller than min(n, p) = " << cap;
    throw DomainError(msg.str());
  }
}

inline std::size_t argmin_smallest(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] < scores[best]) best = k;
  }
  return best;
}

}  // namespace detail

/// Fixed-p GIC: -log Ltilde_{k'} + k'(p - k'/2 + 1/2) C_n.
inline CriterionResult gic_fixed(const SampleSpectrum& spec, const PenaltySchedule& pen,
                                 std::size_t k_max) {
  detail::require_grid(spec, k_max, "gic_fixed");
  const double cn = pen.evaluate(spec.n());
  CriterionResult out;
  out.criterion_id = "gic-fixed:" + pen.name();
  out.params = {spec.n(), spec.p(), cn, k_max};
  out.scores.reserve(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    out.scores.push_back(-loglik_tilde(spec, k) + penalty_dim(k, spec.p()) * cn);
  }
  out.k_hat = detail::argmin_smallest(out.scores);
  return out;
}

/// Large-p GIC: -log L_{k'} + gamma k'(p - k'/2 + 1/2).
inline CriterionResult gic_large(const SampleSpectrum& spec, double gamma, std::size_t k_max) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError("gic_large: gamma must be positive and finite");
  }
  detail::require_grid(spec, k_max, "gic_large");
  CriterionResult out;
  out.criterion_id = "gic-large:" + detail::format_shortest(gamma);
  out.params = {spec.n(), spec.p(), gamma, k_max};
  out.scores.reserve(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    out.scores.push_back(-loglik(spec, k) + gamma * penalty_dim(k, spec.p()));
  }
  out.k_hat = detail::argmin_smallest(out.scores);
  return out;
}

/// gamma = min(1.1 varphi(p/n), 1).
inline double default_gamma(std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) throw DomainError("default_gamma: n and p must be positive");
  return std::min(1.1 * varphi(MpParams::from_dimensions(n, p)), 1.0);
}

/// Bai-Choi-Fujikoshi estimator: the AIC-type l1 for p <= n and the
/// quasi-AIC l2 (on d_1..d_{n-1}) for p > n.
inline CriterionResult bcf(const SampleSpectrum& spec, std::size_t k_max) {
  const std::size_t n = spec.n();
  const std::size_t p = spec.p();
  if (n < 3 || k_max + 2 >= std::min(n, p + 1)) {
    std::ostringstream msg;
    msg << "bcf: k_max = " << k_max << " must satisfy k_max < min(n-2, p-1) (n = " << n
        << ", p = " << p << ")";
    throw DomainError(msg.str());
  }
  const auto d = spec.eigenvalues();
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  const bool wide = p > n;
  // l1 runs over d_{k'+1..p}; l2 over d_{k'+1..n-1}.
  const std::size_t last = wide ? n - 1 : p;

  CriterionResult out;
  out.criterion_id = "bcf";
  out.params = {n, p, std::nullopt, k_max};
  out.scores.reserve(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const std::size_t count = last - k;
    CompensatedSum logs;
    CompensatedSum total;
    for (std::size_t i = k; i < last; ++i) {
      detail::require_positive_log_argument(d[i], "bcf: eigenvalue", k);
      logs += std::log(d[i]);
      total += d[i];
    }
    const double mean = total.value() / static_cast<double>(count);
    const double kk = static_cast<double>(k);
    const double correction = wide ? (nn - kk - 2.0) * (nn - kk + 1.0) / pp
                                   : (pp - kk - 1.0) * (pp - kk + 2.0) / nn;
    out.scores.push_back(-logs.value() + static_cast<double>(count) * std::log(mean) - correction);
  }
  out.k_hat = detail::argmin_smallest(out.scores);
  return out;
}

// A criterion as named on the command line and in reports.
struct Criterion {
  enum class Family { gic_fixed, gic_large, bcf };

  Family family = Family::gic_large;
  PenaltySchedule penalty;       // gic_fixed
  std::optional<double> gamma;   // gic_large; nullopt means default_gamma

  std::string id() const {
    switch (family) {
      case Family::gic_fixed:
        return "gic-fixed:" + penalty.name();
      case Family::gic_large:
        return "gic-large:" + (gamma ? detail::format_shortest(*gamma) : std::string("auto"));
      case Family::bcf:
        return "bcf";
    }
    return "bcf";
  }

  friend bool operator==(const Criterion& a, const Criterion& b) { return a.id() == b.id(); }
};

/// Parses `gic-fixed:{bic,aic,ilp,ilp-half,const:<C>}`, `gic-large:{<gamma>,auto}`
/// or `bcf`.
inline Criterion parse_criterion(std::string_view id) {
  constexpr std::string_view fixed_prefix = "gic-fixed:";
  constexpr std::string_view large_prefix = "gic-large:";
  Criterion c;
  if (id == "bcf") {
    c.family = Criterion::Family::bcf;
    return c;
  }
  if (id.starts_with(fixed_prefix)) {
    c.family = Criterion::Family::gic_fixed;
    const auto rest = id.substr(fixed_prefix.size());
    if (rest == "bic") {
      c.penalty = PenaltySchedule::bic();
    } else if (rest == "aic") {
      c.penalty = PenaltySchedule::aic();
    } else if (rest == "ilp") {
      c.penalty = PenaltySchedule::ilp();
    } else if (rest == "ilp-half") {
      c.penalty = PenaltySchedule::ilp_half();
    } else if (rest.starts_with("const:")) {
      const double value = detail::parse_double(rest.substr(6), "penalty constant");
      if (!(value > 0.0)) throw DomainError("penalty constant must be positive");
      c.penalty = PenaltySchedule::fixed(value);
    } else {
      throw DomainError("unknown penalty schedule in criterion '" + std::string(id) + "'");
    }
    return c;
  }
  if (id.starts_with(large_prefix)) {
    c.family = Criterion::Family::gic_large;
    const auto rest = id.substr(large_prefix.size());
    if (rest != "auto") {
      const double value = detail::parse_double(rest, "gamma");
      if (!(value > 0.0)) throw DomainError("gamma must be positive");
      c.gamma = value;
    }
    return c;
  }
  throw DomainError("unknown criterion '" + std::string(id) + "'");
}

/// Default candidate range: {0..p-1} for the fixed-p GIC, {0..15} otherwise,
/// always capped so that no log of a structural zero is taken.
inline std::size_t default_k_max(const Criterion& c, std::size_t n, std::size_t p) {
  const std::size_t cap = std::min(n, p);
  std::size_t k_max = 0;
  switch (c.family) {
    case Criterion::Family::gic_fixed:
      k_max = p - 1;
      break;
    case Criterion::Family::gic_large:
      k_max = 15;
      break;
    case Criterion::Family::bcf:
      k_max = 15;
      // k_max < min(n-2, p-1)
      return std::min(k_max, std::min(n >= 3 ? n - 3 : 0, p >= 2 ? p - 2 : 0));
  }
  return std::min(k_max, cap - 1);
}

/// Evaluates `c` on `spec`; k_max defaults to default_k_max.
inline CriterionResult evaluate(const Criterion& c, const SampleSpectrum& spec,
                                std::optional<std::size_t> k_max = std::nullopt) {
  const std::size_t grid = k_max.value_or(default_k_max(c, spec.n(), spec.p()));
  CriterionResult out;
  switch (c.family) {
    case Criterion::Family::gic_fixed:
      out = gic_fixed(spec, c.penalty, grid);
      break;
    case Criterion::Family::gic_large:
      out = gic_large(spec, c.gamma.value_or(default_gamma(spec.n(), spec.p())), grid);
      break;
    case Criterion::Family::bcf:
      out = bcf(spec, grid);
      break;
  }
  out.criterion_id = c.id();
  return out;
}

}  // namespace spikes
