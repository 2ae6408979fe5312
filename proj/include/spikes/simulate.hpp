#pragma once

// Monte Carlo engine: table reproductions and limit-law verifiers.
//
// Replication r of a run always draws its data from the stream
// derive_seed(master_seed, r), so reports do not depend on the number of
// workers or on the order in which replications finish.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spikes/criteria.hpp"
#include "spikes/error.hpp"
#include "spikes/rng.hpp"
#include "spikes/specmath.hpp"
#include "spikes/spectra.hpp"

namespace spikes {

/// Runs task(i) for i in [0, count) on `workers` threads. If any task throws,
/// remaining tasks are skipped and the exception of the lowest failing index
/// is rethrown.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;

  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

inline std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Either an explicit SNR or the small-p design delta.
struct SnrSpec {
  enum class Kind { snr, delta };
  Kind kind = Kind::snr;
  double value = 0.0;

  static SnrSpec explicit_snr(double v) { return {Kind::snr, v}; }
  static SnrSpec fixed_p_delta(double v) { return {Kind::delta, v}; }

  friend bool operator==(const SnrSpec&, const SnrSpec&) = default;
};

struct SimConfig {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 0;
  SnrSpec snr;
  NoiseKind noise = NoiseKind::gaussian;
  std::vector<std::string> criteria;
  std::size_t replications = 200;
  std::uint64_t seed = 0;
  std::optional<std::size_t> k_max;  // per-criterion default when unset

  double resolved_snr() const {
    return snr.kind == SnrSpec::Kind::snr ? snr.value : snr_fixed_p(snr.value, p, k, n);
  }

  void validate() const {
    if (replications < 1) throw DomainError("SimConfig: replications must be at least 1");
    if (k < 1 || k >= std::min(n, p)) {
      std::ostringstream msg;
      msg << "SimConfig: requires 1 <= k < min(n, p); got n=" << n << " p=" << p << " k=" << k;
      throw DomainError(msg.str());
    }
    if (criteria.empty()) throw DomainError("SimConfig: at least one criterion is required");
    for (const auto& id : criteria) parse_criterion(id);
    if (!(resolved_snr() > 0.0)) throw DomainError("SimConfig: SNR must be positive");
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct CriterionSummary {
  std::string criterion_id;
  double success_rate = 0.0;  // #{k_hat == k} / replications
  double mean_khat = 0.0;
  std::vector<std::size_t> khats;  // per replication, for auditing

  friend bool operator==(const CriterionSummary&, const CriterionSummary&) = default;
};

struct SimReport {
  SimConfig config;
  double snr = 0.0;
  std::vector<CriterionSummary> criteria;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

inline CriterionSummary summarize(std::string id, std::vector<std::size_t> khats, std::size_t k) {
  CriterionSummary s;
  s.criterion_id = std::move(id);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (auto kh : khats) {
    hits += kh == k ? 1 : 0;
    total += kh;
  }
  const auto reps = static_cast<double>(khats.size());
  s.success_rate = static_cast<double>(hits) / reps;
  s.mean_khat = static_cast<double>(total) / reps;
  s.khats = std::move(khats);
  return s;
}

/// Spectrum of replication `r` of `cfg`.
inline SampleSpectrum replicate_spectrum(const SimConfig& cfg, const SpikedPopulation& pop,
                                         std::size_t r) {
  const auto x = sample_population(pop, cfg.n, cfg.noise, derive_seed(cfg.seed, r));
  return eigvals_sym(sample_covariance(x));
}

/// Runs every criterion of `cfg` on the same spectrum in each replication.
inline SimReport run_sim(const SimConfig& cfg, std::size_t workers = 1) {
  cfg.validate();
  const double snr = cfg.resolved_snr();
  const auto pop = build_population(cfg.p, cfg.k, snr);
  std::vector<Criterion> criteria;
  for (const auto& id : cfg.criteria) criteria.push_back(parse_criterion(id));

  std::vector<std::vector<std::size_t>> khats(criteria.size(),
                                              std::vector<std::size_t>(cfg.replications));
  parallel_for(cfg.replications, workers, [&](std::size_t r) {
    try {
      const auto spec = replicate_spectrum(cfg, pop, r);
      for (std::size_t c = 0; c < criteria.size(); ++c) {
        khats[c][r] = evaluate(criteria[c], spec, cfg.k_max).k_hat;
      }
    } catch (const DomainError& e) {
      throw DomainError("replication " + std::to_string(r) + ": " + e.what());
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("replication " + std::to_string(r) + ": " + e.what());
    }
  });

  SimReport report;
  report.config = cfg;
  report.snr = snr;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    report.criteria.push_back(summarize(criteria[c].id(), std::move(khats[c]), cfg.k));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Limit-law verifiers

// One pass/fail condition: lo <= value <= hi.
struct LimitCheck {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed() const { return value >= lo && value <= hi; }
};

struct LimitCheckReport {
  std::string target;
  std::vector<double> samples;  // per-replication (or per-grid-point) statistic
  double mean = 0.0;
  double variance = 0.0;
  double theory = 0.0;
  double ratio_to_theory = 0.0;
  std::vector<std::pair<std::string, double>> details;
  std::vector<LimitCheck> checks;

  bool pass() const {
    return std::ranges::all_of(checks, [](const LimitCheck& c) { return c.passed(); });
  }
};

namespace detail {

inline void mean_and_variance(const std::vector<double>& xs, double& mean, double& var) {
  CompensatedSum s;
  for (double x : xs) s += x;
  mean = s.value() / static_cast<double>(xs.size());
  CompensatedSum q;
  for (double x : xs) q += (x - mean) * (x - mean);
  var = xs.size() > 1 ? q.value() / static_cast<double>(xs.size() - 1) : 0.0;
}

inline std::size_t dimension_for(double c, std::size_t n) {
  const auto p = static_cast<std::size_t>(std::llround(c * static_cast<double>(n)));
  if (p < 2) throw DomainError("verifier: p = round(c n) must be at least 2");
  return p;
}

// Largest sample eigenvalue per replication for a single-spike population.
inline std::vector<double> top_eigenvalues(double lambda, std::size_t n, std::size_t p,
                                           std::size_t reps, std::uint64_t seed, NoiseKind noise,
                                           std::size_t workers) {
  const SpikedPopulation pop(p, {lambda});
  std::vector<double> out(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    out[r] = top_sample_eigenvalue(sample_population(pop, n, noise, derive_seed(seed, r)));
  });
  return out;
}

}  // namespace detail

struct VerifyOptions {
  NoiseKind noise = NoiseKind::gaussian;
  std::size_t workers = 1;
};

/// d_1 / psi(lambda) -> 1: mean and max of |d_1/psi - 1| over replications.
inline LimitCheckReport verify_limit_thm2(double lambda, const MpParams& mp, std::size_t n,
                                          std::size_t reps, std::uint64_t seed,
                                          const VerifyOptions& opts = {}, double tol = 0.05) {
  const double target = psi(lambda, mp);
  if (reps < 1) throw DomainError("verify_limit_thm2: reps must be at least 1");
  const std::size_t p = detail::dimension_for(mp.c(), n);
  const auto tops = detail::top_eigenvalues(lambda, n, p, reps, seed, opts.noise, opts.workers);

  LimitCheckReport rep;
  rep.target = "thm2";
  rep.theory = 1.0;
  double abs_sum = 0.0;
  double abs_max = 0.0;
  for (double d : tops) {
    const double ratio = d / target;
    rep.samples.push_back(ratio);
    abs_sum += std::abs(ratio - 1.0);
    abs_max = std::max(abs_max, std::abs(ratio - 1.0));
  }
  detail::mean_and_variance(rep.samples, rep.mean, rep.variance);
  rep.ratio_to_theory = rep.mean;
  const double abs_mean = abs_sum / static_cast<double>(reps);
  rep.details = {{"n", double(n)},         {"p", double(p)},          {"c", mp.c()},
                 {"lambda", lambda},       {"psi", target},           {"mean_abs_dev", abs_mean},
                 {"max_abs_dev", abs_max}, {"reps", double(reps)}};
  rep.checks = {{"mean |d1/psi - 1|", abs_mean, 0.0, tol},
                {"|mean d1/psi - 1|", std::abs(rep.mean - 1.0), 0.0, tol}};
  return rep;
}

/// Slope of log RMSE((d_1 - psi)/lambda) against log n; sqrt(n) consistency
/// predicts -1/2.
inline LimitCheckReport verify_rate_thm3(double lambda, double c,
                                         const std::vector<std::size_t>& n_grid, std::size_t reps,
                                         std::uint64_t seed, const VerifyOptions& opts = {},
                                         double slope_lo = -0.65, double slope_hi = -0.35) {
  const MpParams mp(c);
  const double target = psi(lambda, mp);
  if (n_grid.size() < 4) throw DomainError("verify_rate_thm3: needs at least 4 sample sizes");
  if (reps < 2) throw DomainError("verify_rate_thm3: reps must be at least 2");

  LimitCheckReport rep;
  rep.target = "thm3";
  rep.theory = -0.5;
  std::vector<double> log_n, log_rmse;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t n = n_grid[g];
    const std::size_t p = detail::dimension_for(c, n);
    const auto tops = detail::top_eigenvalues(lambda, n, p, reps, derive_seed(seed, g), opts.noise,
                                              opts.workers);
    CompensatedSum sq;
    for (double d : tops) {
      const double e = (d - target) / lambda;
      sq += e * e;
    }
    const double rmse = std::sqrt(sq.value() / static_cast<double>(reps));
    rep.samples.push_back(rmse);
    rep.details.emplace_back("rmse@n=" + std::to_string(n), rmse);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_rmse.push_back(std::log(rmse));
  }

  // Ordinary least squares.
  const auto m = static_cast<double>(log_n.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    mx += log_n[i];
    my += log_rmse[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
    sxy += (log_n[i] - mx) * (log_rmse[i] - my);
  }
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    const double r = log_rmse[i] - (my + slope * (log_n[i] - mx));
    sse += r * r;
  }
  const double slope_se = std::sqrt(sse / (m - 2.0) / sxx);

  double rmse_mean = 0.0;
  detail::mean_and_variance(rep.samples, rmse_mean, rep.variance);
  rep.mean = slope;
  rep.ratio_to_theory = slope / rep.theory;
  rep.details.emplace_back("slope", slope);
  rep.details.emplace_back("slope_se", slope_se);
  rep.details.emplace_back("lambda", lambda);
  rep.details.emplace_back("c", c);
  rep.checks = {{"log-log RMSE slope", slope, slope_lo, slope_hi}};
  return rep;
}

/// sqrt(n)(d_1 - psi(lambda))/lambda against N(0, 2 - 2c/(lambda-1)^2).
inline LimitCheckReport verify_normality_thm4(double lambda, double c, std::size_t n,
                                              std::size_t reps, std::uint64_t seed,
                                              const VerifyOptions& opts = {},
                                              double variance_tol = 0.15,
                                              double mean_sigmas = 3.0) {
  const MpParams mp(c);
  const double target = psi(lambda, mp);
  const double theory = limit_variance(lambda, mp);
  if (reps < 2) throw DomainError("verify_normality_thm4: reps must be at least 2");
  const std::size_t p = detail::dimension_for(c, n);
  const auto tops = detail::top_eigenvalues(lambda, n, p, reps, seed, opts.noise, opts.workers);

  LimitCheckReport rep;
  rep.target = "thm4";
  const double root_n = std::sqrt(static_cast<double>(n));
  for (double d : tops) rep.samples.push_back(root_n * (d - target) / lambda);
  detail::mean_and_variance(rep.samples, rep.mean, rep.variance);
  rep.theory = theory;
  rep.ratio_to_theory = rep.variance / theory;
  const double mean_bound = mean_sigmas * std::sqrt(theory) / std::sqrt(static_cast<double>(reps));
  rep.details = {{"n", double(n)},       {"p", double(p)},         {"c", c},
                 {"lambda", lambda},     {"psi", target},          {"mean_bound", mean_bound},
                 {"reps", double(reps)}, {"noise_is_gaussian", opts.noise == NoiseKind::gaussian}};
  rep.checks = {{"|mean|", std::abs(rep.mean), 0.0, mean_bound},
                {"|variance/theory - 1|", std::abs(rep.ratio_to_theory - 1.0), 0.0, variance_tol}};
  return rep;
}

/// Kolmogorov distance between the empirical spectral distribution of a
/// white-noise sample covariance and F_c, plus the lower-edge and
/// structural-zero checks.
inline LimitCheckReport verify_esd(double c, std::size_t n, std::uint64_t seed,
                                   const VerifyOptions& opts = {}, std::size_t grid_points = 1000) {
  const MpParams mp(c);
  const std::size_t p = detail::dimension_for(c, n);
  const auto x = sample_noise(n, p, opts.noise, seed);
  const auto spec = eigvals_sym(sample_covariance(x));
  const auto d = spec.eigenvalues();

  // F_n(x) = #{d_i < x} / p, evaluated on (0, 1.2 b].
  std::vector<double> ascending(d.rbegin(), d.rend());
  double sup = 0.0;
  const double hi = 1.2 * mp.b();
  for (std::size_t j = 1; j <= grid_points; ++j) {
    const double t = hi * static_cast<double>(j) / static_cast<double>(grid_points);
    const auto below = std::ranges::lower_bound(ascending, t) - ascending.begin();
    const double fn = static_cast<double>(below) / static_cast<double>(p);
    sup = std::max(sup, std::abs(fn - mp_cdf(t, mp)));
  }
  const std::size_t rank = std::min(n, p);
  const double d_min = d[rank - 1];
  const auto zeros = static_cast<std::size_t>(std::ranges::count(d, 0.0));
  const std::size_t expected_zeros = p > n ? p - n : 0;

  LimitCheckReport rep;
  rep.target = "esd";
  rep.samples.assign(d.begin(), d.end());
  detail::mean_and_variance(rep.samples, rep.mean, rep.variance);
  rep.theory = 1.0;  // mean of F_c
  rep.ratio_to_theory = rep.mean / rep.theory;
  const double bound = 5.0 / std::sqrt(static_cast<double>(p));
  rep.details = {{"n", double(n)},
                 {"p", double(p)},
                 {"c", c},
                 {"sup_distance", sup},
                 {"sup_bound", bound},
                 {"d_min", d_min},
                 {"lower_edge", mp.a()},
                 {"zero_eigenvalues", double(zeros)},
                 {"expected_zero_eigenvalues", double(expected_zeros)}};
  rep.checks = {{"sup |F_n - F_c|", sup, 0.0, bound},
                {"|d_min - (1-sqrt c)^2|", std::abs(d_min - mp.a()), 0.0, 0.1},
                {"zero eigenvalues - (p-n)^+", double(zeros) - double(expected_zeros), 0.0, 0.0}};
  return rep;
}

}  // namespace spikes
