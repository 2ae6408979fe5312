// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spikes/spikes.hpp"

using namespace spikes;

namespace {

constexpr std::uint64_t kSeed = 2021;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [miss: " << what << "]";
    }
  }
};

SimReport grid_run(std::size_t n, std::size_t p, std::size_t k, double snr,
                    std::vector<std::string> criteria, std::uint64_t seed = kSeed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.k = k;
  cfg.snr = SnrSpec::explicit_snr(snr);
  cfg.criteria = std::move(criteria);
  cfg.replications = 200;
  cfg.seed = seed;
  cfg.k_max = 15;
  return run_sim(cfg, default_workers());
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

bool in(double x, double lo, double hi) { return x >= lo && x <= hi; }

// 1. p < n: n=500, p=200, k=10.
Outcome p_lt_n() {
  Outcome o;
  const auto s25 = grid_run(500, 200, 10, 2.5, {"gic-large:auto"});
  const auto s15 = grid_run(500, 200, 10, 1.5, {"gic-large:auto"});
  const auto s10 = grid_run(500, 200, 10, 1.0, {"bcf"});
  const double g25 = s25.criteria[0].success_rate, g15 = s15.criteria[0].success_rate;
  const double b10 = s10.criteria[0].success_rate;
  o.detail << "GIC@2.5=" << fmt(g25, 2) << " GIC@1.5=" << fmt(g15, 2) << " BCF@1=" << fmt(b10, 2);
  o.require(g25 >= 0.97, "GIC@2.5 >= 0.97");
  o.require(g15 >= 0.95, "GIC@1.5 >= 0.95");
  o.require(in(b10, 0.14, 0.34), "BCF@1 in [0.14, 0.34]");
  return o;
}

// 2. p > n: n=200, p=500, k=10.
Outcome p_gt_n() {
  Outcome o;
  const auto s35 = grid_run(200, 500, 10, 3.5, {"gic-large:auto"});
  const auto s15 = grid_run(200, 500, 10, 1.5, {"gic-large:auto"});
  const auto s45 = grid_run(200, 500, 10, 4.5, {"bcf"});
  const double g35 = s35.criteria[0].success_rate, g15 = s15.criteria[0].success_rate;
  const double b45 = s45.criteria[0].success_rate;
  o.detail << "GIC@3.5=" << fmt(g35, 2) << " GIC@1.5=" << fmt(g15, 2) << " BCF@4.5=" << fmt(b45, 2);
  o.require(g35 >= 0.85, "GIC@3.5 >= 0.85");
  o.require(g15 <= 0.05, "GIC@1.5 <= 0.05");
  o.require(b45 >= 0.95, "BCF@4.5 >= 0.95");
  return o;
}

// 3. Small p: p=12, k=3, n=100, delta=1.5.
Outcome small_p() {
  Outcome o;
  for (std::uint64_t s = 0; s < 5; ++s) {
    SimConfig cfg;
    cfg.n = 100;
    cfg.p = 12;
    cfg.k = 3;
    cfg.snr = SnrSpec::fixed_p_delta(1.5);
    cfg.criteria = {"gic-fixed:ilp", "gic-fixed:bic"};
    cfg.replications = 200;
    cfg.seed = kSeed + s;
    const auto rep = run_sim(cfg, default_workers());
    const double ilp = rep.criteria[0].success_rate, bic = rep.criteria[1].success_rate;
    o.detail << (s ? " | " : "") << "seed " << cfg.seed << ": ILP=" << fmt(ilp, 3) << " BIC=" << fmt(bic, 3);
    if (s == 0) {
      o.require(in(ilp, 0.69, 0.89), "ILP in [0.69, 0.89]");
      o.require(in(bic, 0.33, 0.53), "BIC in [0.33, 0.53]");
    }
    o.require(ilp > bic, "ILP > BIC at seed " + std::to_string(cfg.seed));
  }
  return o;
}

// 4. p = n = 200, SNR=2.
Outcome p_eq_n() {
  Outcome o;
  const auto rep = grid_run(200, 200, 10, 2.0, {"gic-large:auto", "bcf"});
  const double g = rep.criteria[0].success_rate, b = rep.criteria[1].success_rate;
  o.detail << "GIC=" << fmt(g, 2) << " BCF=" << fmt(b, 2);
  o.require(in(g, 0.75, 0.95), "GIC in [0.75, 0.95]");
  o.require(g > b, "GIC > BCF");
  return o;
}

// 5. Transform identities.
Outcome transforms() {
  Outcome o;
  double worst_m1 = 0.0, worst_psi = 0.0, worst_mass = 0.0;
  for (double c : {0.25, 0.4, 1.0, 2.5}) {
    const MpParams mp(c);
    for (int i = 1; i <= 50; ++i) {
      const double alpha = mp.threshold() + (30.0 - mp.threshold()) * i / 50.0;
      worst_m1 = std::max(worst_m1, std::abs(m1(psi(alpha, mp), mp) - 1.0 / (alpha - 1.0)));
      const double d = mp.b() + 0.5 * i;
      worst_psi = std::max(worst_psi, std::abs(psi(psi_inv(d, mp), mp) - d) / d);
    }
    const double mass = integrate(
        [&](double t) {
          return mp_density(mp.centre() + mp.half_width() * std::sin(t), mp) * mp.half_width() * std::cos(t);
        },
        -std::numbers::pi / 2, std::numbers::pi / 2);
    worst_mass = std::max(worst_mass, std::abs(mass - std::min(1.0, 1.0 / c)));
  }
  o.detail << "max|m1(psi(a)) - 1/(a-1)|=" << worst_m1 << " max rel|psi(psi_inv(d)) - d|=" << worst_psi
           << " max|mass - min(1,1/c)|=" << worst_mass;
  o.require(worst_m1 <= 1e-7, "m1 identity within 1e-7");
  o.require(worst_psi <= 1e-10, "psi o psi_inv within 1e-10");
  o.require(worst_mass <= 1e-6, "mass within 1e-6");
  return o;
}

// 6. Normality of the top eigenvalue, Gaussian and uniform noise.
Outcome normality() {
  Outcome o;
  for (auto noise : {NoiseKind::gaussian, NoiseKind::uniform}) {
    const auto rep = verify_normality_thm4(3.0, 0.4, 500, 2000, kSeed, {noise, default_workers()});
    o.detail << (noise == NoiseKind::gaussian ? "" : " | ") << to_string(noise) << ": mean=" << fmt(rep.mean)
             << " var=" << fmt(rep.variance) << " theory=" << fmt(rep.theory)
             << " ratio=" << fmt(rep.ratio_to_theory);
    o.require(rep.checks[0].passed(), std::string(to_string(noise)) + " mean within 3 sigma/sqrt(reps)");
    o.require(rep.checks[1].passed(), std::string(to_string(noise)) + " variance within 15%");
  }
  return o;
}

// 7. sqrt(n) rate of the top eigenvalue.
Outcome rate() {
  Outcome o;
  const auto rep = verify_rate_thm3(5.0, 0.5, {500, 1000, 2000, 4000}, 200, kSeed, {NoiseKind::gaussian, default_workers()});
  o.detail << "slope=" << fmt(rep.mean);
  for (const auto& [k, v] : rep.details) {
    if (k == "slope_se") o.detail << " se=" << fmt(v);
  }
  o.require(rep.pass(), "slope in [-0.65, -0.35]");
  return o;
}

// 8. ESD, lower edge, structural zeros.
Outcome esd() {
  Outcome o;
  const auto half = verify_esd(0.5, 2000, kSeed);
  const auto wide = verify_esd(2.0, 500, kSeed);
  o.detail << "c=0.5: sup=" << fmt(half.checks[0].value, 4) << " (bound " << fmt(half.checks[0].hi, 4)
           << ") |d_min-a|=" << fmt(half.checks[1].value, 4) << " | c=2, n=500: zero-count excess="
           << wide.checks[2].value;
  o.require(half.checks[0].passed(), "sup distance");
  o.require(half.checks[1].passed(), "lower edge");
  o.require(wide.checks[2].passed(), "p - n zero eigenvalues");
  return o;
}

// 9. Oracle equivalence.
Outcome oracles() {
  Outcome o;
  std::mt19937_64 gen(kSeed);
  std::uniform_int_distribution<std::size_t> pick_p(4, 20), pick_n(4, 80);
  std::uniform_real_distribution<double> pick_gamma(0.2, 2.0);
  std::size_t mismatched = 0;
  auto check = [&](const std::vector<double>& got, const std::vector<long double>& want) {
    if (got.size() != want.size()) {
      ++mismatched;
      return;
    }
    for (std::size_t k = 0; k < got.size(); ++k) {
      if (!oracle::close_rel(got[k], want[k], 1e-10)) {
        ++mismatched;
        return;
      }
    }
  };
  for (int t = 0; t < 1000; ++t) {
    const std::size_t p = pick_p(gen), n = pick_n(gen);
    const auto d = oracle::random_spectrum(gen, p);
    const SampleSpectrum spec(d, n);
    const std::size_t cap = std::min(n, p) - 1;
    const double gamma = pick_gamma(gen);
    const auto ln = static_cast<long double>(n);
    check(gic_large(spec, gamma, cap).scores, oracle::gic_large(d, n, gamma, cap));
    check(gic_large(spec, 1.0, cap).scores, oracle::aic(d, n, cap));
    check(gic_large(spec, std::log(double(n)) / 2, cap).scores, oracle::bic(d, n, cap));
    check(gic_fixed(spec, PenaltySchedule::bic(), cap).scores, oracle::gic_fixed(d, n, std::log(ln) / 2, cap));
    check(gic_fixed(spec, PenaltySchedule::aic(), cap).scores, oracle::gic_fixed(d, n, 1.0L, cap));
    check(gic_fixed(spec, PenaltySchedule::ilp(), cap).scores,
          oracle::gic_fixed(d, n, std::log(std::log(ln)), cap));
    check(gic_fixed(spec, PenaltySchedule::ilp_half(), cap).scores,
          oracle::gic_fixed(d, n, std::sqrt(std::log(std::log(ln))), cap));
    check(gic_fixed(spec, PenaltySchedule::fixed(2.0), cap).scores, oracle::gic_fixed(d, n, 2.0L, cap));
    const std::size_t bcf_cap = std::min(n - 3, p - 2);
    check(bcf(spec, bcf_cap).scores, oracle::bcf(d, n, bcf_cap));
  }
  double worst_eig = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto a = oracle::random_symmetric(gen, 3);
    const auto got = symmetric_eigenvalues(a);
    const auto want = oracle::cubic_eigenvalues(a);
    for (int i = 0; i < 3; ++i) worst_eig = std::max(worst_eig, std::abs(got[i] - want[i]));
  }
  o.detail << "score-vector mismatches: " << mismatched << "/9000, max eigenvalue error " << worst_eig;
  o.require(mismatched == 0, "scores within 1e-10 relative");
  o.require(worst_eig <= 1e-9, "3x3 eigenvalues within 1e-9");
  return o;
}

// 10. Properties.
Outcome properties() {
  Outcome o;
  std::mt19937_64 gen(kSeed + 10);
  std::size_t violations = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t p = 6 + t % 15, n = 25 + 3 * t;
    const SampleSpectrum spec(oracle::random_spectrum(gen, p), n);
    std::size_t prev_f = p, prev_l = p;
    for (int i = 1; i <= 40; ++i) {
      const double mult = 0.05 * i;
      const auto kf = gic_fixed(spec, PenaltySchedule::fixed(mult), p - 1).k_hat;
      const auto kl = gic_large(spec, mult, p - 1).k_hat;
      violations += (kf > prev_f) + (kl > prev_l);
      prev_f = kf;
      prev_l = kl;
    }
  }

  std::size_t nonzero = 0;
  const std::vector<std::string> ids = {"gic-fixed:bic", "gic-fixed:aic", "gic-fixed:ilp", "gic-fixed:ilp-half",
                                        "gic-fixed:const:2", "gic-large:auto", "gic-large:1", "bcf"};
  for (auto [n, p] : {std::pair<std::size_t, std::size_t>{100, 12}, {500, 200}, {200, 500}, {200, 200}}) {
    const SampleSpectrum ones(std::vector<double>(p, 1.0), n);
    for (const auto& id : ids) nonzero += evaluate(parse_criterion(id), ones).k_hat != 0;
  }

  SimConfig cfg;
  cfg.n = 120;
  cfg.p = 50;
  cfg.k = 4;
  cfg.snr = SnrSpec::explicit_snr(1.5);
  cfg.criteria = {"gic-large:auto", "bcf", "gic-fixed:ilp"};
  cfg.replications = 64;
  cfg.seed = kSeed;
  const auto r1 = run_sim(cfg, 1);
  const bool same = r1 == run_sim(cfg, 4) && r1 == run_sim(cfg, 16);

  o.detail << "monotonicity violations: " << violations << ", zero-signal misses: " << nonzero
           << ", reports equal under 1/4/16 workers: " << (same ? "yes" : "no");
  o.require(violations == 0, "penalty monotonicity");
  o.require(nonzero == 0, "zero-signal k_hat = 0");
  o.require(same, "determinism across workers");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 recovery with p < n (n=500, p=200)", p_lt_n}, {"2 recovery with p > n (n=200, p=500)", p_gt_n},
      {"3 small-p ILP vs BIC at low SNR", small_p}, {"4 recovery with p = n = 200", p_eq_n},
      {"5 transform identities", transforms}, {"6 normality of the top eigenvalue", normality},
      {"7 convergence rate", rate},           {"8 ESD and edges", esd},
      {"9 oracle equivalence", oracles},      {"10 property suite", properties},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
