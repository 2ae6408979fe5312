#pragma once

// Command-line front end. Exit status: 0 success, 1 verification failure,
// 2 usage or domain error.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikes/criteria.hpp"
#include "spikes/diagnostics.hpp"
#include "spikes/error.hpp"
#include "spikes/io.hpp"
#include "spikes/simulate.hpp"
#include "spikes/specmath.hpp"
#include "spikes/spectra.hpp"
#include "spikes/table.hpp"

namespace spikes::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;

// Below this min(n, p) the fixed-p criterion is the default.
inline constexpr std::size_t kLargePThreshold = 50;

inline std::vector<std::string> default_criteria(std::size_t n, std::size_t p) {
  return {std::min(n, p) >= kLargePThreshold ? "gic-large:auto" : "gic-fixed:ilp"};
}

struct EstimateOutcome {
  SampleSpectrum spectrum;
  std::vector<CriterionResult> results;
  DiagnosticRecord diagnostics;
};

/// The estimate pipeline without any I/O: spectrum -> criteria -> diagnostics.
inline EstimateOutcome estimate_from_spectrum(SampleSpectrum spec, std::vector<std::string> ids,
                                              std::optional<std::size_t> k_max) {
  if (ids.empty()) ids = default_criteria(spec.n(), spec.p());
  std::vector<CriterionResult> results;
  std::optional<double> gamma;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto crit = parse_criterion(ids[i]);
    results.push_back(evaluate(crit, spec, k_max));
    if (i == 0 && crit.family == Criterion::Family::gic_large) gamma = results.back().params.multiplier;
  }
  auto diag = report_diagnostics(spec, results.front().k_hat, gamma);
  return {std::move(spec), std::move(results), std::move(diag)};
}

namespace detail {

inline nlohmann::json to_json(const CriterionResult& r) {
  nlohmann::json j;
  j["criterion"] = r.criterion_id;
  j["k_hat"] = r.k_hat;
  j["n"] = r.params.n;
  j["p"] = r.params.p;
  j["k_max"] = r.params.k_max;
  j["multiplier"] = r.params.multiplier ? nlohmann::json(*r.params.multiplier) : nlohmann::json();
  j["scores"] = r.scores;
  return j;
}

inline nlohmann::json to_json(const DiagnosticRecord& d) {
  nlohmann::json j;
  j["c"] = d.c;
  j["varphi"] = d.varphi;
  if (d.gamma) j["gamma"] = *d.gamma;
  if (!d.spike_gaps.empty()) j["spike_gaps"] = d.spike_gaps;
  if (d.lambda_proxy) j["lambda_proxy"] = *d.lambda_proxy;
  if (d.margin) {
    j["gap_margin"] = {{"aic_gap", d.margin->aic_gap},
                       {"quasi_aic_gap", d.margin->quasi_aic_gap},
                       {"kappa", d.margin->kappa}};
  }
  if (d.warning) j["warning"] = *d.warning;
  return j;
}

inline nlohmann::json to_json(const LimitCheckReport& r) {
  nlohmann::json j;
  j["target"] = r.target;
  j["pass"] = r.pass();
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["theory"] = r.theory;
  j["ratio_to_theory"] = r.ratio_to_theory;
  for (const auto& [k, v] : r.details) j["details"][k] = v;
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi},
                           {"passed", c.passed()}});
  }
  return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  if (path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  auto file = spikes::detail::open_output(path);
  file << j.dump(2) << '\n';
}

inline std::string num(double x) { return spikes::detail::format_exact(x); }

inline std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = spikes::detail::parse_number(item, 0);
    if (v < 1 || v != std::floor(v)) throw DomainError("--n-grid entries must be positive integers");
    grid.push_back(static_cast<std::size_t>(v));
  }
  return grid;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Estimate the number of spiked eigenvalues of a covariance matrix", "spikes"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate the number of spikes from a data matrix or spectrum");
  std::string data_path, spectrum_path, estimate_output;
  std::vector<std::string> criteria;
  std::optional<std::size_t> k_max;
  bool center = false;
  auto* data_opt = estimate->add_option("--data", data_path, "Headerless CSV, rows = samples");
  auto* spec_opt = estimate->add_option("--spectrum", spectrum_path, "Spectrum CSV with n=/p= header");
  data_opt->excludes(spec_opt);
  spec_opt->excludes(data_opt);
  estimate->add_option("--criteria", criteria,
                       "Criterion ids (gic-fixed:bic|aic|ilp|ilp-half|const:<C>, gic-large:<gamma>|auto, bcf)")
      ->delimiter(',');
  estimate->add_option("--k-max", k_max, "Largest candidate rank");
  estimate->add_flag("--center", center, "Subtract column means and divide by n-1 (data input only)");
  estimate->add_option("--output", estimate_output, "Write results as JSON to this path ('-' for stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON config");
  std::string config_path, sim_output;
  std::size_t sim_workers = default_workers();
  simulate->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  simulate->add_option("--output", sim_output,
                       "CSV table path; a full-precision companion <name>.full.csv is written alongside");
  simulate->add_option("--workers", sim_workers, "Worker threads")->check(CLI::PositiveNumber);

  // mp-eval
  auto* mp_eval = app.add_subcommand("mp-eval", "Evaluate Marchenko-Pastur quantities");
  std::string quantity;
  double c_value = 0.0;
  std::optional<double> x_arg, lambda_arg, d_arg;
  mp_eval->add_option("quantity", quantity, "Quantity")
      ->required()
      ->check(CLI::IsMember({"density", "cdf", "psi", "psi-inv", "m1", "m2", "varphi",
                             "limit-variance", "gap"}));
  mp_eval->add_option("--c", c_value, "Aspect ratio c = p/n")->required();
  mp_eval->add_option("--x", x_arg, "Argument of density/cdf");
  mp_eval->add_option("--lambda", lambda_arg, "Population spike (psi, limit-variance, gap)");
  mp_eval->add_option("--d", d_arg, "Sample eigenvalue (psi-inv, m1, m2)");

  // verify
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of a limit theorem");
  std::string target;
  std::optional<double> v_lambda, v_c;
  std::optional<std::size_t> v_n, v_reps;
  std::string v_grid = "500,1000,2000,4000";
  std::uint64_t v_seed = 1;
  std::string v_noise = "gaussian";
  std::size_t v_workers = default_workers();
  std::string verify_output;
  verify->add_option("target", target, "thm2 | thm3 | thm4 | esd")
      ->required()
      ->check(CLI::IsMember({"thm2", "thm3", "thm4", "esd"}));
  verify->add_option("--lambda", v_lambda, "Population spike");
  verify->add_option("--c", v_c, "Aspect ratio; p = round(c n)");
  verify->add_option("--n", v_n, "Sample size");
  verify->add_option("--n-grid", v_grid, "Comma-separated sample sizes (thm3)");
  verify->add_option("--reps", v_reps, "Replications");
  verify->add_option("--seed", v_seed, "Master seed");
  verify->add_option("--noise", v_noise, "gaussian | rademacher | uniform")
      ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  verify->add_option("--workers", v_workers, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--output", verify_output, "Write the report as JSON ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (estimate->parsed()) {
      if (data_path.empty() == spectrum_path.empty()) {
        err << "error: exactly one of --data and --spectrum is required\n\n" << estimate->help();
        return kExitUsage;
      }
      std::optional<SampleSpectrum> spec;
      if (!data_path.empty()) {
        const auto x = read_data_csv(data_path);
        spec = eigvals_sym(sample_covariance(x, center ? Centering::sample : Centering::none));
      } else {
        if (center) {
          err << "error: --center applies to --data input only\n";
          return kExitUsage;
        }
        spec = read_spectrum_csv(spectrum_path);
      }
      const auto outcome = estimate_from_spectrum(std::move(*spec), criteria, k_max);
      out << "n = " << outcome.spectrum.n() << ", p = " << outcome.spectrum.p() << "\n";
      for (const auto& r : outcome.results) {
        out << r.criterion_id << ": k_hat=" << r.k_hat << " (candidates 0.." << r.params.k_max;
        if (r.params.multiplier) out << ", multiplier " << detail::num(*r.params.multiplier);
        out << ")\n";
      }
      out << "diagnostics (" << outcome.results.front().criterion_id << "):\n";
      print_diagnostics(outcome.diagnostics, out);
      if (!estimate_output.empty()) {
        nlohmann::json j;
        j["n"] = outcome.spectrum.n();
        j["p"] = outcome.spectrum.p();
        for (const auto& r : outcome.results) j["results"].push_back(detail::to_json(r));
        j["diagnostics"] = detail::to_json(outcome.diagnostics);
        detail::write_json(j, estimate_output, out);
      }
      return kExitOk;
    }

    if (simulate->parsed()) {
      auto in = spikes::detail::open_input(config_path);
      const auto configs = parse_sim_configs(in);
      std::vector<SimReport> reports;
      for (const auto& cfg : configs) {
        reports.push_back(run_sim(cfg, sim_workers));
        const auto& r = reports.back();
        out << "n=" << cfg.n << " p=" << cfg.p << " k=" << cfg.k << " snr=" << detail::num(r.snr);
        for (const auto& c : r.criteria) {
          out << "  " << c.criterion_id << " P(k_hat=k)=" << spikes::detail::format_fixed2(c.success_rate)
              << " E(k_hat)=" << spikes::detail::format_fixed2(c.mean_khat);
        }
        out << "\n";
      }
      if (sim_output.empty() || sim_output == "-") {
        emit_table(reports, out, TablePrecision::rounded);
      } else {
        auto rounded = spikes::detail::open_output(sim_output);
        emit_table(reports, rounded, TablePrecision::rounded);
        auto full = spikes::detail::open_output(companion_path(sim_output));
        emit_table(reports, full, TablePrecision::full);
        out << "wrote " << sim_output << " and " << companion_path(sim_output) << "\n";
      }
      return kExitOk;
    }

    if (mp_eval->parsed()) {
      const MpParams mp(c_value);
      auto need = [&](const std::optional<double>& v, const char* flag) {
        if (!v) throw CLI::RequiredError(std::string(flag) + " is required for " + quantity);
        return *v;
      };
      if (quantity == "density") {
        out << detail::num(mp_density(need(x_arg, "--x"), mp)) << "\n";
      } else if (quantity == "cdf") {
        out << detail::num(mp_cdf(need(x_arg, "--x"), mp)) << "\n";
      } else if (quantity == "psi") {
        out << detail::num(psi(need(lambda_arg, "--lambda"), mp)) << "\n";
      } else if (quantity == "psi-inv") {
        out << detail::num(psi_inv(need(d_arg, "--d"), mp)) << "\n";
      } else if (quantity == "m1") {
        out << detail::num(m1(need(d_arg, "--d"), mp)) << "\n";
      } else if (quantity == "m2") {
        out << detail::num(m2(need(d_arg, "--d"), mp)) << "\n";
      } else if (quantity == "varphi") {
        out << detail::num(varphi(mp)) << "\n";
      } else if (quantity == "limit-variance") {
        out << detail::num(limit_variance(need(lambda_arg, "--lambda"), mp)) << "\n";
      } else if (quantity == "gap") {
        const auto g = gap_margin(need(lambda_arg, "--lambda"), mp);
        out << "aic_gap " << detail::num(g.aic_gap) << "\n"
            << "quasi_aic_gap " << detail::num(g.quasi_aic_gap) << "\n"
            << "kappa " << detail::num(g.kappa) << "\n"
            << "varphi " << detail::num(varphi(mp)) << "\n";
      }
      return kExitOk;
    }

    if (verify->parsed()) {
      const VerifyOptions opts{parse_noise_kind(v_noise), v_workers};
      LimitCheckReport report;
      if (target == "thm2") {
        report = verify_limit_thm2(v_lambda.value_or(5.0), MpParams(v_c.value_or(0.4)), v_n.value_or(2000),
                                   v_reps.value_or(50), v_seed, opts);
      } else if (target == "thm3") {
        report = verify_rate_thm3(v_lambda.value_or(5.0), v_c.value_or(0.5), detail::parse_grid(v_grid),
                                  v_reps.value_or(200), v_seed, opts);
      } else if (target == "thm4") {
        report = verify_normality_thm4(v_lambda.value_or(3.0), v_c.value_or(0.4), v_n.value_or(500),
                                       v_reps.value_or(2000), v_seed, opts);
      } else {
        report = verify_esd(v_c.value_or(0.5), v_n.value_or(2000), v_seed, opts);
      }
      out << target << ": mean " << detail::num(report.mean) << ", variance "
          << detail::num(report.variance) << ", theory " << detail::num(report.theory) << "\n";
      for (const auto& [k, v] : report.details) out << "  " << k << " = " << detail::num(v) << "\n";
      for (const auto& c : report.checks) {
        out << "  [" << (c.passed() ? "PASS" : "FAIL") << "] " << c.name << " = " << detail::num(c.value)
            << " in [" << detail::num(c.lo) << ", " << detail::num(c.hi) << "]\n";
      }
      out << (report.pass() ? "PASS" : "FAIL") << "\n";
      if (!verify_output.empty()) detail::write_json(detail::to_json(report), verify_output, out);
      return report.pass() ? kExitOk : kExitVerifyFailed;
    }
  } catch (const CLI::RequiredError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IndexError& e) {
    err << "index error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::system_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace spikes::cli
