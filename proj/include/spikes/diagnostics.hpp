#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spikes/criteria.hpp"
#include "spikes/io.hpp"
#include "spikes/specmath.hpp"
#include "spikes/spectra.hpp"

namespace spikes {

struct DiagnosticRecord {
  double c = 0.0;
  double varphi = 0.0;
  std::size_t k_hat = 0;
  std::optional<double> gamma;
  // d_i / dbar_{k_hat+1} for i = 1..k_hat, a rough per-spike SNR proxy.
  std::vector<double> spike_gaps;
  // psi^{-1}(d_{k_hat}); present only above the phase transition.
  std::optional<double> lambda_proxy;
  std::optional<GapMargin> margin;
  std::optional<std::string> warning;
};

/// Post-estimate diagnostics for the selected rank. `gamma` is the large-p
/// multiplier actually used, if any.
inline DiagnosticRecord report_diagnostics(const SampleSpectrum& spec, std::size_t k_hat,
                                           std::optional<double> gamma = std::nullopt) {
  const MpParams mp = MpParams::from_dimensions(spec.n(), spec.p());
  DiagnosticRecord rec;
  rec.c = mp.c();
  rec.varphi = varphi(mp);
  rec.k_hat = k_hat;
  if (k_hat == 0) return rec;
  if (k_hat >= spec.p()) throw IndexError("report_diagnostics: k_hat must be smaller than p");

  rec.gamma = gamma;
  const double bulk = dbar(spec, k_hat);
  for (std::size_t i = 0; i < k_hat; ++i) {
    rec.spike_gaps.push_back(bulk > 0.0 ? spec[i] / bulk : 0.0);
  }
  const double d_k = spec[k_hat - 1];
  if (d_k > mp.b()) {
    const double lambda = psi_inv(d_k, mp);
    rec.lambda_proxy = lambda;
    // psi_inv lands exactly on the threshold only when d_k == b.
    if (lambda > mp.threshold()) rec.margin = gap_margin(lambda, mp);
  } else {
    std::ostringstream msg;
    msg << "d_" << k_hat << " = " << detail::format_exact(d_k)
        << " is at or below the phase transition (1+sqrt(c))^2 = " << detail::format_exact(mp.b())
        << "; the selected spike is not distant";
    rec.warning = msg.str();
  }
  return rec;
}

inline void print_diagnostics(const DiagnosticRecord& rec, std::ostream& out) {
  auto g = [](double x) {
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
  };
  out << "  c = p/n = " << g(rec.c) << "\n";
  out << "  varphi(c) = " << g(rec.varphi) << "\n";
  if (rec.k_hat == 0) return;
  if (rec.gamma) out << "  gamma = " << g(*rec.gamma) << "\n";
  out << "  spike gaps d_i/dbar:";
  for (double x : rec.spike_gaps) out << ' ' << g(x);
  out << "\n";
  if (rec.lambda_proxy) out << "  lambda_k proxy psi^-1(d_k) = " << g(*rec.lambda_proxy) << "\n";
  if (rec.margin) {
    out << "  gap margins: aic = " << g(rec.margin->aic_gap)
        << ", quasi-aic = " << g(rec.margin->quasi_aic_gap) << ", kappa = " << g(rec.margin->kappa)
        << (rec.margin->kappa > rec.varphi ? " (> varphi)" : " (<= varphi)") << "\n";
  }
  if (rec.warning) out << "  warning: " << *rec.warning << "\n";
}

}  // namespace spikes
