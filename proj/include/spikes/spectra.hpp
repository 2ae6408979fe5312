#pragma once

// Spiked populations, data generation, sample covariance and sample spectra.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/linalg.hpp"
#include "spikes/rng.hpp"
#include "spikes/summation.hpp"

namespace spikes {

// Distribution of the standardized entries of z (mean 0, variance 1).
enum class NoiseKind { gaussian, rademacher, uniform };

inline std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian:
      return "gaussian";
    case NoiseKind::rademacher:
      return "rademacher";
    case NoiseKind::uniform:
      return "uniform";
  }
  return "gaussian";
}

inline NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "rademacher") return NoiseKind::rademacher;
  if (name == "uniform") return NoiseKind::uniform;
  throw DomainError("unknown noise kind '" + std::string(name) +
                    "' (expected gaussian, rademacher or uniform)");
}

// Population covariance Diag(spikes, 1, ..., 1) of dimension p.
class SpikedPopulation {
 public:
  SpikedPopulation(std::size_t p, std::vector<double> spikes) : p_(p), spikes_(std::move(spikes)) {
    if (spikes_.empty()) throw DomainError("SpikedPopulation: at least one spike is required");
    if (spikes_.size() >= p_) {
      throw DomainError("SpikedPopulation: number of spikes must be smaller than p");
    }
    for (std::size_t i = 0; i < spikes_.size(); ++i) {
      if (!(spikes_[i] > noise_level())) {
        std::ostringstream msg;
        msg << "SpikedPopulation: spike " << spikes_[i] << " must exceed the noise level 1";
        throw DomainError(msg.str());
      }
      if (i > 0 && spikes_[i] > spikes_[i - 1]) {
        throw DomainError("SpikedPopulation: spikes must be sorted nonincreasing");
      }
    }
  }

  std::size_t p() const { return p_; }
  std::size_t k() const { return spikes_.size(); }
  std::span<const double> spikes() const { return spikes_; }
  static constexpr double noise_level() { return 1.0; }
  // Smallest spike minus the bulk level.
  double snr() const { return spikes_.back() - noise_level(); }
  double variance(std::size_t j) const { return j < spikes_.size() ? spikes_[j] : noise_level(); }

 private:
  std::size_t p_;
  std::vector<double> spikes_;
};

// n x p sample matrix; row i is the observation x_i.
struct DataMatrix {
  Matrix values;

  std::size_t n() const { return values.rows(); }
  std::size_t p() const { return values.cols(); }
};

struct SampleCovariance {
  Matrix matrix;
  std::size_t n;  // sample size entering the likelihoods
};

// Sample eigenvalues d_1 >= ... >= d_p >= 0 with the sample size.
class SampleSpectrum {
 public:
  SampleSpectrum(std::vector<double> eigenvalues, std::size_t n)
      : values_(std::move(eigenvalues)), n_(n) {
    if (n_ == 0) throw DomainError("SampleSpectrum: n must be positive");
    if (values_.empty()) throw DomainError("SampleSpectrum: empty spectrum");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
        throw DomainError("SampleSpectrum: eigenvalues must be finite and nonnegative");
      }
      if (i > 0 && values_[i] > values_[i - 1]) {
        throw DomainError("SampleSpectrum: eigenvalues must be sorted nonincreasing");
      }
    }
  }

  std::size_t n() const { return n_; }
  std::size_t p() const { return values_.size(); }
  std::span<const double> eigenvalues() const { return values_; }
  // 0-based: operator[](0) is d_1.
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const SampleSpectrum&, const SampleSpectrum&) = default;

 private:
  std::vector<double> values_;
  std::size_t n_;
};

/// Standardized noise: n rows of p i.i.d. entries of the requested kind.
/// Row i draws from its own stream keyed by (seed, i).
inline DataMatrix sample_noise(std::size_t n, std::size_t p, NoiseKind kind, std::uint64_t seed) {
  if (n == 0 || p == 0) throw DomainError("sample_noise: n and p must be positive");
  DataMatrix x{Matrix(n, p)};
  const double root3 = std::sqrt(3.0);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, i));
    auto row = x.values.row(i);
    switch (kind) {
      case NoiseKind::gaussian: {
        std::size_t j = 0;
        for (; j + 1 < p; j += 2) rng.normal_pair(row[j], row[j + 1]);
        if (j < p) {
          double spare = 0.0;
          rng.normal_pair(row[j], spare);
        }
        break;
      }
      case NoiseKind::rademacher:
        for (auto& v : row) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
        break;
      case NoiseKind::uniform:
        for (auto& v : row) v = root3 * (2.0 * rng.uniform() - 1.0);
        break;
    }
  }
  return x;
}

/// n i.i.d. rows Sigma^{1/2} z with Sigma = Diag(spikes, 1, ..., 1).
inline DataMatrix sample_population(const SpikedPopulation& pop, std::size_t n, NoiseKind kind,
                                    std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_population: n must be at least 1");
  auto x = sample_noise(n, pop.p(), kind, seed);
  for (std::size_t j = 0; j < pop.k(); ++j) {
    const double scale = std::sqrt(pop.spikes()[j]);
    for (std::size_t i = 0; i < n; ++i) x.values(i, j) *= scale;
  }
  return x;
}

enum class Centering {
  none,    // S = X^T X / n (known zero mean)
  sample,  // subtract column means, divide by n - 1
};

/// Sample covariance. With Centering::sample the recorded sample size is n-1.
inline SampleCovariance sample_covariance(const DataMatrix& x, Centering centering = Centering::none) {
  const std::size_t n = x.n();
  const std::size_t p = x.p();
  if (n == 0) throw DomainError("sample_covariance: n must be at least 1");
  if (centering == Centering::sample && n < 2) {
    throw DomainError("sample_covariance: centering needs at least 2 samples");
  }

  std::vector<double> means(p, 0.0);
  if (centering == Centering::sample) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.values.row(i);
      for (std::size_t j = 0; j < p; ++j) means[j] += row[j];
    }
    for (auto& m : means) m /= static_cast<double>(n);
  }

  Matrix s(p, p);
  std::vector<double> centred(p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.values.row(i);
    for (std::size_t j = 0; j < p; ++j) centred[j] = row[j] - means[j];
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = centred[j];
      if (xj == 0.0) continue;
      auto out = s.row(j);
      for (std::size_t l = j; l < p; ++l) out[l] += xj * centred[l];
    }
  }
  const std::size_t dof = centering == Centering::sample ? n - 1 : n;
  const double inv = 1.0 / static_cast<double>(dof);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = j; l < p; ++l) {
      s(j, l) *= inv;
      s(l, j) = s(j, l);
    }
  }
  return SampleCovariance{std::move(s), dof};
}

/// Sorted sample spectrum. Eigenvalues with magnitude below 1e-12 d_1 are set
/// to zero; larger negative eigenvalues mean the input was not PSD.
inline SampleSpectrum eigvals_sym(const SampleCovariance& cov) {
  auto values = symmetric_eigenvalues(cov.matrix);
  const double top = values.empty() ? 0.0 : std::max(values.front(), 0.0);
  const double floor = 1e-12 * top;
  for (auto& d : values) {
    if (std::abs(d) < floor || d == 0.0) {
      d = 0.0;
    } else if (d < 0.0) {
      std::ostringstream msg;
      msg << "eigvals_sym: negative eigenvalue " << d << " exceeds round-off (d_1 = " << top
          << "); input is not positive semidefinite";
      throw ConvergenceError(msg.str());
    }
  }
  // Clamping may leave -0.0 or reorder equal values; keep order canonical.
  std::ranges::stable_sort(values, std::greater<>{});
  return SampleSpectrum(std::move(values), cov.n);
}

/// Largest eigenvalue of X^T X / n, computed by Lanczos on the factor X.
inline double top_sample_eigenvalue(const DataMatrix& x, const LanczosOptions& opts = {}) {
  const std::size_t n = x.n();
  const std::size_t p = x.p();
  std::vector<double> t(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  auto apply = [&](std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) t[i] = detail::dot(x.values.row(i), v);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.values.row(i);
      const double ti = t[i] * inv_n;
      for (std::size_t j = 0; j < p; ++j) out[j] += ti * row[j];
    }
  };
  return lanczos_top_eigenvalue(p, apply, opts);
}

/// Mean of the trailing eigenvalues d_{kprime+1}, ..., d_p.
inline double dbar(const SampleSpectrum& spec, std::size_t kprime) {
  if (kprime >= spec.p()) {
    std::ostringstream msg;
    msg << "dbar: kprime = " << kprime << " must be smaller than p = " << spec.p();
    throw IndexError(msg.str());
  }
  const auto tail = spec.eigenvalues().subspan(kprime);
  return compensated_sum(tail) / static_cast<double>(tail.size());
}

/// SNR used by the small-p design: 2 delta ((p - k/2 + 1/2) log log n / n)^{1/2}.
inline double snr_fixed_p(double delta, std::size_t p, std::size_t k, std::size_t n) {
  const double nn = static_cast<double>(n);
  const double lln = n > 1 ? std::log(std::log(nn)) : -1.0;
  if (!(lln > 0.0)) {
    std::ostringstream msg;
    msg << "snr_fixed_p: log log n must be positive, n = " << n;
    throw DomainError(msg.str());
  }
  if (k > p) throw DomainError("snr_fixed_p: k must not exceed p");
  const double dim = static_cast<double>(p) - static_cast<double>(k) / 2.0 + 0.5;
  return 2.0 * delta * std::sqrt(dim * lln / nn);
}

/// Simulation layout: k-1 spikes at 1 + 2 snr followed by one at 1 + snr.
inline SpikedPopulation build_population(std::size_t p, std::size_t k, double snr) {
  if (!(snr > 0.0)) {
    std::ostringstream msg;
    msg << "build_population: snr must be positive, got " << snr;
    throw DomainError(msg.str());
  }
  if (k < 1 || k >= p) throw DomainError("build_population: requires 1 <= k < p");
  std::vector<double> spikes(k, 1.0 + 2.0 * snr);
  spikes.back() = 1.0 + snr;
  return SpikedPopulation(p, std::move(spikes));
}

}  // namespace spikes
