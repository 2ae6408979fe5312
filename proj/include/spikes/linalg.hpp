#pragma once

// Dense symmetric eigenvalue routines: Householder tridiagonalisation followed
// by implicit-shift QL, plus a Lanczos solver for the largest eigenvalue of a
// Gram matrix X^T X / n that never forms the p x p product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/rng.hpp"

namespace spikes {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw DomainError("Matrix: value count does not match shape");
    }
  }

  static Matrix diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  std::span<const double> data() const { return values_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;  // offdiag[i] couples i and i+1; offdiag.back() == 0
};

namespace detail {

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace detail

inline bool is_symmetric(const Matrix& a, double rel_tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

// Reduces a symmetric matrix to tridiagonal form by Householder reflections.
// Only eigenvalues are preserved; the reflectors are discarded.
inline Tridiagonal tridiagonalize(Matrix a) {
  const std::size_t p = a.rows();
  Tridiagonal t;
  t.diag.assign(p, 0.0);
  t.offdiag.assign(p, 0.0);
  if (p == 0) return t;

  std::vector<double> v(p), w(p);
  for (std::size_t k = 0; k + 2 < p; ++k) {
    const std::size_t m = p - k - 1;  // length of the trailing column
    double norm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm2 += a(k + 1 + i, k) * a(k + 1 + i, k);
    t.diag[k] = a(k, k);
    const double x0 = a(k + 1, k);
    double tail2 = norm2 - x0 * x0;
    if (tail2 <= 0.0) {
      t.offdiag[k] = x0;
      continue;
    }
    const double alpha = x0 > 0.0 ? -std::sqrt(norm2) : std::sqrt(norm2);
    t.offdiag[k] = alpha;
    for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
    v[0] -= alpha;
    const double vnorm2 = v[0] * v[0] + tail2;
    const double tau = 2.0 / vnorm2;

    // w = tau * A22 v;  w -= (tau/2)(v.w) v;  A22 -= v w^T + w v^T
    for (std::size_t i = 0; i < m; ++i) {
      auto row = a.row(k + 1 + i).subspan(k + 1, m);
      w[i] = tau * detail::dot(row, {v.data(), m});
    }
    const double kappa = 0.5 * tau * detail::dot({v.data(), m}, {w.data(), m});
    for (std::size_t i = 0; i < m; ++i) w[i] -= kappa * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      auto row = a.row(k + 1 + i).subspan(k + 1, m);
      const double vi = v[i];
      const double wi = w[i];
      for (std::size_t j = 0; j < m; ++j) row[j] -= vi * w[j] + wi * v[j];
    }
  }
  if (p >= 2) {
    t.diag[p - 2] = a(p - 2, p - 2);
    t.offdiag[p - 2] = a(p - 1, p - 2);
  }
  t.diag[p - 1] = a(p - 1, p - 1);
  t.offdiag[p - 1] = 0.0;
  return t;
}

// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL,
// returned in unspecified order.
inline std::vector<double> tridiagonal_eigenvalues(Tridiagonal t) {
  auto& d = t.diag;
  auto& e = t.offdiag;
  const std::size_t n = d.size();
  constexpr int kMaxSweeps = 60;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Absolute floor so that clusters of near-zero diagonals still deflate.
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(d[i]) + std::abs(e[i]));
  const double floor = eps * norm;

  for (std::size_t l = 0; l < n; ++l) {
    int sweeps = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= floor) break;
      }
      if (m == l) break;
      if (++sweeps > kMaxSweeps) {
        std::ostringstream msg;
        msg << "tridiagonal_eigenvalues: QL failed to converge for eigenvalue " << l << " after "
            << kMaxSweeps << " sweeps";
        throw ConvergenceError(msg.str());
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double shift = 0.0;
      bool deflated = false;
      for (std::size_t ii = m; ii-- > l;) {
        const double f = s * e[ii];
        const double b = c * e[ii];
        r = std::hypot(f, g);
        e[ii + 1] = r;
        if (r == 0.0) {
          d[ii + 1] -= shift;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[ii + 1] - shift;
        r = (d[ii] - g) * s + 2.0 * c * b;
        shift = s * r;
        d[ii + 1] = g + shift;
        g = c * r - b;
      }
      if (deflated) continue;
      d[l] -= shift;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
  return d;
}

/// All eigenvalues of a symmetric matrix, nonincreasing. No sign handling.
inline std::vector<double> symmetric_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("symmetric_eigenvalues: matrix is not square");
  if (!is_symmetric(a)) {
    throw DomainError("symmetric_eigenvalues: matrix is not symmetric within 1e-10 relative");
  }
  auto values = tridiagonal_eigenvalues(tridiagonalize(a));
  std::ranges::stable_sort(values, std::greater<>{});
  return values;
}

struct LanczosOptions {
  std::size_t max_steps = 600;
  double rel_tol = 1e-13;
  std::uint64_t start_seed = 0x5eed5eedULL;
};

// Largest eigenvalue of the symmetric PSD operator v -> apply(v) of dimension
// `dim`, by Lanczos with full reorthogonalisation. Stops once the top Ritz
// value changes by less than rel_tol (relative) over three successive steps,
// or when the Krylov space is exhausted.
template <typename Apply>
double lanczos_top_eigenvalue(std::size_t dim, Apply&& apply, const LanczosOptions& opts = {}) {
  if (dim == 0) throw DomainError("lanczos_top_eigenvalue: empty operator");
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;

  std::vector<double> q(dim);
  SplitMix64 rng(opts.start_seed);
  for (std::size_t i = 0; i + 1 < dim; i += 2) rng.normal_pair(q[i], q[i + 1]);
  if (dim % 2 == 1) {
    double spare = 0.0;
    rng.normal_pair(q[dim - 1], spare);
  }
  const double qn = std::sqrt(detail::dot(q, q));
  for (auto& x : q) x /= qn;

  std::vector<double> w(dim);
  double previous = -std::numeric_limits<double>::infinity();
  int stable = 0;
  double theta = 0.0;
  const std::size_t steps = std::min(opts.max_steps, dim);
  for (std::size_t j = 0; j < steps; ++j) {
    basis.push_back(q);
    apply(std::span<const double>(q), std::span<double>(w));
    const double a = detail::dot(w, q);
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double h = detail::dot(w, b);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= h * b[i];
      }
    }
    const double bnorm = std::sqrt(detail::dot(w, w));

    Tridiagonal t;
    t.diag = alpha;
    t.offdiag = beta;
    t.offdiag.push_back(0.0);
    const auto ritz = tridiagonal_eigenvalues(std::move(t));
    theta = *std::ranges::max_element(ritz);

    if (std::abs(theta - previous) <= opts.rel_tol * std::abs(theta)) {
      if (++stable >= 3) return theta;
    } else {
      stable = 0;
    }
    previous = theta;
    if (bnorm <= 1e-14 * std::max(std::abs(theta), 1e-300)) return theta;
    beta.push_back(bnorm);
    for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / bnorm;
  }
  return theta;
}

}  // namespace spikes
