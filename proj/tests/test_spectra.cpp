#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "spikes/linalg.hpp"
#include "spikes/rng.hpp"
#include "spikes/spectra.hpp"

using namespace spikes;

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  SplitMix64 a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  SplitMix64 u(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(SpikedPopulation, Validation) {
  EXPECT_THROW(SpikedPopulation(5, {}), DomainError);
  EXPECT_THROW(SpikedPopulation(2, {3.0, 2.0}), DomainError);
  EXPECT_THROW(SpikedPopulation(5, {1.0}), DomainError);
  EXPECT_THROW(SpikedPopulation(5, {2.0, 3.0}), DomainError);
  const SpikedPopulation pop(5, {3.0, 2.0});
  EXPECT_EQ(pop.k(), 2u);
  EXPECT_DOUBLE_EQ(pop.snr(), 1.0);
  EXPECT_DOUBLE_EQ(pop.variance(0), 3.0);
  EXPECT_DOUBLE_EQ(pop.variance(4), 1.0);
}

TEST(SamplePopulation, ColumnVarianceByLawOfLargeNumbers) {
  const SpikedPopulation pop(2, {4.0});
  const auto x = sample_population(pop, 100000, NoiseKind::gaussian, 11);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < x.n(); ++i) {
    s0 += x.values(i, 0) * x.values(i, 0);
    s1 += x.values(i, 1) * x.values(i, 1);
  }
  EXPECT_NEAR(s0 / x.n(), 4.0, 0.2);
  EXPECT_NEAR(s1 / x.n(), 1.0, 0.05);
}

TEST(SamplePopulation, DeterministicInSeed) {
  const SpikedPopulation pop(6, {5.0, 2.0});
  EXPECT_EQ(sample_population(pop, 40, NoiseKind::gaussian, 99).values,
            sample_population(pop, 40, NoiseKind::gaussian, 99).values);
  EXPECT_NE(sample_population(pop, 40, NoiseKind::gaussian, 99).values,
            sample_population(pop, 40, NoiseKind::gaussian, 100).values);
}

TEST(SampleNoise, RademacherSupport) {
  const auto z = sample_noise(50, 7, NoiseKind::rademacher, 5);
  for (double v : z.values.data()) EXPECT_TRUE(v == 1.0 || v == -1.0);
}

TEST(SampleNoise, UniformIsStandardized) {
  const auto z = sample_noise(2000, 20, NoiseKind::uniform, 5);
  double sum = 0.0, sq = 0.0;
  for (double v : z.values.data()) {
    EXPECT_LE(std::abs(v), std::sqrt(3.0));
    sum += v;
    sq += v * v;
  }
  const double m = static_cast<double>(z.values.data().size());
  EXPECT_NEAR(sum / m, 0.0, 0.02);
  EXPECT_NEAR(sq / m, 1.0, 0.02);
}

TEST(SampleNoise, GaussianMoments) {
  const auto z = sample_noise(2000, 21, NoiseKind::gaussian, 8);
  double sum = 0.0, sq = 0.0, quart = 0.0;
  for (double v : z.values.data()) {
    sum += v;
    sq += v * v;
    quart += v * v * v * v;
  }
  const double m = static_cast<double>(z.values.data().size());
  EXPECT_NEAR(sum / m, 0.0, 0.02);
  EXPECT_NEAR(sq / m, 1.0, 0.02);
  EXPECT_NEAR(quart / m, 3.0, 0.1);
}

TEST(SampleCovariance, Examples) {
  DataMatrix one{Matrix(1, 3, std::vector<double>{1, 0, 0})};
  const auto s1 = sample_covariance(one);
  EXPECT_EQ(s1.matrix, Matrix::diagonal(std::vector<double>{1, 0, 0}));
  EXPECT_EQ(s1.n, 1u);

  DataMatrix two{Matrix(2, 2, std::vector<double>{1, 0, 0, 1})};
  EXPECT_EQ(sample_covariance(two).matrix, Matrix::diagonal(std::vector<double>{0.5, 0.5}));
}

TEST(SampleCovariance, MatchesNaiveOracle) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> z;
  for (int t = 0; t < 50; ++t) {
    Matrix x(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j) x(i, j) = z(gen);
    const auto s = sample_covariance(DataMatrix{x});
    const auto ref = oracle::naive_covariance(x);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t l = 0; l < 3; ++l) EXPECT_NEAR(s.matrix(j, l), ref(j, l), 1e-12);
  }
}

TEST(SampleCovariance, CenteringRemovesMeanAndUsesNMinusOne) {
  Matrix x(3, 2, std::vector<double>{1, 10, 2, 10, 3, 10});
  const auto s = sample_covariance(DataMatrix{x}, Centering::sample);
  EXPECT_EQ(s.n, 2u);
  EXPECT_DOUBLE_EQ(s.matrix(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.matrix(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(s.matrix(0, 1), 0.0);
  EXPECT_THROW(sample_covariance(DataMatrix{Matrix(1, 2)}, Centering::sample), DomainError);
}

TEST(EigvalsSym, Examples) {
  const auto d1 = eigvals_sym({Matrix::diagonal(std::vector<double>{3, 1, 2}), 10});
  EXPECT_EQ(std::vector<double>(d1.eigenvalues().begin(), d1.eigenvalues().end()),
            (std::vector<double>{3, 2, 1}));
  const auto d2 = eigvals_sym({Matrix(2, 2, std::vector<double>{2, 1, 1, 2}), 10});
  EXPECT_NEAR(d2[0], 3.0, 1e-14);
  EXPECT_NEAR(d2[1], 1.0, 1e-14);
  EXPECT_EQ(d2.n(), 10u);
}

TEST(EigvalsSym, RejectsAsymmetricAndIndefinite) {
  EXPECT_THROW(symmetric_eigenvalues(Matrix(2, 2, std::vector<double>{1, 2, 0, 1})), DomainError);
  EXPECT_THROW(eigvals_sym({Matrix(2, 2, std::vector<double>{0, 1, 1, 0}), 3}), ConvergenceError);
}

TEST(EigvalsSym, MatchesCubicOracle) {
  std::mt19937_64 gen(23);
  for (int t = 0; t < 200; ++t) {
    const auto a = oracle::random_symmetric(gen, 3);
    const auto got = symmetric_eigenvalues(a);
    const auto ref = oracle::cubic_eigenvalues(a);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], ref[i], 1e-9);
  }
}

TEST(EigvalsSym, TraceAndFrobeniusPreserved) {
  std::mt19937_64 gen(29);
  for (std::size_t p : {1u, 2u, 5u, 17u, 60u}) {
    const auto a = oracle::random_symmetric(gen, p);
    const auto d = symmetric_eigenvalues(a);
    ASSERT_EQ(d.size(), p);
    double tr = 0.0, fro = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      tr += a(i, i);
      for (std::size_t j = 0; j < p; ++j) fro += a(i, j) * a(i, j);
    }
    for (double v : d) sq += v * v;
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), tr, 1e-10 * p);
    EXPECT_NEAR(sq, fro, 1e-10 * fro);
    EXPECT_TRUE(std::ranges::is_sorted(d, std::greater<>{}));
  }
}

TEST(EigvalsSym, ScaleAndPermutationEquivariance) {
  std::mt19937_64 gen(31);
  const std::size_t p = 12;
  const auto s = oracle::random_psd(gen, p, 30);
  const auto base = eigvals_sym({s, 30});

  Matrix scaled = s;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) scaled(i, j) *= 4.0;
  const auto d4 = eigvals_sym({scaled, 30});

  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  Matrix permuted(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) permuted(i, j) = s(perm[i], perm[j]);
  const auto dp = eigvals_sym({permuted, 30});

  for (std::size_t i = 0; i < p; ++i) {
    EXPECT_NEAR(d4[i], 4.0 * base[i], 1e-11 * base[0]);
    EXPECT_NEAR(dp[i], base[i], 1e-11 * base[0]);
  }
}

TEST(EigvalsSym, RankDeficientWhenWide) {
  // n = 4 < p = 9: exactly five structural zeros.
  const auto x = sample_noise(4, 9, NoiseKind::gaussian, 3);
  const auto d = eigvals_sym(sample_covariance(x));
  EXPECT_EQ(std::ranges::count(d.eigenvalues(), 0.0), 5);
  EXPECT_GT(d[3], 0.0);
}

TEST(EigvalsSym, ManyStructuralZerosConverge) {
  const auto x = sample_noise(100, 300, NoiseKind::gaussian, 12);
  const auto d = eigvals_sym(sample_covariance(x));
  EXPECT_EQ(std::ranges::count(d.eigenvalues(), 0.0), 200);
  EXPECT_GT(d[99], 0.1);
}

TEST(Lanczos, AgreesWithFullSolver) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SpikedPopulation pop(80, {6.0});
    const auto x = sample_population(pop, 150, NoiseKind::gaussian, seed);
    const auto d = eigvals_sym(sample_covariance(x));
    EXPECT_NEAR(top_sample_eigenvalue(x), d[0], 1e-10 * d[0]);
  }
}

TEST(Dbar, Examples) {
  const SampleSpectrum s({3, 2, 1}, 10);
  EXPECT_DOUBLE_EQ(dbar(s, 0), 2.0);
  EXPECT_DOUBLE_EQ(dbar(s, 2), 1.0);
  EXPECT_THROW(dbar(s, 3), IndexError);
  EXPECT_DOUBLE_EQ(dbar(SampleSpectrum({5, 1, 1, 1, 0, 0}, 4), 1), 0.6);
}

TEST(SampleSpectrum, Validation) {
  EXPECT_THROW(SampleSpectrum({1, 2}, 3), DomainError);
  EXPECT_THROW(SampleSpectrum({1, -1}, 3), DomainError);
  EXPECT_THROW(SampleSpectrum({}, 3), DomainError);
  EXPECT_THROW(SampleSpectrum({1}, 0), DomainError);
}

TEST(SnrFixedP, Examples) {
  EXPECT_EQ(snr_fixed_p(0.0, 12, 3, 100), 0.0);
  // 3 (11 log log 100 / 100)^{1/2}, from a 30-digit evaluation.
  EXPECT_NEAR(snr_fixed_p(1.5, 12, 3, 100), 1.22959661253185880, 1e-14);
  EXPECT_THROW(snr_fixed_p(1.5, 12, 3, 2), DomainError);
}

TEST(BuildPopulation, Examples) {
  const auto pop = build_population(200, 10, 2.5);
  ASSERT_EQ(pop.k(), 10u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(pop.spikes()[i], 6.0);
  EXPECT_DOUBLE_EQ(pop.spikes()[9], 3.5);
  const auto one = build_population(5, 1, 1.0);
  ASSERT_EQ(one.k(), 1u);
  EXPECT_DOUBLE_EQ(one.spikes()[0], 2.0);
  EXPECT_THROW(build_population(5, 1, -1.0), DomainError);
}

TEST(NoiseKind, RoundTrip) {
  for (auto k : {NoiseKind::gaussian, NoiseKind::rademacher, NoiseKind::uniform}) {
    EXPECT_EQ(parse_noise_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_noise_kind("cauchy"), DomainError);
}
