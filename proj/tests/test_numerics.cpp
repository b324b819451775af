#include <gtest/gtest.h>

#include <cmath>

#include "irsec/errors.hpp"
#include "irsec/numerics.hpp"
#include "irsec/random.hpp"
#include "test_util.hpp"

using namespace irsec;
using irsec::testing::random_hermitian;
using irsec::testing::random_unit;

namespace {

// Lower regularized tail P(m, x) = e^{-x} sum_{k>=m} x^k / k!, summed in log
// space until the terms vanish. Independent of the implementation's series.
double lower_tail(int m, double x) {
  if (x == 0.0) return 0.0;
  double acc = 0.0;
  const double lx = std::log(x);
  for (int k = m; k < m + 600; ++k) acc += std::exp(k * lx - std::lgamma(k + 1.0) - x);
  return acc;
}

}  // namespace

TEST(HermitianEig, DiagonalPicksLargest) {
  const CMat a = CMat::diagonal(std::vector<cplx>{1.0, 3.0, 2.0});
  const EigPair p = hermitian_eig_max(a);
  EXPECT_NEAR(p.value, 3.0, 1e-14);
  EXPECT_NEAR(std::abs(p.vector[1]), 1.0, 1e-14);
  EXPECT_NEAR(p.vector[1].imag(), 0.0, 1e-14);
  EXPECT_GE(p.vector[1].real(), 0.0);
}

TEST(HermitianEig, DegenerateSpectrumUsesSeedDirection) {
  const EigPair p = hermitian_eig_max(CMat::identity(4));
  EXPECT_NEAR(p.value, 1.0, 1e-14);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(p.vector[i] - cplx(0.5)), 0.0, 1e-14);
}

TEST(HermitianEig, PartiallyDegenerateTopSpace) {
  // Top eigenspace span{e0, e1}: seed projection is (1,1,0)/sqrt(2).
  const CMat a = CMat::diagonal(std::vector<cplx>{2.0, 2.0, -5.0});
  const EigPair p = hermitian_eig_max(a);
  EXPECT_NEAR(p.value, 2.0, 1e-14);
  EXPECT_NEAR(p.vector[0].real(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(p.vector[1].real(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(std::abs(p.vector[2]), 0.0, 1e-12);
}

TEST(HermitianEig, RandomResidualAndRayleighDominance) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const CMat a = random_hermitian(rng, n);
    const EigPair p = hermitian_eig_max(a);
    EXPECT_NEAR(p.vector.norm(), 1.0, 1e-12);
    const double residual = (a * p.vector - cplx(p.value) * p.vector).norm();
    EXPECT_LE(residual, 1e-8 * a.frobenius_norm());
    for (int probe = 0; probe < 1000; ++probe) {
      const CVec u = random_unit(rng, n);
      EXPECT_GE(p.value + 1e-9, dot(u, a * u).real());
    }
  }
}

TEST(HermitianEig, PhaseConvention) {
  Rng rng(3);
  const EigPair p = hermitian_eig_max(random_hermitian(rng, 5));
  std::size_t arg = 0;
  for (std::size_t i = 1; i < 5; ++i)
    if (std::abs(p.vector[i]) > std::abs(p.vector[arg])) arg = i;
  EXPECT_EQ(p.vector[arg].imag(), 0.0);
  EXPECT_GT(p.vector[arg].real(), 0.0);
}

TEST(HermitianEig, IndefiniteMatrix) {
  const CMat a{{-3.0, cplx(0.0, 1.0)}, {cplx(0.0, -1.0), -5.0}};
  const auto eig = hermitian_eigenvalues(a);
  const EigPair p = hermitian_eig_max(a);
  // Closed form for 2x2: mean +/- sqrt(diff^2/4 + |b|^2).
  EXPECT_NEAR(p.value, -4.0 + std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(eig[1], -4.0 - std::sqrt(2.0), 1e-13);
}

TEST(HermitianEig, RejectsBadInput) {
  EXPECT_THROW(hermitian_eig_max(CMat(2, 3)), DomainError);
  const CMat skew{{1.0, 2.0}, {0.0, 1.0}};
  EXPECT_THROW(hermitian_eig_max(skew), DomainError);
}

TEST(Cholesky, TrivialCases) {
  EXPECT_EQ(cholesky(CMat::identity(3)), CMat::identity(3));
  const CMat l = cholesky(CMat::diagonal(std::vector<cplx>{4.0, 9.0}));
  EXPECT_EQ(l, CMat::diagonal(std::vector<cplx>{2.0, 3.0}));
}

TEST(Cholesky, ReconstructsWhitenedDenominator) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const CMat h = complex_normal_matrix(rng, 1 + trial % 48, 4);
    const double beta_d = rng.uniform(1e-3, 1.0);
    const double beta_r = rng.uniform(0.0, 1.0);
    CMat a = (beta_r * beta_r) * gram(h);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) += beta_d * beta_d;
    const CMat l = cholesky(a);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = r + 1; c < 4; ++c) EXPECT_EQ(l(r, c), cplx(0.0));
    EXPECT_LE((l * l.adjoint() - a).frobenius_norm(), 1e-10 * a.frobenius_norm());
  }
}

TEST(Cholesky, ReportsFailingPivot) {
  const CMat a = CMat::diagonal(std::vector<cplx>{1.0, 2.0, -1.0});
  try {
    cholesky(a);
    FAIL() << "expected NotPositiveDefiniteError";
  } catch (const NotPositiveDefiniteError& e) {
    EXPECT_EQ(e.pivot(), 2u);
  }
}

TEST(Cholesky, TriangularSolves) {
  Rng rng(9);
  const CMat g = complex_normal_matrix(rng, 6, 4);
  CMat a = gram(g);
  const CMat l = cholesky(a);
  const CVec b = complex_normal_vector(rng, 4);
  EXPECT_LE((l * solve_lower(l, b) - b).norm(), 1e-12 * b.norm());
  EXPECT_LE((l.adjoint() * solve_lower_adjoint(l, b) - b).norm(), 1e-12 * b.norm());
}

TEST(GammaUpper, KnownValues) {
  EXPECT_DOUBLE_EQ(gamma_upper_regularized(2, 0.0), 1.0);
  EXPECT_NEAR(gamma_upper_regularized(1, std::log(2.0)), 0.5, 1e-15);
  // (1 + x) e^{-x} at x = 1.
  EXPECT_NEAR(gamma_upper_regularized(2, 1.0), 0.7357588823428847, 1e-15);
  EXPECT_EQ(gamma_upper_regularized(3, 1e6), 0.0);
}

TEST(GammaUpper, RejectsBadArguments) {
  EXPECT_THROW(gamma_upper_regularized(0, 1.0), DomainError);
  EXPECT_THROW(gamma_upper_regularized(2, -0.1), DomainError);
}

TEST(GammaUpper, MonotoneInArgumentAndOrder) {
  for (int m = 1; m <= 8; ++m) {
    double prev = 2.0;
    for (int i = 0; i <= 200; ++i) {
      const double x = 0.1 * i;
      const double q = gamma_upper_regularized(m, x);
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0);
      EXPECT_LE(q, prev);
      prev = q;
      if (m > 1) EXPECT_GE(q, gamma_upper_regularized(m - 1, x));
    }
  }
}

TEST(GammaUpper, ComplementsLowerTail) {
  for (int m = 1; m <= 8; ++m) {
    for (int i = 0; i <= 100; ++i) {
      const double x = 0.5 * i;
      EXPECT_NEAR(gamma_upper_regularized(m, x) + lower_tail(m, x), 1.0, 1e-12) << m << " " << x;
    }
  }
}

TEST(SpectralNorm, TrivialCases) {
  EXPECT_NEAR(spectral_norm_sq_of_channel(CMat{{2.0, 0.0}, {0.0, 1.0}}), 4.0, 1e-14);
  EXPECT_EQ(spectral_norm_sq_of_channel(CMat(2, 4)), 0.0);
}

TEST(SpectralNorm, MatchesSmallSideClosedForm) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const CMat h = complex_normal_matrix(rng, 2, 4);
    // lambda_max(H^H H) = lambda_max(H H^H); the 2x2 has a closed form.
    const CMat s = h * h.adjoint();
    const double tr = (s(0, 0) + s(1, 1)).real();
    const double det = (s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0)).real();
    const double expected = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    EXPECT_NEAR(spectral_norm_sq_of_channel(h), expected, 1e-10 * expected);
    EXPECT_NEAR(spectral_norm_sq_of_channel(h), hermitian_eig_max(gram(h)).value, 1e-12 * expected);
  }
}

TEST(CMat, RejectsNonFiniteAndBadShape) {
  EXPECT_THROW(CMat(2, 2, std::vector<cplx>(3)), DomainError);
  EXPECT_THROW(CMat(1, 1, std::vector<cplx>{cplx(NAN, 0.0)}), DomainError);
  EXPECT_THROW(CVec(std::vector<cplx>{cplx(0.0, INFINITY)}), DomainError);
}
