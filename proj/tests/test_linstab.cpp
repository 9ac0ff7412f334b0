#include <cmath>

#include <gtest/gtest.h>

#include "ptrm/linstab.hpp"

using namespace ptrm;

namespace {

StabilitySpectrum solve(double a, double b, Sigma s, Discretization d, int n = 128, double L = 16.0) {
  return stability_spectrum(build_operators(mode_1d({a, b}, s), Grid1D(L, n), d));
}

}  // namespace

TEST(FourierMatrix, MatchesSpectralDerivative) {
  const Grid1D g(10.0, 32);
  const auto d2 = fourier_second_derivative_matrix(g);
  EXPECT_LT((d2 - d2.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::VectorXd f(32);
  for (int j = 0; j < 32; ++j) f(j) = std::cos(std::numbers::pi * g[static_cast<std::size_t>(j)] * 3 / 10.0);
  const Eigen::VectorXd d2f = d2 * f;
  const double k2 = std::pow(3 * std::numbers::pi / 10.0, 2);
  EXPECT_LT((d2f + k2 * f).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Operators, ShapesAndDiagonal) {
  const auto m = mode_1d({0.75, 0.8}, Sigma::focusing);
  const Grid1D g(16.0, 64);
  const auto f = build_operators(m, g, Discretization::fourier);
  EXPECT_EQ(f.l1.rows(), 64);
  EXPECT_EQ(f.nodes.size(), 64u);
  const auto fd = build_operators(m, g, Discretization::fd);
  EXPECT_EQ(fd.l1.rows(), 63);
  EXPECT_EQ(fd.nodes.front(), g[1]);
  // L2 - L1 = 2 sigma |phi|^2 on the diagonal.
  const Eigen::MatrixXcd diff = fd.l2 - fd.l1;
  const auto field = evaluate_mode(m, g);
  for (Eigen::Index i = 0; i < 63; ++i) {
    EXPECT_NEAR(std::abs(diff(i, i) - 2.0 * std::norm(field[static_cast<std::size_t>(i) + 1])), 0.0, 1e-12);
  }
  EXPECT_NEAR(diff.cwiseAbs().sum() - diff.diagonal().cwiseAbs().sum(), 0.0, 1e-12);
}

TEST(Operators, RejectOversizeAndMismatch) {
  const auto m = mode_1d({0.75, 0.8}, Sigma::focusing);
  EXPECT_THROW(build_operators(m, Grid1D(20.0, 4096), Discretization::fd), ValidationError);
  const Field f(10);
  EXPECT_THROW(build_operators(f, m.params, m.sigma, m.lambda, Grid1D(20.0, 64), Discretization::fd),
               ValidationError);
}

// Oracle: with no nonlinearity and no gain/loss the spectrum of the free
// operator on the fd grid is known in closed form, eta = +-i (lambda + 4/h^2 sin^2(k h / 2)).
TEST(StabilitySpectrum, FreeOperatorOracle) {
  const Grid1D g(5.0, 16);
  const Field zero(16);
  const double lambda = 0.3;
  const auto ops = build_operators(zero, {0.0, 0.0}, Sigma::focusing, lambda, g, Discretization::fd);
  const auto s = stability_spectrum(ops);
  EXPECT_EQ(s.classification, Stability::stable);
  EXPECT_LT(std::abs(s.max_growth), 1e-10);
  const int m = 15;
  const double h = g.spacing();
  std::vector<double> expected;
  for (int j = 1; j <= m; ++j) {
    const double mu = lambda + 4.0 / (h * h) * std::pow(std::sin(j * std::numbers::pi / (2.0 * (m + 1))), 2);
    expected.push_back(mu);
    expected.push_back(-mu);
  }
  std::vector<double> got;
  for (const auto& e : s.etas) got.push_back(e.imag());
  std::sort(expected.begin(), expected.end());
  std::sort(got.begin(), got.end());
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-9);
}

TEST(StabilitySpectrum, SortedDescendingReal) {
  const auto s = solve(0.75, 0.8, Sigma::focusing, Discretization::fourier);
  for (std::size_t i = 1; i < s.etas.size(); ++i) {
    EXPECT_GE(s.etas[i - 1].real(), s.etas[i].real());
    if (s.etas[i - 1].real() == s.etas[i].real()) {
      EXPECT_LE(s.etas[i - 1].imag(), s.etas[i].imag());
    }
  }
  EXPECT_EQ(s.max_growth, s.etas.front().real());
}

TEST(StabilitySpectrum, PtModesAreUnstable) {
  for (auto d : {Discretization::fourier, Discretization::fd}) {
    EXPECT_EQ(solve(0.75, 0.8, Sigma::focusing, d).classification, Stability::unstable);
    EXPECT_EQ(solve(0.1, 3.0, Sigma::focusing, d).classification, Stability::unstable);
    EXPECT_EQ(solve(1.0, 0.4, Sigma::defocusing, d).classification, Stability::unstable);
  }
}

TEST(StabilitySpectrum, HermitianReferenceCaseIsStable) {
  // a = 0, b = 0: the plain NLS soliton sech x on a sech^2-free background.
  const auto s = solve(0.0, 0.0, Sigma::focusing, Discretization::fourier);
  EXPECT_EQ(s.classification, Stability::stable);
}

// Property: both pairings hold for every computed spectrum.
TEST(StabilitySpectrum, PairingSymmetries) {
  for (auto [a, b, sg] : {std::tuple{0.75, 0.8, Sigma::focusing}, {0.1, 0.03, Sigma::focusing},
                          {-1.5, 2.0, Sigma::focusing}, {1.0, 0.4, Sigma::defocusing}}) {
    for (auto d : {Discretization::fourier, Discretization::fd}) {
      const auto s = solve(a, b, sg, d);
      EXPECT_LT(pairing_defect(s.etas, SpectrumSymmetry::negation), 1e-6) << a << " " << b;
      EXPECT_LT(pairing_defect(s.etas, SpectrumSymmetry::conjugation), 1e-6) << a << " " << b;
    }
  }
}

TEST(PairingDefect, DetectsBrokenSymmetry) {
  const std::vector<cplx> paired{{1, 2}, {1, -2}, {-1, 2}, {-1, -2}};
  EXPECT_EQ(pairing_defect(paired, SpectrumSymmetry::conjugation), 0.0);
  EXPECT_EQ(pairing_defect(paired, SpectrumSymmetry::negation), 0.0);
  const std::vector<cplx> broken{{1, 2}, {-1, -2}};
  EXPECT_EQ(pairing_defect(broken, SpectrumSymmetry::negation), 0.0);
  EXPECT_GT(pairing_defect(broken, SpectrumSymmetry::conjugation), 0.5);
  EXPECT_EQ(pairing_defect({}, SpectrumSymmetry::negation), 0.0);
}

TEST(MaxGrowth, ThresholdAndValidation) {
  const std::vector<cplx> etas{{1e-7, 0}, {-1e-7, 0}};
  EXPECT_EQ(max_growth_rate(etas, 1e-6).classification, Stability::stable);
  EXPECT_EQ(max_growth_rate(etas, 1e-8).classification, Stability::unstable);
  EXPECT_THROW(max_growth_rate(etas, 0.0), ValidationError);
  EXPECT_THROW(max_growth_rate(etas, -1.0), ValidationError);
  EXPECT_DOUBLE_EQ(default_tolerance(-8.0), 9e-6);
}

TEST(Discretization, Parsing) {
  EXPECT_EQ(discretization_from_string("fd"), Discretization::fd);
  EXPECT_EQ(to_string(Discretization::fourier), "fourier");
  EXPECT_THROW(discretization_from_string("fem"), ValidationError);
}
