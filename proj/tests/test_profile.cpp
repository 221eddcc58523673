#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dnls/errors.hpp"
#include "dnls/profile.hpp"

using namespace dnls;

namespace {

NuPolynomial nuFromCoeffs(Complex c0, Complex c1 = {}, Complex c2 = {},
                          Complex c3 = {}) {
  return NuPolynomial(std::array<Complex, 4>{c0, c1, c2, c3});
}

// Exact per-node solution of d(beta)/d(tau) = -i nu |beta|^2 beta for
// nu = nuRe + i nuIm with p = -nuIm >= 0: the squared modulus follows
// m0 / (1 + 2 p m0 dTau) and the phase integrates -nuRe m(s).
Complex nodeOracle(Complex beta0, Complex nu, double dTau) {
  const double m0 = std::norm(beta0);
  const double p = -nu.imag();
  const double grow = 2.0 * p * m0 * dTau;
  const double m = m0 / (1.0 + grow);
  const double phase = (p > 0.0) ? -nu.real() * std::log1p(grow) / (2.0 * p)
                                 : -nu.real() * m0 * dTau;
  return beta0 * std::sqrt(m / (m0 > 0.0 ? m0 : 1.0)) *
         Complex{std::cos(phase), std::sin(phase)};
}

}  // namespace

TEST_CASE("frequency grid basics") {
  const auto g = FrequencyGrid::symmetric(20.0, 4097);
  CHECK(g.xiMin == -20.0);
  CHECK(g.xiMax == 20.0);
  CHECK(g.count == 4097);
  CHECK(g.xi(0) == -20.0);
  CHECK(g.xi(4096) == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(g.spacing() == doctest::Approx(40.0 / 4096).epsilon(1e-15));
  CHECK_THROWS_AS(FrequencyGrid::symmetric(0.0, 64), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid::symmetric(-2.0, 64), ValidationError);
  CHECK_THROWS_AS((FrequencyGrid{0.0, 1.0, 1}).validate(), ValidationError);
}

TEST_CASE("envelope data saturates the recorded bound") {
  const auto g = FrequencyGrid::symmetric(20.0, 513);
  SUBCASE("inverse square") {
    const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.3, 2.0);
    CHECK(init.envelopeA == doctest::Approx(0.3).epsilon(1e-14));
    for (int k = 0; k < g.count; ++k) {
      const double xi = g.xi(k);
      CHECK(std::abs(init.alpha0[k]) ==
            doctest::Approx(0.3 / (1.0 + xi * xi)).epsilon(1e-14));
    }
  }
  SUBCASE("gaussian") {
    const auto init =
        InitialProfile::envelope(g, EnvelopeKind::Gaussian, 0.3, 2.0, 2.0);
    double attained = 0.0;
    for (int k = 0; k < g.count; ++k) {
      const double xi = g.xi(k);
      const double scaled = std::abs(init.alpha0[k]) * (1.0 + xi * xi);
      CHECK(scaled <= init.envelopeA * (1.0 + 1e-14));
      attained = std::max(attained, scaled);
    }
    CHECK(attained == doctest::Approx(init.envelopeA).epsilon(1e-12));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(InitialProfile::envelope(g, EnvelopeKind::InverseSquare, -0.1, 2.0),
                    ValidationError);
    CHECK_THROWS_AS(InitialProfile::envelope(g, EnvelopeKind::Gaussian, 0.1, 2.0, 0.0),
                    ValidationError);
    CHECK_THROWS_AS(InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.1, 0.0),
                    ValidationError);
    CHECK_THROWS_AS(InitialProfile::fromSamples(g, std::vector<Complex>(5), 2.0),
                    ValidationError);
    std::vector<Complex> bad(g.count, Complex{0.0, 0.0});
    bad[7] = Complex{std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(InitialProfile::fromSamples(g, bad, 2.0), ValidationError);
  }
}

TEST_CASE("closed form squared modulus") {
  CHECK(closedFormModulusSq(1.0, 1.0, 5.0, 5.0 * std::numbers::e) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(closedFormModulusSqLogT(1.0, 1.0, 1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(closedFormModulusSqLogT(0.7, 0.0, 50.0) == 0.7);
  CHECK(closedFormModulusSqLogT(0.0, 3.0, 50.0) == 0.0);
  CHECK_THROWS_AS(closedFormModulusSq(1.0, 1.0, 5.0, 4.0), ValidationError);
  CHECK_THROWS_AS(closedFormModulusSqLogT(-1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(closedFormModulusSqLogT(1.0, -1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(closedFormModulusSqLogT(1.0, 1.0, -1.0), ValidationError);
}

TEST_CASE("rk4 matches the per-node closed form") {
  const auto g = FrequencyGrid::symmetric(10.0, 257);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.5, 2.0);
  // nu = -i xi^2 + xi^3: dissipation xi^2 plus a real rotating part
  const auto nu = nuFromCoeffs({}, {}, Complex{0.0, -1.0}, Complex{1.0, 0.0});
  const double logTEnd = std::log(2.0) + 3.0 * std::numbers::ln10;
  const auto state = integrateProfileLogT(init, nu, logTEnd, 512);
  CHECK(state.logT == logTEnd);
  double maxDiff = 0.0;
  for (int k = 0; k < g.count; ++k) {
    const Complex exact =
        nodeOracle(init.alpha0[k], nu(g.xi(k)), logTEnd - std::log(2.0));
    maxDiff = std::max(maxDiff, std::abs(state.beta[k] - exact));
  }
  CHECK(maxDiff <= 1e-12);
}

TEST_CASE("vanishing dissipation conserves every modulus over twelve decades") {
  const auto g = FrequencyGrid::symmetric(20.0, 129);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 1.0, 2.0);
  const auto nu = nuFromCoeffs(Complex{1.0, 0.0});
  const double logTEnd = std::log(2.0) + 12.0 * std::numbers::ln10;
  const auto state = integrateProfileLogT(init, nu, logTEnd, 512);
  double maxRel = 0.0;
  for (int k = 0; k < g.count; ++k) {
    const double m0 = std::norm(init.alpha0[k]);
    maxRel = std::max(maxRel, std::abs(std::norm(state.beta[k]) - m0) / m0);
  }
  CHECK(maxRel <= 1e-10);
}

TEST_CASE("resuming mid-integration matches the closed form") {
  const auto g = FrequencyGrid::symmetric(5.0, 65);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.9, 2.0);
  const auto nu = nuFromCoeffs(Complex{0.0, -1.0});  // p == 1 everywhere
  const double logT0 = std::log(2.0);
  const double logT1 = logT0 + 2.0;
  const double logT2 = logT0 + 11.0;
  auto mid = integrateProfileLogT(init, nu, logT1, 512);
  const auto state = continueProfileLogT(std::move(mid), nu, logT2, 512);
  CHECK(state.logT == logT2);
  for (int k = 0; k < g.count; ++k) {
    const double exact =
        closedFormModulusSqLogT(std::norm(init.alpha0[k]), 1.0, logT2 - logT0);
    CHECK(std::norm(state.beta[k]) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("time and log-time entry points agree exactly") {
  const auto g = FrequencyGrid::symmetric(5.0, 33);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::Gaussian, 0.4, 2.0);
  const auto nu = nuFromCoeffs(Complex{0.5, -0.25});
  const auto a = integrateProfile(init, nu, 1.0e6, 64);
  const auto b = integrateProfileLogT(init, nu, std::log(1.0e6), 64);
  CHECK(a.logT == b.logT);
  CHECK(a.beta == b.beta);
}

TEST_CASE("observer sees a strictly increasing time that lands on the horizon") {
  const auto g = FrequencyGrid::symmetric(2.0, 17);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.2, 2.0);
  const double logTEnd = std::log(2.0) + 1.3;
  std::vector<double> seen;
  integrateProfileLogT(init, nuFromCoeffs(Complex{0.0, -1.0}), logTEnd, 32,
                       [&](const ProfileState& s) { seen.push_back(s.logT); });
  REQUIRE(!seen.empty());
  CHECK(seen.back() == logTEnd);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] > seen[i - 1]);
  const double h = std::numbers::ln10 / 32;
  CHECK(seen.size() == static_cast<std::size_t>(std::ceil(1.3 / h)));
}

TEST_CASE("growth aborts with a numerical error") {
  const auto g = FrequencyGrid::symmetric(2.0, 9);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 2.0, 2.0);
  const auto nu = nuFromCoeffs(Complex{0.0, 1.0});  // anti-dissipative
  CHECK_THROWS_AS(integrateProfileLogT(init, nu, std::log(2.0) + 5.0, 512),
                  NumericalError);
}

TEST_CASE("integration input validation") {
  const auto g = FrequencyGrid::symmetric(2.0, 9);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.1, 2.0);
  const auto nu = nuFromCoeffs(Complex{0.0, -1.0});
  CHECK_THROWS_AS(integrateProfileLogT(init, nu, std::log(2.0) + 1.0, 15),
                  ValidationError);
  CHECK_THROWS_AS(integrateProfileLogT(init, nu, std::log(2.0) - 0.5, 64),
                  ValidationError);
  CHECK_THROWS_AS(integrateProfile(init, nu, -3.0, 64), ValidationError);
  ProfileState mismatched{g, std::log(2.0), std::vector<Complex>(4)};
  CHECK_THROWS_AS(continueProfileLogT(std::move(mismatched), nu, 10.0, 64),
                  ValidationError);
}

TEST_CASE("grid l2 norm against the exact envelope integral") {
  const auto g = FrequencyGrid::symmetric(20.0, 4097);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.25, 2.0);
  const ProfileState state{g, std::log(2.0), init.alpha0};
  const double x = 20.0;
  const double interior = x / (1.0 + x * x) + std::atan(x);
  CHECK(l2Norm(state) == doctest::Approx(0.25 * std::sqrt(interior)).epsilon(1e-8));
}

TEST_CASE("tail bound identity and values") {
  // interior + tail of the envelope mass must recover the whole-line value
  for (double x : {0.5, 1.0, 5.0, 20.0}) {
    const double interior = x / (1.0 + x * x) + std::atan(x);
    CHECK(l2TailBoundSq(1.0, x) + interior ==
          doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-15));
  }
  CHECK(l2TailBoundSq(1.0, 1.0) ==
        doctest::Approx(std::numbers::pi / 4.0 - 0.5).epsilon(1e-14));
  CHECK(l2TailBoundSq(3.0, 1.0) ==
        doctest::Approx(9.0 * (std::numbers::pi / 4.0 - 0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(l2TailBoundSq(1.0, 0.0), ValidationError);
}

TEST_CASE("asymptotic profile freezes when dissipation vanishes") {
  const auto g = FrequencyGrid::symmetric(8.0, 129);
  const auto init = InitialProfile::envelope(g, EnvelopeKind::InverseSquare, 0.5, 2.0);
  const auto nu = nuFromCoeffs(Complex{2.5, 0.0}, {}, Complex{-0.5, 0.0});
  const auto s1 = integrateProfileLogT(init, nu, std::log(2.0) + 2.0, 512);
  const auto s2 = integrateProfileLogT(init, nu, std::log(2.0) + 9.0, 512);
  const auto a1 = asymptoticProfile(s1, nu);
  const auto a2 = asymptoticProfile(s2, nu);
  double maxDiff = 0.0;
  for (int k = 0; k < g.count; ++k) {
    maxDiff = std::max(maxDiff, std::abs(a1[k] - a2[k]));
    CHECK(std::abs(a1[k]) ==
          doctest::Approx(std::abs(init.alpha0[k])).epsilon(1e-10));
  }
  CHECK(maxDiff <= 1e-9);
  CHECK_THROWS_AS(asymptoticProfile(s1, nuFromCoeffs(Complex{0.0, -1.0})),
                  ValidationError);
}

TEST_CASE("predicted decay exponent per certificate") {
  CHECK(predictedExponent(classify(RealCubicPoly{{0.0, 0.0, 1.0, 0.0}})) == 0.25);
  CHECK(predictedExponent(classify(RealCubicPoly{{1.0, 0.0, 0.0, 0.0}})) == 0.375);
  CHECK(predictedExponent(classify(RealCubicPoly{{1.0, 0.0, 1.0, 0.0}})) == 0.5);
  CHECK_THROWS_AS(predictedExponent(classify(RealCubicPoly{})), ValidationError);
  DissipationClass noCondA;
  noCondA.condA = false;
  CHECK_THROWS_AS(predictedExponent(noCondA), ValidationError);
}
