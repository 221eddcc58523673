#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dnls/classifier.hpp"
#include "dnls/errors.hpp"

using namespace dnls;

namespace {

RealCubicPoly poly(double c0, double c1 = 0.0, double c2 = 0.0, double c3 = 0.0) {
  return RealCubicPoly{{c0, c1, c2, c3}};
}

double gridMin(const RealCubicPoly& p, double lo, double hi, int count) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k)
    best = std::min(best, p(lo + (hi - lo) * k / (count - 1)));
  return best;
}

}  // namespace

TEST_CASE("dissipation polynomial from nu drops the real part") {
  NuPolynomial nu(std::array<Complex, 4>{Complex{3.0, -1.0}, Complex{0.0, 0.5},
                                         Complex{9.0, -2.0}, Complex{-4.0, 0.0}});
  const auto p = RealCubicPoly::fromNu(nu).c;
  CHECK(p == std::array<double, 4>{1.0, -0.5, 2.0, 0.0});
}

TEST_CASE("condition check: nonnegativity on the line") {
  CHECK(checkConditionA(poly(0.0)));
  CHECK(checkConditionA(poly(0.0, 0.0, 1.0)));             // xi^2
  CHECK(checkConditionA(poly(1.0, 0.0, 1.0)));             // 1 + xi^2
  CHECK(checkConditionA(poly(1.0)));                       // constant
  CHECK(checkConditionA(poly(4.0, -4.0, 1.0)));            // (xi-2)^2
  CHECK_FALSE(checkConditionA(poly(-1.0)));
  CHECK_FALSE(checkConditionA(poly(0.0, 1.0)));            // odd
  CHECK_FALSE(checkConditionA(poly(0.0, 0.0, 0.0, 1.0)));  // cubic
  CHECK_FALSE(checkConditionA(poly(0.0, 0.0, -1.0)));
  CHECK_FALSE(checkConditionA(poly(-0.01, 0.0, 1.0)));     // dips below zero
}

TEST_CASE("classification certificates on the frozen suite") {
  SUBCASE("double root at the origin") {
    const auto cls = classify(poly(0.0, 0.0, 1.0));
    CHECK(cls.trichotomy == Trichotomy::DoubleRoot);
    CHECK(cls.c0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cls.xi0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cls.admissibleThetaSup() == 0.5);
    CHECK_FALSE(cls.aPlusPlusConstant.has_value());
  }
  SUBCASE("strictly positive with quadratic growth") {
    const auto cls = classify(poly(1.0, 0.0, 1.0));
    CHECK(cls.trichotomy == Trichotomy::StrictlyPositiveInf);
    CHECK(cls.infP == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(cls.aPlusPlusConstant.has_value());
    CHECK(*cls.aPlusPlusConstant == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cls.admissibleThetaSup() == 0.75);
  }
  SUBCASE("identically zero") {
    const auto cls = classify(poly(0.0));
    CHECK(cls.trichotomy == Trichotomy::IdenticallyZero);
    CHECK_FALSE(cls.admissibleThetaSup().has_value());
  }
  SUBCASE("positive constant has no quadratic-growth certificate") {
    const auto cls = classify(poly(1.0));
    CHECK(cls.trichotomy == Trichotomy::StrictlyPositiveInf);
    CHECK(cls.infP == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(cls.aPlusPlusConstant.has_value());
  }
  SUBCASE("shifted double root") {
    const auto cls = classify(poly(4.0, -4.0, 1.0));
    CHECK(cls.trichotomy == Trichotomy::DoubleRoot);
    CHECK(cls.c0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cls.xi0 == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("growth certificate below both coefficients") {
    const auto cls = classify(poly(2.0, 0.0, 3.0));
    REQUIRE(cls.aPlusPlusConstant.has_value());
    CHECK(*cls.aPlusPlusConstant == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("classification failure carries a witness") {
  CHECK_THROWS_AS(classify(poly(-1.0)), ValidationError);
  try {
    classify(poly(0.01, -1.0, 1.0)); // vertex value 0.01 - 0.25 < 0
    CHECK(false);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0.5") != std::string::npos); // witness xi = 0.5
  }
}

TEST_CASE("random certificates re-validate") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.0, 2.0);
  int doubleRoots = 0, positives = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    // (a xi + b)^2 + c with c >= 0 always satisfies the condition
    const double a = U(rng), b = U(rng);
    const double c = (trial % 3 == 0) ? 0.0 : pos(rng);
    RealCubicPoly p{{b * b + c, 2.0 * a * b, a * a, 0.0}};
    if (!checkConditionA(p)) continue;
    const auto cls = classify(p);
    const double scale =
        std::max({std::abs(p.c[0]), std::abs(p.c[1]), std::abs(p.c[2]), 1.0});
    if (cls.trichotomy == Trichotomy::DoubleRoot) {
      ++doubleRoots;
      // subtracting the certified square must annihilate the polynomial
      CHECK(std::abs(p.c[2] - cls.c0) <= 1e-12 * scale);
      CHECK(std::abs(p.c[1] + 2.0 * cls.c0 * cls.xi0) <= 1e-11 * scale);
      CHECK(std::abs(p.c[0] - cls.c0 * cls.xi0 * cls.xi0) <= 1e-11 * scale);
    } else if (cls.trichotomy == Trichotomy::StrictlyPositiveInf) {
      ++positives;
      CHECK(gridMin(p, -1e4, 1e4, 2001) >= cls.infP - 1e-9);
      if (cls.aPlusPlusConstant) {
        const double lam = *cls.aPlusPlusConstant;
        CHECK(lam > 0.0);
        for (double xi : {-50.0, -1.0, 0.0, 0.3, 2.0, 50.0})
          CHECK(p(xi) >= lam * (1.0 + xi * xi) - 1e-9 * scale);
      }
    } else {
      CHECK((p.c[0] == 0.0 && p.c[1] == 0.0 && p.c[2] == 0.0));
    }
  }
  CHECK(doubleRoots > 100);
  CHECK(positives > 100);
}

TEST_CASE("integral closed forms") {
  // p = 1, theta = 0: integral of <xi>^-4 over the line
  const auto r0 = integralITheta(poly(1.0), 0.0);
  REQUIRE_FALSE(r0.divergent);
  CHECK(r0.value == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-8));
  // p = 1 + xi^2, theta = 1/2: integral of <xi>^-3
  const auto r1 = integralITheta(poly(1.0, 0.0, 1.0), 0.5);
  REQUIRE_FALSE(r1.divergent);
  CHECK(r1.value == doctest::Approx(2.0).epsilon(1e-8));
  // p = xi^2, theta = 0 also integrates <xi>^-4
  const auto r2 = integralITheta(poly(0.0, 0.0, 1.0), 0.0);
  REQUIRE_FALSE(r2.divergent);
  CHECK(r2.value == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-8));
}

TEST_CASE("integral divergence thresholds") {
  const auto dbl = poly(0.0, 0.0, 1.0);
  for (double theta : {0.5, 0.6, 0.75, 0.9})
    CHECK(integralITheta(dbl, theta).divergent);
  for (double theta : {0.0, 0.25, 0.49})
    CHECK_FALSE(integralITheta(dbl, theta).divergent);

  const auto inf = poly(1.0, 0.0, 1.0);
  for (double theta : {0.75, 0.8, 0.9})
    CHECK(integralITheta(inf, theta).divergent);
  for (double theta : {0.0, 0.5, 0.74})
    CHECK_FALSE(integralITheta(inf, theta).divergent);

  CHECK_THROWS_AS(integralITheta(poly(0.0), 0.25), ValidationError);
  CHECK_THROWS_AS(integralITheta(inf, 1.0), ValidationError);
  CHECK_THROWS_AS(integralITheta(inf, -0.1), ValidationError);
}

TEST_CASE("integral grows with theta when p has quadratic growth") {
  // integrand (<xi>^4/p)^theta <xi>^-4 with <xi>^4/p = <xi>^2 >= 1
  const auto p = poly(1.0, 0.0, 1.0);
  double prev = 0.0;
  for (double theta : {0.0, 0.2, 0.4, 0.6, 0.74}) {
    const auto r = integralITheta(p, theta);
    REQUIRE_FALSE(r.divergent);
    CHECK(r.value > prev);
    prev = r.value;
  }
}

TEST_CASE("integral values are positive and finite off the thresholds") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = pos(rng), b = pos(rng);
    const auto cls = classify(poly(b, 0.0, a));
    REQUIRE(cls.trichotomy == Trichotomy::StrictlyPositiveInf);
    for (double theta : {0.1, 0.45, 0.7}) {
      const auto r = integralITheta(poly(b, 0.0, a), theta);
      REQUIRE_FALSE(r.divergent);
      CHECK(r.value > 0.0);
      CHECK(std::isfinite(r.value));
    }
  }
}

TEST_CASE("lifespan bound scale") {
  // nu = -i: Im nu = -1, no growth anywhere, bound infinite
  NuPolynomial damping(std::array<Complex, 4>{Complex{0.0, -1.0}, {}, {}, {}});
  std::vector<double> xi{-1.0, 0.0, 1.0};
  std::vector<double> psiSq{1.0, 4.0, 1.0};
  CHECK(std::isinf(lifespanBound(xi, psiSq, damping)));

  // nu = +i xi^2: Im nu = xi^2, sup over grid is 4 * 1 = 4
  NuPolynomial growth(
      std::array<Complex, 4>{Complex{}, Complex{}, Complex{0.0, 1.0}, Complex{}});
  std::vector<double> psiSq2{4.0, 1.0, 4.0};
  CHECK(lifespanBound(xi, psiSq2, growth) == doctest::Approx(1.0 / 8.0));

  // doubling |psi|^2 halves a finite bound exactly
  std::vector<double> doubled{8.0, 2.0, 8.0};
  CHECK(lifespanBound(xi, doubled, growth) ==
        doctest::Approx(0.5 * lifespanBound(xi, psiSq2, growth)).epsilon(1e-15));
}

TEST_CASE("classification json layout") {
  const auto j = classify(poly(1.0, 0.0, 1.0)).toJson();
  CHECK(j["cond_a"] == true);
  CHECK(j["trichotomy"] == "strictly-positive-inf");
  CHECK(j["inf_p"] == 1.0);
  CHECK(j["a_plus_plus_constant"] == 1.0);
  CHECK(j["admissible_theta_sup"] == 0.75);
}
