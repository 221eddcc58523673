#ifndef DNLS_CLASSIFIER_HPP
#define DNLS_CLASSIFIER_HPP

#include <array>
#include <optional>
#include <span>

#include "dnls/nonlinearity.hpp"

namespace dnls {

/// p(xi) = c[0] + c[1] xi + c[2] xi^2 + c[3] xi^3 with real coefficients.
struct RealCubicPoly {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  double operator()(double xi) const {
    return ((c[3] * xi + c[2]) * xi + c[1]) * xi + c[0];
  }
  static RealCubicPoly fromNu(const NuPolynomial& nu) {
    return RealCubicPoly{nu.dissipationCoeffs()};
  }
};

/// Structure of a nonnegative dissipation polynomial:
///   IdenticallyZero     p == 0
///   StrictlyPositiveInf inf p > 0
///   DoubleRoot          p = c0 (xi - xi0)^2
enum class Trichotomy { IdenticallyZero, StrictlyPositiveInf, DoubleRoot };

const char* trichotomyName(Trichotomy t);

struct DissipationClass {
  bool condA = false;
  Trichotomy trichotomy = Trichotomy::IdenticallyZero;
  double c0 = 0.0;   // DoubleRoot: leading coefficient
  double xi0 = 0.0;  // DoubleRoot: root location
  double infP = 0.0; // StrictlyPositiveInf: infimum of p
  /// Largest C with p(xi) >= C (1 + xi^2) for all xi, when positive.
  std::optional<double> aPlusPlusConstant;

  /// Supremum of theta for which integral_I_theta is admissible: 1/2 for
  /// DoubleRoot, 3/4 for StrictlyPositiveInf, none when p == 0.
  std::optional<double> admissibleThetaSup() const;

  nlohmann::json toJson() const;
};

/// True when p(xi) >= 0 for every real xi.  Exact for degree <= 3 once
/// coefficients below relTol * max|c_k| are snapped to zero: requires c3 = 0
/// and either (c2 > 0 and c1^2 - 4 c0 c2 <= 0) or (c2 = c1 = 0 and c0 >= 0).
bool checkConditionA(const RealCubicPoly& p, double relTol = 1e-12);

/// Certificates for a condition-(A) polynomial.  Throws ValidationError with
/// a witness xi where p(xi) < 0 when (A) fails.
DissipationClass classify(const RealCubicPoly& p, double relTol = 1e-12);

struct IThetaResult {
  bool divergent = false;
  double value = 0.0;  // meaningful only when !divergent
};

/// I_theta = integral over R of dxi / (p(xi)^theta <xi>^(4-4theta)).
/// Divergence is decided from the classification: theta >= 1/2 for
/// DoubleRoot, theta >= 3/4 for StrictlyPositiveInf.  Finite values are
/// computed to absTol; the |xi-xi0|^(-2theta) singularity is removed by the
/// substitution xi = xi0 + s|s| and the tails by xi = center +- 1/v.
/// Requires 0 <= theta < 1 and trichotomy != IdenticallyZero.
IThetaResult integralITheta(const RealCubicPoly& p, double theta,
                            double absTol = 1e-8, double relTol = 1e-12);

/// Lifespan lower-bound scale 1 / (2 sup |psiHat|^2 Im nu) over the sampled
/// grid; +infinity when the supremum is <= 0 (convention 1/0 = +inf).
double lifespanBound(std::span<const double> xi, std::span<const double> psiHatSq,
                     const NuPolynomial& nu);

}  // namespace dnls

#endif
