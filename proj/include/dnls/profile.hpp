#ifndef DNLS_PROFILE_HPP
#define DNLS_PROFILE_HPP

#include <functional>
#include <vector>

#include "dnls/classifier.hpp"
#include "dnls/nonlinearity.hpp"

namespace dnls {

/// Uniform frequency grid, inclusive of both endpoints.
struct FrequencyGrid {
  double xiMin = -20.0;
  double xiMax = 20.0;
  int count = 4096;

  double spacing() const { return (xiMax - xiMin) / (count - 1); }
  double xi(int k) const { return xiMin + k * spacing(); }

  static FrequencyGrid symmetric(double halfWidth, int count);
  void validate() const;
};

enum class EnvelopeKind { InverseSquare, Gaussian };

/// Data at the start time t0: samples alpha0 on the grid together with the
/// recorded envelope constant A such that |alpha0(xi)| <= A <xi>^-2.
struct InitialProfile {
  FrequencyGrid grid;
  std::vector<Complex> alpha0;
  double t0 = 2.0;
  double envelopeA = 0.0;

  /// alpha0 = eps <xi>^-2 (saturating the envelope) or eps exp(-(xi/width)^2).
  static InitialProfile envelope(const FrequencyGrid& grid, EnvelopeKind kind,
                                 double eps, double t0, double width = 2.0);
  static InitialProfile fromSamples(const FrequencyGrid& grid,
                                    std::vector<Complex> alpha0, double t0);
  void validate() const;
};

struct ProfileState {
  FrequencyGrid grid;
  double logT = 0.0;
  std::vector<Complex> beta;

  /// exp(logT); saturates to +inf past the double range.
  double t() const;
};

/// Integrates d(beta)/d(tau) = -i nu(xi) |beta|^2 beta per node with RK4 in
/// tau = log t, fixed step log(10)/stepsPerDecade (shortened on the final
/// step).  The observer, when set, runs after every accepted step.
/// stepsPerDecade >= 16.  Non-finite values abort with the offending node.
ProfileState integrateProfileLogT(
    const InitialProfile& init, const NuPolynomial& nu, double logTEnd,
    int stepsPerDecade,
    const std::function<void(const ProfileState&)>& observer = {});

/// Same stepping, resuming from an existing state instead of t0 samples.
ProfileState continueProfileLogT(
    ProfileState state, const NuPolynomial& nu, double logTEnd,
    int stepsPerDecade,
    const std::function<void(const ProfileState&)>& observer = {});

/// Same, with the horizon given as a plain time t_end.
ProfileState integrateProfile(const InitialProfile& init, const NuPolynomial& nu,
                              double tEnd, int stepsPerDecade);

/// Squared-modulus solution m0 / (1 + 2 p m0 log(t/t0)) of the profile
/// equation at a node with dissipation value p >= 0.
double closedFormModulusSq(double m0, double p, double t0, double t);
double closedFormModulusSqLogT(double m0, double p, double dLogT);

/// Trapezoid approximation of the L2 norm (integral of |beta|^2 d xi)^(1/2).
double l2Norm(const ProfileState& state);

/// Exact mass of the envelope A <xi>^-2 outside [-xiLimit, xiLimit]:
/// 2 A^2 (pi/4 - x/(2(1+x^2)) - atan(x)/2) at x = xiLimit.  Callers compare
/// it against the squared grid norm.
double l2TailBoundSq(double envelopeA, double xiLimit);

/// alpha_plus(xi) = beta exp(i |beta|^2 Re nu(xi) log t); requires Im nu == 0
/// (no dissipation), otherwise the limit does not freeze.
std::vector<Complex> asymptoticProfile(const ProfileState& state,
                                       const NuPolynomial& nu);

/// Sharp model decay exponent gamma in ||beta||_L2 ~ (eps^2 log t)^-gamma:
/// 1/4 for DoubleRoot, 3/8 for StrictlyPositiveInf, 1/2 when the quadratic
/// lower bound p >= C <xi>^2 holds.  Undefined for identically zero p.
double predictedExponent(const DissipationClass& cls);

}  // namespace dnls

#endif
