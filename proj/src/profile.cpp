#include "dnls/profile.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dnls/errors.hpp"

namespace dnls {

FrequencyGrid FrequencyGrid::symmetric(double halfWidth, int count) {
  FrequencyGrid g{-halfWidth, halfWidth, count};
  g.validate();
  return g;
}

void FrequencyGrid::validate() const {
  if (!(xiMax > xiMin) || count < 2)
    throw ValidationError("frequency grid needs xiMax > xiMin and count >= 2");
}

InitialProfile InitialProfile::envelope(const FrequencyGrid& grid, EnvelopeKind kind,
                                        double eps, double t0, double width) {
  grid.validate();
  if (!(eps >= 0.0)) throw ValidationError("envelope amplitude must be >= 0");
  if (!(width > 0.0)) throw ValidationError("envelope width must be positive");
  std::vector<Complex> a(grid.count);
  for (int k = 0; k < grid.count; ++k) {
    const double xi = grid.xi(k);
    const double mag = kind == EnvelopeKind::InverseSquare
                           ? eps / (1.0 + xi * xi)
                           : eps * std::exp(-(xi / width) * (xi / width));
    a[k] = Complex{mag, 0.0};
  }
  InitialProfile init{grid, std::move(a), t0, 0.0};
  for (int k = 0; k < grid.count; ++k) {
    const double xi = grid.xi(k);
    init.envelopeA = std::max(init.envelopeA, std::abs(init.alpha0[k]) * (1.0 + xi * xi));
  }
  init.validate();
  return init;
}

InitialProfile InitialProfile::fromSamples(const FrequencyGrid& grid,
                                           std::vector<Complex> alpha0, double t0) {
  grid.validate();
  if (static_cast<int>(alpha0.size()) != grid.count)
    throw ValidationError("alpha0 sample count does not match the grid");
  InitialProfile init{grid, std::move(alpha0), t0, 0.0};
  for (int k = 0; k < grid.count; ++k) {
    const double xi = grid.xi(k);
    init.envelopeA = std::max(init.envelopeA, std::abs(init.alpha0[k]) * (1.0 + xi * xi));
  }
  init.validate();
  return init;
}

void InitialProfile::validate() const {
  grid.validate();
  if (static_cast<int>(alpha0.size()) != grid.count)
    throw ValidationError("alpha0 sample count does not match the grid");
  if (!(t0 > 0.0)) throw ValidationError("profile start time t0 must be positive");
  for (const Complex& a : alpha0)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw ValidationError("alpha0 contains non-finite samples");
}

double ProfileState::t() const {
  return std::exp(logT);
}

ProfileState continueProfileLogT(
    ProfileState state, const NuPolynomial& nu, double logTEnd,
    int stepsPerDecade, const std::function<void(const ProfileState&)>& observer) {
  state.grid.validate();
  if (static_cast<int>(state.beta.size()) != state.grid.count)
    throw ValidationError("state sample count does not match the grid");
  if (stepsPerDecade < 16)
    throw ValidationError("steps_per_decade must be at least 16");
  if (!(logTEnd >= state.logT))
    throw ValidationError("integration horizon precedes the current time");

  const int n = state.grid.count;
  std::vector<Complex> nuVals(n);
  for (int k = 0; k < n; ++k) nuVals[k] = nu(state.grid.xi(k));

  const double hBase = std::numbers::ln10 / stepsPerDecade;
  auto rhs = [](Complex nuK, Complex b) { return Complex{0.0, -1.0} * nuK * std::norm(b) * b; };

  double tau = state.logT;
  while (tau < logTEnd) {
    const double h = std::min(hBase, logTEnd - tau);
    for (int k = 0; k < n; ++k) {
      const Complex nuK = nuVals[k];
      Complex b = state.beta[k];
      const Complex k1 = rhs(nuK, b);
      const Complex k2 = rhs(nuK, b + 0.5 * h * k1);
      const Complex k3 = rhs(nuK, b + 0.5 * h * k2);
      const Complex k4 = rhs(nuK, b + h * k3);
      b += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(b.real()) || !std::isfinite(b.imag()))
        throw NumericalError("profile integration diverged at xi = " +
                             std::to_string(state.grid.xi(k)));
      state.beta[k] = b;
    }
    tau = (logTEnd - tau <= hBase) ? logTEnd : tau + h;
    state.logT = tau;
    if (observer) observer(state);
  }
  return state;
}

ProfileState integrateProfileLogT(
    const InitialProfile& init, const NuPolynomial& nu, double logTEnd,
    int stepsPerDecade, const std::function<void(const ProfileState&)>& observer) {
  init.validate();
  ProfileState state{init.grid, std::log(init.t0), init.alpha0};
  return continueProfileLogT(std::move(state), nu, logTEnd, stepsPerDecade,
                             observer);
}

ProfileState integrateProfile(const InitialProfile& init, const NuPolynomial& nu,
                              double tEnd, int stepsPerDecade) {
  if (!(tEnd > 0.0)) throw ValidationError("t_end must be positive");
  return integrateProfileLogT(init, nu, std::log(tEnd), stepsPerDecade);
}

double closedFormModulusSq(double m0, double p, double t0, double t) {
  if (!(t0 > 0.0) || !(t >= t0)) throw ValidationError("need t >= t0 > 0");
  return closedFormModulusSqLogT(m0, p, std::log(t / t0));
}

double closedFormModulusSqLogT(double m0, double p, double dLogT) {
  if (!(m0 >= 0.0)) throw ValidationError("m0 must be non-negative");
  if (!(p >= 0.0)) throw ValidationError("dissipation value p must be non-negative");
  if (!(dLogT >= 0.0)) throw ValidationError("dLogT must be non-negative");
  return m0 / (1.0 + 2.0 * p * m0 * dLogT);
}

double l2Norm(const ProfileState& state) {
  const int n = state.grid.count;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    sum += w * std::norm(state.beta[k]);
  }
  return std::sqrt(sum * state.grid.spacing());
}

double l2TailBoundSq(double envelopeA, double xiLimit) {
  if (!(xiLimit > 0.0)) throw ValidationError("xiLimit must be positive");
  const double x = xiLimit;
  const double tailOneSide =
      std::numbers::pi / 4.0 - x / (2.0 * (1.0 + x * x)) - std::atan(x) / 2.0;
  return 2.0 * envelopeA * envelopeA * tailOneSide;
}

std::vector<Complex> asymptoticProfile(const ProfileState& state,
                                       const NuPolynomial& nu) {
  double scale = 0.0;
  for (const Complex& c : nu.coeffs()) scale = std::max(scale, std::abs(c));
  for (const Complex& c : nu.coeffs())
    if (std::abs(c.imag()) > 1e-12 * scale)
      throw ValidationError(
          "asymptotic profile requires vanishing dissipation (Im nu == 0)");

  const int n = state.grid.count;
  std::vector<Complex> out(n);
  for (int k = 0; k < n; ++k) {
    const double phase =
        std::norm(state.beta[k]) * nu(state.grid.xi(k)).real() * state.logT;
    out[k] = state.beta[k] * Complex{std::cos(phase), std::sin(phase)};
  }
  return out;
}

double predictedExponent(const DissipationClass& cls) {
  if (!cls.condA)
    throw ValidationError("no decay prediction without condition (A)");
  switch (cls.trichotomy) {
    case Trichotomy::IdenticallyZero:
      throw ValidationError("no L2 decay predicted when p == 0");
    case Trichotomy::DoubleRoot:
      return 0.25;
    default:
      return cls.aPlusPlusConstant ? 0.5 : 0.375;
  }
}

}  // namespace dnls
