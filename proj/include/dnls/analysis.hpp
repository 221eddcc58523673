#ifndef DNLS_ANALYSIS_HPP
#define DNLS_ANALYSIS_HPP

#include <iosfwd>
#include <limits>
#include <vector>

#include <json.hpp>

#include "dnls/classifier.hpp"
#include "dnls/profile.hpp"

namespace dnls {

/// One L2-norm sample.  Times are carried as log t throughout: the decay is
/// logarithmic, so useful horizons (t ~ e^{5e4/eps^2}) overflow a double.
struct DecaySample {
  double logT = 0.0;
  double value = 0.0;
};

struct DecaySeries {
  std::vector<DecaySample> samples;
  double epsilon = 0.0;

  /// log t strictly increasing, first sample at t >= 2, values > 0.
  void validate() const;

  /// Header "log_t,t,value"; t prints as inf once log t > 709.
  void toCsv(std::ostream& out) const;
  /// Accepts the toCsv layout and the simulate-profile layout; uses the
  /// log_t column when present, otherwise log of the t column, and the
  /// first of value / l2_norm for the values.
  static DecaySeries fromCsv(std::istream& in, double epsilon);
};

enum class SeriesEngine { ClosedForm, Rk4 };

struct ProfileSeries {
  std::vector<double> logT;
  std::vector<double> l2;
  std::vector<double> maxModulus;
  double epsilon = 0.0;

  DecaySeries decay() const;
};

/// L2 norm of the profile at log t from the per-node closed-form modulus;
/// exact for the profile equation (the real part of nu only rotates phase).
double closedFormL2Norm(const InitialProfile& init, const NuPolynomial& nu,
                        double logT);

/// Samples (l2 norm, max modulus) log-uniformly in the decay variable log t
/// (samplesPerDecade per decade of log t) from t0 to exp(logTEnd); requires
/// t0 > 1.  The closed-form engine evaluates each sample directly; the RK4
/// engine integrates segment by segment.  Both work at any horizon, closed
/// form is just much cheaper on wide grids and long horizons.
ProfileSeries simulateProfileSeries(const InitialProfile& init,
                                    const NuPolynomial& nu, double epsilon,
                                    double logTEnd, int samplesPerDecade,
                                    SeriesEngine engine,
                                    int stepsPerDecade = 64);

/// Fit window in the scaled variable x = eps^2 log t.
struct FitWindow {
  double startScaled = 5.0;
  double endScaled = std::numeric_limits<double>::infinity();
  double minSpanDecades = 4.0;
  int minSamples = 10;
};

struct FitReport {
  double exponent = 0.0;
  double residual = 0.0;
  double windowLogTLo = 0.0;
  double windowLogTHi = 0.0;
  int sampleCount = 0;

  nlohmann::json toJson() const;
};

/// Least-squares slope of log(value) against log(eps^2 log t) over the
/// window; exponent is the negated slope, residual the RMS misfit.  Throws
/// ValidationError when fewer than minSamples samples land in the window or
/// they span fewer than minSpanDecades decades of log t.
FitReport fitDecayExponent(const DecaySeries& series,
                           const FitWindow& window = {});

/// Hypothesis data for the comparison lemma: dPhi/dt <= -C0 |Phi|^q / t
/// + C1 t^{-s} for t >= 2, with C0 > 0, C1 >= 0, q > 1, s > 1.
struct MatsumuraInstance {
  double c0 = 1.0;
  double c1 = 0.0;
  double q = 2.0;
  double s = 2.0;
  double phi2 = 1.0;

  double qStar() const { return q / (q - 1.0); }
  void validate() const;
};

/// C2 = (1/log 2)((log 2)^{q*} Phi(2) + C1 J) + (q*/(q C0))^{q*-1} with
/// J = integral over (2, inf) of (log tau)^{q*} tau^{-s} d tau, evaluated
/// after tau = e^y as a Gamma-type integral.
double matsumuraC2(const MatsumuraInstance& inst);

/// Right-hand sides guaranteed to satisfy the hypothesis: the equality case
/// scaled by forcingScale in [0, 1] on the source and padded by
/// extraDissipation >= 0 on the sink.
struct MatsumuraOde {
  double forcingScale = 1.0;
  double extraDissipation = 0.0;

  void validate() const;
};

struct MatsumuraVerdict {
  bool pass = false;
  double c2 = 0.0;
  double maxScaled = 0.0;
  double logTAtMax = 0.0;

  nlohmann::json toJson() const;
};

/// Integrates the selected ODE with RK4 in log t (stiffness-limited
/// substeps) and checks Phi(t) (log t)^{q*-1} <= C2 (1 + 1e-9) at every
/// accepted step up to tEnd.
MatsumuraVerdict verifyMatsumura(const MatsumuraInstance& inst,
                                 const MatsumuraOde& ode, double tEnd,
                                 int stepsPerDecade = 64);

/// Exact solution of the equality ODE when C1 = 0:
/// Phi(t) = Phi(2) (1 + (q-1) C0 Phi(2)^{q-1} log(t/2))^{-1/(q-1)}.
double matsumuraEqualityClosedForm(const MatsumuraInstance& inst, double logT);

struct VerdictReport {
  bool pass = false;
  double predicted = 0.0;
  double fitted = 0.0;
  double tolerance = 0.0;
  double residual = 0.0;
  double residualThreshold = 0.0;

  nlohmann::json toJson() const;
};

/// Pass iff the fitted exponent sits within tolerance of the classifier's
/// prediction and the fit residual stays under residualThreshold.
VerdictReport makeVerdict(const DissipationClass& cls, const FitReport& fit,
                          double tolerance = 0.03,
                          double residualThreshold = 0.05);

}  // namespace dnls

#endif
