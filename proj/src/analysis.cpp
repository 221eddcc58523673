#include "dnls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "dnls/errors.hpp"
#include "dnls/format.hpp"

namespace dnls {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

double parseField(const std::string& field, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size())
      throw ValidationError("trailing characters in numeric field");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError("bad numeric field '" + field + "' on CSV line " +
                          std::to_string(line));
  }
}

}  // namespace

void DecaySeries::validate() const {
  if (samples.empty()) throw ValidationError("decay series is empty");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ValidationError("decay series needs a positive epsilon");
  if (samples.front().logT < kLn2 - 1e-12)
    throw ValidationError("decay series must start at t >= 2");
  double prev = -std::numeric_limits<double>::infinity();
  for (const DecaySample& s : samples) {
    if (!std::isfinite(s.logT) || s.logT <= prev)
      throw ValidationError("decay series log t must be finite and strictly increasing");
    if (!(s.value > 0.0) || !std::isfinite(s.value))
      throw ValidationError("decay series values must be positive and finite");
    prev = s.logT;
  }
}

void DecaySeries::toCsv(std::ostream& out) const {
  out << "log_t,t,value\n";
  for (const DecaySample& s : samples) {
    out << formatDouble(s.logT) << ',' << formatDouble(std::exp(s.logT)) << ','
        << formatDouble(s.value) << '\n';
  }
}

DecaySeries DecaySeries::fromCsv(std::istream& in, double epsilon) {
  std::string line;
  int lineNo = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = splitCsvLine(line);
    break;
  }
  if (header.empty()) throw ValidationError("CSV input has no header row");

  auto col = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int cLogT = col("log_t");
  const int cT = col("t");
  int cValue = col("value");
  if (cValue < 0) cValue = col("l2_norm");
  if (cLogT < 0 && cT < 0)
    throw ValidationError("CSV input needs a log_t or t column");
  if (cValue < 0)
    throw ValidationError("CSV input needs a value or l2_norm column");

  DecaySeries series;
  series.epsilon = epsilon;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = splitCsvLine(line);
    if (fields.size() != header.size())
      throw ValidationError("CSV line " + std::to_string(lineNo) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    DecaySample s;
    s.logT = cLogT >= 0 ? parseField(fields[cLogT], lineNo)
                        : std::log(parseField(fields[cT], lineNo));
    s.value = parseField(fields[cValue], lineNo);
    series.samples.push_back(s);
  }
  series.validate();
  return series;
}

DecaySeries ProfileSeries::decay() const {
  DecaySeries out;
  out.epsilon = epsilon;
  out.samples.reserve(logT.size());
  for (std::size_t j = 0; j < logT.size(); ++j)
    out.samples.push_back({logT[j], l2[j]});
  out.validate();
  return out;
}

namespace {

struct NodeDissipation {
  std::vector<double> m0;
  std::vector<double> p;
};

NodeDissipation nodeDissipation(const InitialProfile& init, const NuPolynomial& nu) {
  NodeDissipation nd;
  const int n = init.grid.count;
  nd.m0.resize(n);
  nd.p.resize(n);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    nd.m0[k] = std::norm(init.alpha0[k]);
    nd.p[k] = -nu.imagAt(init.grid.xi(k));
    worst = std::min(worst, nd.p[k]);
  }
  if (worst < -1e-10)
    throw ValidationError(
        "closed-form modulus requires Im nu <= 0 on the grid (use the RK4 engine)");
  for (double& pk : nd.p) pk = std::max(pk, 0.0);
  return nd;
}

void closedFormRow(const FrequencyGrid& grid, const NodeDissipation& nd,
                   double dLogT, double* l2, double* maxMod) {
  const int n = grid.count;
  double sum = 0.0;
  double mMax = 0.0;
  for (int k = 0; k < n; ++k) {
    const double m = closedFormModulusSqLogT(nd.m0[k], nd.p[k], dLogT);
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    sum += w * m;
    mMax = std::max(mMax, m);
  }
  *l2 = std::sqrt(sum * grid.spacing());
  *maxMod = std::sqrt(mMax);
}

std::vector<double> sampleTimes(double logT0, double logTEnd, int samplesPerDecade) {
  if (samplesPerDecade < 1)
    throw ValidationError("samples_per_decade must be at least 1");
  if (!(logTEnd >= logT0))
    throw ValidationError("series horizon precedes the start time");
  if (!(logT0 > 0.0))
    throw ValidationError("log-uniform sampling of log t needs t0 > 1");
  std::vector<double> taus;
  for (int j = 0;; ++j) {
    const double tau = logT0 * std::pow(10.0, static_cast<double>(j) / samplesPerDecade);
    if (tau >= logTEnd * (1.0 - 1e-12)) break;
    taus.push_back(tau);
  }
  taus.push_back(logTEnd);
  return taus;
}

}  // namespace

double closedFormL2Norm(const InitialProfile& init, const NuPolynomial& nu,
                        double logT) {
  init.validate();
  const double logT0 = std::log(init.t0);
  if (!(logT >= logT0)) throw ValidationError("logT precedes the start time");
  const NodeDissipation nd = nodeDissipation(init, nu);
  double l2 = 0.0, maxMod = 0.0;
  closedFormRow(init.grid, nd, logT - logT0, &l2, &maxMod);
  return l2;
}

ProfileSeries simulateProfileSeries(const InitialProfile& init,
                                    const NuPolynomial& nu, double epsilon,
                                    double logTEnd, int samplesPerDecade,
                                    SeriesEngine engine, int stepsPerDecade) {
  init.validate();
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const double logT0 = std::log(init.t0);
  const std::vector<double> taus = sampleTimes(logT0, logTEnd, samplesPerDecade);

  ProfileSeries series;
  series.epsilon = epsilon;
  series.logT.reserve(taus.size());
  series.l2.reserve(taus.size());
  series.maxModulus.reserve(taus.size());

  if (engine == SeriesEngine::ClosedForm) {
    const NodeDissipation nd = nodeDissipation(init, nu);
    for (const double tau : taus) {
      double l2 = 0.0, maxMod = 0.0;
      closedFormRow(init.grid, nd, tau - logT0, &l2, &maxMod);
      series.logT.push_back(tau);
      series.l2.push_back(l2);
      series.maxModulus.push_back(maxMod);
    }
    return series;
  }

  ProfileState state{init.grid, logT0, init.alpha0};
  auto record = [&](const ProfileState& st) {
    double mMax = 0.0;
    for (const Complex& b : st.beta) mMax = std::max(mMax, std::abs(b));
    series.logT.push_back(st.logT);
    series.l2.push_back(l2Norm(st));
    series.maxModulus.push_back(mMax);
  };
  record(state);
  for (std::size_t j = 1; j < taus.size(); ++j) {
    state = continueProfileLogT(std::move(state), nu, taus[j], stepsPerDecade);
    record(state);
  }
  return series;
}

FitReport fitDecayExponent(const DecaySeries& series, const FitWindow& window) {
  series.validate();
  if (!(window.startScaled > 0.0) || !(window.endScaled > window.startScaled))
    throw ValidationError("fit window must satisfy 0 < start < end");
  if (window.minSamples < 2)
    throw ValidationError("fit window needs at least 2 samples");

  const double e2 = series.epsilon * series.epsilon;
  std::vector<double> xs, ys;
  double lo = 0.0, hi = 0.0;
  for (const DecaySample& s : series.samples) {
    const double scaled = e2 * s.logT;
    if (scaled < window.startScaled || scaled > window.endScaled) continue;
    if (xs.empty()) lo = s.logT;
    hi = s.logT;
    xs.push_back(std::log(scaled));
    ys.push_back(std::log(s.value));
  }

  const int n = static_cast<int>(xs.size());
  if (n < window.minSamples)
    throw ValidationError("insufficient samples in the fit window: " +
                          std::to_string(n) + " < " +
                          std::to_string(window.minSamples));
  const double spanDecades = std::log10(hi / lo);
  if (spanDecades < window.minSpanDecades - 1e-9)
    throw ValidationError("insufficient span in the fit window: " +
                          formatDouble(spanDecades) + " decades of log t < " +
                          formatDouble(window.minSpanDecades));

  double xMean = 0.0, yMean = 0.0;
  for (int j = 0; j < n; ++j) {
    xMean += xs[j];
    yMean += ys[j];
  }
  xMean /= n;
  yMean /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int j = 0; j < n; ++j) {
    sxx += (xs[j] - xMean) * (xs[j] - xMean);
    sxy += (xs[j] - xMean) * (ys[j] - yMean);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit window has no spread in log t");
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = ys[j] - yMean - slope * (xs[j] - xMean);
    ss += r * r;
  }

  FitReport report;
  report.exponent = -slope;
  report.residual = std::sqrt(ss / n);
  report.windowLogTLo = lo;
  report.windowLogTHi = hi;
  report.sampleCount = n;
  if (!std::isfinite(report.exponent) || !std::isfinite(report.residual))
    throw NumericalError("decay fit produced non-finite results");
  return report;
}

nlohmann::json FitReport::toJson() const {
  auto finiteOrNull = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {
      {"exponent", exponent},
      {"residual", residual},
      {"window", {{"log_t_lo", windowLogTLo},
                  {"log_t_hi", windowLogTHi},
                  {"t_lo", finiteOrNull(std::exp(windowLogTLo))},
                  {"t_hi", finiteOrNull(std::exp(windowLogTHi))}}},
      {"samples", sampleCount},
  };
}

void MatsumuraInstance::validate() const {
  if (!(c0 > 0.0)) throw ValidationError("Matsumura C0 must be positive");
  if (!(c1 >= 0.0)) throw ValidationError("Matsumura C1 must be non-negative");
  if (!(q > 1.0)) throw ValidationError("Matsumura q must exceed 1");
  if (!(s > 1.0)) throw ValidationError("Matsumura s must exceed 1");
  if (!(phi2 >= 0.0) || !std::isfinite(phi2))
    throw ValidationError("Matsumura Phi(2) must be finite and non-negative");
}

double matsumuraC2(const MatsumuraInstance& inst) {
  inst.validate();
  const double qs = inst.qStar();
  double integral = 0.0;
  if (inst.c1 > 0.0) {
    boost::math::quadrature::exp_sinh<double> quad;
    const double decay = inst.s - 1.0;
    double error = 0.0;
    integral = quad.integrate(
        [&](double z) {
          // exp(qs log y - decay y): the factored form pow * exp turns into
          // inf * 0 = nan at the quadrature's extreme abscissae
          const double y = kLn2 + z;
          return std::exp(qs * std::log(y) - decay * y);
        },
        1e-12, &error);
    if (!std::isfinite(integral))
      throw NumericalError("Matsumura forcing integral did not converge");
  }
  const double bracket = std::pow(kLn2, qs) * inst.phi2 + inst.c1 * integral;
  return bracket / kLn2 + std::pow(qs / (inst.q * inst.c0), qs - 1.0);
}

void MatsumuraOde::validate() const {
  if (!(forcingScale >= 0.0) || !(forcingScale <= 1.0))
    throw ValidationError("forcing scale outside [0, 1] violates the hypothesis");
  if (!(extraDissipation >= 0.0))
    throw ValidationError("negative extra dissipation violates the hypothesis");
}

double matsumuraEqualityClosedForm(const MatsumuraInstance& inst, double logT) {
  inst.validate();
  if (inst.c1 != 0.0)
    throw ValidationError("closed form available only for C1 = 0");
  if (!(logT >= kLn2 - 1e-12))
    throw ValidationError("closed form is defined for t >= 2");
  const double qm1 = inst.q - 1.0;
  const double denom =
      1.0 + qm1 * inst.c0 * std::pow(inst.phi2, qm1) * (logT - kLn2);
  return inst.phi2 * std::pow(denom, -1.0 / qm1);
}

MatsumuraVerdict verifyMatsumura(const MatsumuraInstance& inst,
                                 const MatsumuraOde& ode, double tEnd,
                                 int stepsPerDecade) {
  inst.validate();
  ode.validate();
  if (!(tEnd >= 2.0)) throw ValidationError("t_end must be at least 2");
  if (stepsPerDecade < 16)
    throw ValidationError("steps_per_decade must be at least 16");

  const double c2 = matsumuraC2(inst);
  const double qs = inst.qStar();
  const double c0e = inst.c0 + ode.extraDissipation;
  const double c1e = ode.forcingScale * inst.c1;
  const double decay = inst.s - 1.0;
  auto rhs = [&](double y, double phi) {
    return -c0e * std::pow(std::fabs(phi), inst.q) + c1e * std::exp(-decay * y);
  };

  MatsumuraVerdict verdict;
  verdict.c2 = c2;
  double y = kLn2;
  double phi = inst.phi2;
  verdict.maxScaled = phi * std::pow(y, qs - 1.0);
  verdict.logTAtMax = y;

  const double yEnd = std::log(tEnd);
  const double hBase = std::numbers::ln10 / stepsPerDecade;
  long substeps = 0;
  while (y < yEnd) {
    const double target = std::min(y + hBase, yEnd);
    while (target - y > 1e-14) {
      const double lambda =
          c0e * inst.q * std::pow(std::fabs(phi), inst.q - 1.0) + decay;
      const double h = std::min(target - y, 0.2 / std::max(lambda, 1e-12));
      const double k1 = rhs(y, phi);
      const double k2 = rhs(y + 0.5 * h, phi + 0.5 * h * k1);
      const double k3 = rhs(y + 0.5 * h, phi + 0.5 * h * k2);
      const double k4 = rhs(y + h, phi + h * k3);
      phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      y += h;
      if (!std::isfinite(phi))
        throw NumericalError("comparison ODE diverged at log t = " +
                             std::to_string(y));
      if (++substeps > 50'000'000)
        throw NumericalError("comparison ODE stalled under stiffness limiting");
    }
    y = target;
    const double scaled = phi * std::pow(y, qs - 1.0);
    if (scaled > verdict.maxScaled) {
      verdict.maxScaled = scaled;
      verdict.logTAtMax = y;
    }
  }
  verdict.pass = verdict.maxScaled <= c2 * (1.0 + 1e-9);
  return verdict;
}

nlohmann::json MatsumuraVerdict::toJson() const {
  return {
      {"pass", pass},
      {"c2", c2},
      {"max_scaled", maxScaled},
      {"log_t_at_max", logTAtMax},
  };
}

VerdictReport makeVerdict(const DissipationClass& cls, const FitReport& fit,
                          double tolerance, double residualThreshold) {
  if (!(tolerance > 0.0) || !(residualThreshold > 0.0))
    throw ValidationError("verdict tolerances must be positive");
  VerdictReport report;
  report.predicted = predictedExponent(cls);
  report.fitted = fit.exponent;
  report.tolerance = tolerance;
  report.residual = fit.residual;
  report.residualThreshold = residualThreshold;
  report.pass = std::abs(report.fitted - report.predicted) <= tolerance &&
                report.residual <= residualThreshold;
  return report;
}

nlohmann::json VerdictReport::toJson() const {
  return {
      {"pass", pass},
      {"predicted_exponent", predicted},
      {"fitted_exponent", fitted},
      {"tolerance", tolerance},
      {"residual", residual},
      {"residual_threshold", residualThreshold},
  };
}

}  // namespace dnls
