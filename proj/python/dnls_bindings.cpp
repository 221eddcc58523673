#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dnls/analysis.hpp"
#include "dnls/classifier.hpp"
#include "dnls/errors.hpp"
#include "dnls/profile.hpp"
#include "dnls/scenario.hpp"

namespace py = pybind11;
using namespace dnls;

namespace {

CubicNonlinearity fromText(const std::string& text) {
  return parseNonlinearity(text);
}

std::string classifyJson(const std::string& text, bool allowNonGauge) {
  const CubicNonlinearity n = fromText(text);
  const bool gauge = n.isWeaklyGaugeInvariant();
  if (!gauge && !allowNonGauge)
    throw ValidationError(
        "nonlinearity is not weakly gauge invariant; pass allow_non_gauge");
  const NuPolynomial nu = n.computeNu();
  nlohmann::json doc;
  doc["weakly_gauge_invariant"] = gauge;
  doc["nu_coeffs"] = nu.toJson();
  const RealCubicPoly p = RealCubicPoly::fromNu(nu);
  doc["cond_a"] = checkConditionA(p);
  if (checkConditionA(p)) {
    const DissipationClass cls = classify(p);
    doc["classification"] = cls.toJson();
    if (gauge && cls.trichotomy != Trichotomy::IdenticallyZero)
      doc["predicted_l2_exponent"] = predictedExponent(cls);
    else
      doc["predicted_l2_exponent"] = nullptr;
  }
  return doc.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dissipative-structure classification and logarithmic L2-decay "
            "verification for cubic derivative NLS equations";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_ArithmeticError);

  m.def(
      "nu_coeffs",
      [](const std::string& text) {
        const NuPolynomial nu = fromText(text).computeNu();
        const auto& c = nu.coeffs();
        return std::vector<Complex>(c.begin(), c.end());
      },
      py::arg("nonlinearity"),
      "Coefficients [xi^0 .. xi^3] of the resonance polynomial nu(xi).");

  m.def(
      "is_weakly_gauge_invariant",
      [](const std::string& text) {
        return fromText(text).isWeaklyGaugeInvariant();
      },
      py::arg("nonlinearity"));

  m.def("classify_json", &classifyJson, py::arg("nonlinearity"),
        py::arg("allow_non_gauge") = false,
        "Classification report as a JSON string.");

  m.def(
      "integral_i_theta",
      [](const std::array<double, 4>& pCoeffs, double theta) {
        const IThetaResult r = integralITheta(RealCubicPoly{pCoeffs}, theta);
        return py::make_tuple(r.divergent, r.value);
      },
      py::arg("p_coeffs"), py::arg("theta"),
      "Returns (divergent, value) for the dissipation-weighted integral.");

  m.def("closed_form_modulus_sq", &closedFormModulusSq, py::arg("m0"),
        py::arg("p"), py::arg("t0"), py::arg("t"),
        "Exact squared modulus of a profile-equation node.");

  m.def(
      "simulate_profile_series",
      [](const std::string& text, double eps, double log10TEnd,
         double xiHalfWidth, int gridCount, int samplesPerDecade) {
        const CubicNonlinearity n = fromText(text);
        const NuPolynomial nu = n.computeNu();
        const FrequencyGrid grid = FrequencyGrid::symmetric(xiHalfWidth, gridCount);
        const InitialProfile init =
            InitialProfile::envelope(grid, EnvelopeKind::InverseSquare, eps, 2.0);
        const ProfileSeries series = simulateProfileSeries(
            init, nu, eps, log10TEnd * std::numbers::ln10, samplesPerDecade,
            SeriesEngine::ClosedForm);
        return py::make_tuple(series.logT, series.l2);
      },
      py::arg("nonlinearity"), py::arg("eps"), py::arg("log10_t_end"),
      py::arg("xi_half_width") = 20.0, py::arg("grid_count") = 4096,
      py::arg("samples_per_decade") = 16,
      "Returns (log_t, l2_norm) lists for the resonant profile model.");

  m.def(
      "fit_decay_exponent",
      [](const std::vector<double>& logT, const std::vector<double>& values,
         double eps, double startScaled, double endScaled, double minSpanDecades,
         int minSamples) {
        if (logT.size() != values.size())
          throw ValidationError("log_t and values must have the same length");
        DecaySeries series;
        series.epsilon = eps;
        for (std::size_t i = 0; i < logT.size(); ++i)
          series.samples.push_back({logT[i], values[i]});
        FitWindow window{startScaled, endScaled, minSpanDecades, minSamples};
        return fitDecayExponent(series, window).toJson().dump();
      },
      py::arg("log_t"), py::arg("values"), py::arg("eps"),
      py::arg("start_scaled") = 5.0,
      py::arg("end_scaled") = std::numeric_limits<double>::infinity(),
      py::arg("min_span_decades") = 4.0, py::arg("min_samples") = 10,
      "Least-squares decay exponent as a JSON string.");

  m.def(
      "matsumura_c2",
      [](double c0, double c1, double q, double s, double phi2) {
        return matsumuraC2(MatsumuraInstance{c0, c1, q, s, phi2});
      },
      py::arg("c0") = 1.0, py::arg("c1") = 0.0, py::arg("q") = 2.0,
      py::arg("s") = 2.0, py::arg("phi2") = 1.0,
      "Explicit constant of the logarithmic comparison bound.");

  m.def(
      "verify_matsumura",
      [](double c0, double c1, double q, double s, double phi2, double tEnd,
         double forcingScale, double extraDissipation, int stepsPerDecade) {
        const MatsumuraVerdict v =
            verifyMatsumura(MatsumuraInstance{c0, c1, q, s, phi2},
                            MatsumuraOde{forcingScale, extraDissipation}, tEnd,
                            stepsPerDecade);
        return v.toJson().dump();
      },
      py::arg("c0") = 1.0, py::arg("c1") = 0.0, py::arg("q") = 2.0,
      py::arg("s") = 2.0, py::arg("phi2") = 1.0, py::arg("t_end") = 1e12,
      py::arg("forcing_scale") = 1.0, py::arg("extra_dissipation") = 0.0,
      py::arg("steps_per_decade") = 64,
      "Checks the comparison bound along a test ODE; JSON verdict string.");

  m.def(
      "run_scenario_json",
      [](const std::string& configJson, const std::string& outDir) {
        std::istringstream in(configJson);
        nlohmann::json cfg;
        try {
          in >> cfg;
        } catch (const nlohmann::json::parse_error& e) {
          throw ValidationError(std::string("config is not valid JSON: ") +
                                e.what());
        }
        const Scenario s = Scenario::fromJson(cfg);
        const RunSummary summary = runScenario(s, outDir);
        return summary.document.dump();
      },
      py::arg("config_json"), py::arg("out_dir"),
      "Full classify/simulate/fit/verdict pipeline; returns the summary JSON.");
}
