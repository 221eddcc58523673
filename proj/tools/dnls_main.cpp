#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnls/analysis.hpp"
#include "dnls/classifier.hpp"
#include "dnls/errors.hpp"
#include "dnls/format.hpp"
#include "dnls/profile.hpp"
#include "dnls/scenario.hpp"

namespace {

using namespace dnls;
using nlohmann::json;

json loadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(path + " is not valid JSON: " + e.what());
  }
  return j;
}

void emit(const json& doc, const std::string& outPath) {
  const std::string text = doc.dump(2) + "\n";
  if (outPath.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(outPath, std::ios::binary);
  if (!out) throw NumericalError("cannot open " + outPath + " for writing");
  out << text;
}

struct NonlinearityInput {
  std::string expression;
  std::string configPath;

  CubicNonlinearity load(std::string* textOut = nullptr) const {
    if (!expression.empty() && !configPath.empty())
      throw ValidationError("give an expression or --config, not both");
    if (!expression.empty()) {
      if (textOut) *textOut = expression;
      return parseNonlinearity(expression);
    }
    if (!configPath.empty()) {
      const json j = loadJsonFile(configPath);
      const json& n = j.is_object() && j.contains("nonlinearity")
                          ? j["nonlinearity"]
                          : j;
      if (n.is_string()) {
        if (textOut) *textOut = n.get<std::string>();
        return parseNonlinearity(n.get<std::string>());
      }
      return CubicNonlinearity::fromJson(n);
    }
    throw ValidationError("a nonlinearity is required (expression or --config)");
  }
};

std::string polyText(const NuPolynomial& nu) {
  std::string out;
  for (int k = 0; k < 4; ++k) {
    const Complex c = nu.coeffs()[k];
    if (c == Complex{0.0, 0.0}) continue;
    if (!out.empty()) out += " + ";
    out += "(" + formatDouble(c.real()) + (c.imag() < 0 ? "" : "+") +
           formatDouble(c.imag()) + "i)";
    if (k > 0) out += "*xi^" + std::to_string(k);
  }
  return out.empty() ? "0" : out;
}

json classifyReport(const CubicNonlinearity& n, bool allowNonGauge) {
  const bool gauge = n.isWeaklyGaugeInvariant();
  if (!gauge && !allowNonGauge)
    throw ValidationError(
        "nonlinearity is not weakly gauge invariant; pass --allow-non-gauge "
        "for diagnostics without rate predictions");
  const NuPolynomial nu = n.computeNu();
  json report;
  report["weakly_gauge_invariant"] = gauge;
  report["nu_coeffs"] = nu.toJson();
  report["nu_text"] = polyText(nu);
  const RealCubicPoly p = RealCubicPoly::fromNu(nu);
  const bool condA = checkConditionA(p);
  report["cond_a"] = condA;
  if (!condA) {
    try {
      classify(p);
    } catch (const ValidationError& e) {
      report["witness"] = e.what();
    }
    report["trichotomy"] = nullptr;
    report["admissible_theta_sup"] = nullptr;
    report["predicted_l2_exponent"] = nullptr;
    return report;
  }
  const DissipationClass cls = classify(p);
  report["trichotomy"] = trichotomyName(cls.trichotomy);
  report["certificates"] = cls.toJson();
  if (const auto sup = cls.admissibleThetaSup())
    report["admissible_theta_sup"] = *sup;
  else
    report["admissible_theta_sup"] = nullptr;
  if (gauge && cls.trichotomy != Trichotomy::IdenticallyZero)
    report["predicted_l2_exponent"] = predictedExponent(cls);
  else
    report["predicted_l2_exponent"] = nullptr;
  return report;
}

int reportRun(const RunSummary& summary) {
  emit(summary.document, "");
  return summary.hasVerdict && !summary.verdictPass ? 4 : 0;
}

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative-structure classifier and log-decay verifier for "
               "cubic derivative NLS equations"};
  app.require_subcommand(1);
  int rc = 0;

  // classify -------------------------------------------------------------
  NonlinearityInput clsIn;
  std::string clsOut;
  bool clsAllow = false;
  auto* cmdClassify = app.add_subcommand(
      "classify", "Classify a nonlinearity by its dissipation structure");
  cmdClassify->add_option("expression", clsIn.expression,
                          "Nonlinearity, e.g. \"-i*|ux|^2*(u+ux)+3*u^2*ux\"");
  cmdClassify->add_option("--config", clsIn.configPath,
                          "JSON file with a nonlinearity entry");
  cmdClassify->add_option("--out", clsOut, "Write the JSON report to this file");
  cmdClassify->add_flag("--allow-non-gauge", clsAllow,
                        "Classify even without weak gauge invariance");
  cmdClassify->callback([&] {
    emit(classifyReport(clsIn.load(), clsAllow), clsOut);
  });

  // nu ---------------------------------------------------------------------
  NonlinearityInput nuIn;
  std::string nuOut;
  auto* cmdNu = app.add_subcommand(
      "nu", "Compute the resonance coefficient polynomial nu(xi)");
  cmdNu->add_option("expression", nuIn.expression, "Nonlinearity expression");
  cmdNu->add_option("--config", nuIn.configPath,
                    "JSON file with a nonlinearity entry");
  cmdNu->add_option("--out", nuOut, "Write the JSON report to this file");
  cmdNu->callback([&] {
    const CubicNonlinearity n = nuIn.load();
    const NuPolynomial nu = n.computeNu();
    json doc;
    doc["nu_coeffs"] = nu.toJson();
    doc["nu_text"] = polyText(nu);
    doc["dissipation_coeffs"] = nu.dissipationCoeffs();
    doc["weakly_gauge_invariant"] = n.isWeaklyGaugeInvariant();
    emit(doc, nuOut);
  });

  // simulate-profile -------------------------------------------------------
  NonlinearityInput spIn;
  struct {
    std::string out = "out";
    std::string name = "profile-run";
    std::string engine = "auto";
    std::string envelope = "inverse_square";
    double eps = 0.05;
    double tEnd = kUnset;
    double log10TEnd = kUnset;
    double xiHalfWidth = 20.0;
    double t0 = 2.0;
    double width = 2.0;
    int gridCount = 4096;
    int samplesPerDecade = 16;
    int stepsPerDecade = 64;
    bool allowNonGauge = false;
  } sp;
  auto* cmdProfile = app.add_subcommand(
      "simulate-profile", "Integrate the resonant profile model and emit the "
                          "L2 decay series");
  cmdProfile->add_option("expression", spIn.expression, "Nonlinearity expression");
  cmdProfile->add_option("--config", spIn.configPath,
                         "JSON file with a nonlinearity entry");
  cmdProfile->add_option("--out", sp.out, "Output directory")
      ->capture_default_str();
  cmdProfile->add_option("--name", sp.name, "Run name recorded in the summary");
  cmdProfile->add_option("--eps", sp.eps, "Initial-data size epsilon")
      ->capture_default_str();
  cmdProfile->add_option("--t-end", sp.tEnd, "Series horizon as a time");
  cmdProfile->add_option("--log10-t-end", sp.log10TEnd,
                         "Series horizon as log10(t), for horizons past the "
                         "double range");
  cmdProfile->add_option("--engine", sp.engine,
                         "Series engine: auto, closed-form or rk4")
      ->capture_default_str();
  cmdProfile->add_option("--envelope", sp.envelope,
                         "Initial profile shape: inverse_square or gaussian")
      ->capture_default_str();
  cmdProfile->add_option("--width", sp.width, "Gaussian envelope width");
  cmdProfile->add_option("--xi-half-width", sp.xiHalfWidth,
                         "Frequency grid half width");
  cmdProfile->add_option("--grid-count", sp.gridCount, "Frequency grid nodes");
  cmdProfile->add_option("--t0", sp.t0, "Start time of the profile evolution");
  cmdProfile->add_option("--samples-per-decade", sp.samplesPerDecade,
                         "Series samples per decade of log t");
  cmdProfile->add_option("--steps-per-decade", sp.stepsPerDecade,
                         "RK4 steps per decade of t");
  cmdProfile->add_flag("--allow-non-gauge", sp.allowNonGauge,
                       "Simulate without weak gauge invariance (no predictions)");
  cmdProfile->callback([&] {
    if (!std::isnan(sp.tEnd) && !std::isnan(sp.log10TEnd))
      throw ValidationError("give --t-end or --log10-t-end, not both");
    Scenario s;
    s.name = sp.name;
    s.nonlinearity = spIn.load(&s.nonlinearityText);
    s.epsilon = sp.eps;
    s.engine = "profile";
    s.allowNonGauge = sp.allowNonGauge;
    if (!std::isnan(sp.tEnd)) {
      if (!(sp.tEnd >= 2.0)) throw ValidationError("--t-end must be at least 2");
      s.log10TEnd = std::log10(sp.tEnd);
    }
    if (!std::isnan(sp.log10TEnd)) s.log10TEnd = sp.log10TEnd;
    s.profile.xiHalfWidth = sp.xiHalfWidth;
    s.profile.gridCount = sp.gridCount;
    s.profile.t0 = sp.t0;
    s.profile.width = sp.width;
    s.profile.samplesPerDecade = sp.samplesPerDecade;
    s.profile.stepsPerDecade = sp.stepsPerDecade;
    s.profile.engine = sp.engine;
    if (sp.envelope == "inverse_square")
      s.profile.envelope = EnvelopeKind::InverseSquare;
    else if (sp.envelope == "gaussian")
      s.profile.envelope = EnvelopeKind::Gaussian;
    else
      throw ValidationError("unknown envelope '" + sp.envelope + "'");
    rc = reportRun(runScenario(s, sp.out));
  });

  // simulate-pde -------------------------------------------------------------
  NonlinearityInput pdeIn;
  struct {
    std::string out = "out";
    std::string name = "pde-run";
    double eps = 0.05;
    double boxHalfWidth = 200.0;
    double dt = 0.02;
    double tEnd = 100.0;
    double width = 2.0;
    double bandXiMax = 5.0;
    int n = 2048;
    int seriesSamples = 81;
    std::vector<double> snapshots;
    bool allowNonGauge = false;
  } sq;
  auto* cmdPde = app.add_subcommand(
      "simulate-pde", "Run the pseudospectral solver and emit the norm series");
  cmdPde->add_option("expression", pdeIn.expression, "Nonlinearity expression");
  cmdPde->add_option("--config", pdeIn.configPath,
                     "JSON file with a nonlinearity entry");
  cmdPde->add_option("--out", sq.out, "Output directory")->capture_default_str();
  cmdPde->add_option("--name", sq.name, "Run name recorded in the summary");
  cmdPde->add_option("--eps", sq.eps, "Gaussian initial-data size")
      ->capture_default_str();
  cmdPde->add_option("--box-half-width", sq.boxHalfWidth,
                     "Periodic box half width L")
      ->capture_default_str();
  cmdPde->add_option("-n,--n", sq.n, "Spatial grid points")->capture_default_str();
  cmdPde->add_option("--dt", sq.dt, "Time step")->capture_default_str();
  cmdPde->add_option("--t-end", sq.tEnd, "Final time")->capture_default_str();
  cmdPde->add_option("--width", sq.width, "Gaussian initial-data width")
      ->capture_default_str();
  cmdPde->add_option("--series-samples", sq.seriesSamples,
                     "Rows in the norm series CSV");
  cmdPde->add_option("--snapshot", sq.snapshots,
                     "Time at which to dump |alpha(t, xi)| (repeatable)");
  cmdPde->add_option("--band-xi-max", sq.bandXiMax,
                     "Frequency band recorded in snapshots");
  cmdPde->add_flag("--allow-non-gauge", sq.allowNonGauge,
                   "Simulate without weak gauge invariance (no predictions)");
  cmdPde->callback([&] {
    Scenario s;
    s.name = sq.name;
    s.nonlinearity = pdeIn.load(&s.nonlinearityText);
    s.epsilon = sq.eps;
    s.engine = "pde";
    s.allowNonGauge = sq.allowNonGauge;
    s.pde.boxHalfWidth = sq.boxHalfWidth;
    s.pde.n = sq.n;
    s.pde.dt = sq.dt;
    s.pde.tEnd = sq.tEnd;
    s.pde.width = sq.width;
    s.pde.seriesSamples = sq.seriesSamples;
    s.pde.bandXiMax = sq.bandXiMax;
    std::sort(sq.snapshots.begin(), sq.snapshots.end());
    s.pde.alphaSnapshots = sq.snapshots;
    rc = reportRun(runScenario(s, sq.out));
  });

  // fit-decay ----------------------------------------------------------------
  struct {
    std::string csv;
    std::string out;
    double eps = 0.0;
    double startScaled = 5.0;
    double endScaled = kUnset;
    double minSpanDecades = 4.0;
    int minSamples = 10;
  } fd;
  auto* cmdFit = app.add_subcommand(
      "fit-decay", "Fit the log-decay exponent of an L2 series CSV");
  cmdFit->add_option("csv", fd.csv, "Series CSV file, or - for stdin")
      ->required();
  cmdFit->add_option("--eps", fd.eps, "Epsilon the series was generated with")
      ->required();
  cmdFit->add_option("--out", fd.out, "Write the JSON fit report to this file");
  cmdFit->add_option("--start-scaled", fd.startScaled,
                     "Window start in eps^2 log t")
      ->capture_default_str();
  cmdFit->add_option("--end-scaled", fd.endScaled,
                     "Window end in eps^2 log t (default unbounded)");
  cmdFit->add_option("--min-span-decades", fd.minSpanDecades,
                     "Required span of log t inside the window, in decades")
      ->capture_default_str();
  cmdFit->add_option("--min-samples", fd.minSamples,
                     "Required sample count inside the window")
      ->capture_default_str();
  cmdFit->callback([&] {
    DecaySeries series;
    if (fd.csv == "-") {
      series = DecaySeries::fromCsv(std::cin, fd.eps);
    } else {
      std::ifstream in(fd.csv);
      if (!in) throw ValidationError("cannot open " + fd.csv);
      series = DecaySeries::fromCsv(in, fd.eps);
    }
    FitWindow window;
    window.startScaled = fd.startScaled;
    if (!std::isnan(fd.endScaled)) window.endScaled = fd.endScaled;
    window.minSpanDecades = fd.minSpanDecades;
    window.minSamples = fd.minSamples;
    emit(fitDecayExponent(series, window).toJson(), fd.out);
  });

  // verify-matsumura -----------------------------------------------------
  struct {
    double c0 = 1.0;
    double c1 = 0.0;
    double q = 2.0;
    double s = 2.0;
    double phi2 = 1.0;
    double tEnd = 1e12;
    double forcingScale = 1.0;
    double extraDissipation = 0.0;
    int stepsPerDecade = 64;
    std::string out;
  } vm;
  auto* cmdVm = app.add_subcommand(
      "verify-matsumura",
      "Check the logarithmic comparison bound along an ODE trajectory");
  cmdVm->add_option("--c0", vm.c0, "Dissipation constant C0 > 0")
      ->capture_default_str();
  cmdVm->add_option("--c1", vm.c1, "Forcing constant C1 >= 0")
      ->capture_default_str();
  cmdVm->add_option("--q", vm.q, "Dissipation power q > 1")->capture_default_str();
  cmdVm->add_option("--s", vm.s, "Forcing decay power s > 1")
      ->capture_default_str();
  cmdVm->add_option("--phi2", vm.phi2, "Initial value Phi(2)")
      ->capture_default_str();
  cmdVm->add_option("--t-end", vm.tEnd, "Horizon of the ODE integration")
      ->capture_default_str();
  cmdVm->add_option("--forcing-scale", vm.forcingScale,
                    "Scale in [0,1] on the forcing term of the test ODE")
      ->capture_default_str();
  cmdVm->add_option("--extra-dissipation", vm.extraDissipation,
                    "Extra sink added to the test ODE")
      ->capture_default_str();
  cmdVm->add_option("--steps-per-decade", vm.stepsPerDecade,
                    "RK4 steps per decade of t")
      ->capture_default_str();
  cmdVm->add_option("--out", vm.out, "Write the JSON verdict to this file");
  cmdVm->callback([&] {
    const MatsumuraInstance inst{vm.c0, vm.c1, vm.q, vm.s, vm.phi2};
    const MatsumuraOde ode{vm.forcingScale, vm.extraDissipation};
    const MatsumuraVerdict verdict =
        verifyMatsumura(inst, ode, vm.tEnd, vm.stepsPerDecade);
    json doc = verdict.toJson();
    doc["instance"] = {{"c0", inst.c0}, {"c1", inst.c1},   {"q", inst.q},
                       {"s", inst.s},   {"phi2", inst.phi2}};
    emit(doc, vm.out);
    if (!verdict.pass) rc = 4;
  });

  // run -------------------------------------------------------------------
  struct {
    std::string config;
    std::string out = "out";
    std::string engine;
    double eps = kUnset;
    double tEnd = kUnset;
    bool allowNonGauge = false;
  } rn;
  auto* cmdRun = app.add_subcommand(
      "run", "Full pipeline: classify, simulate, fit, verdict");
  cmdRun->add_option("--config", rn.config, "Scenario JSON file")->required();
  cmdRun->add_option("--out", rn.out, "Output directory")->capture_default_str();
  cmdRun->add_option("--engine", rn.engine,
                     "Override the scenario engine: profile, pde or both");
  cmdRun->add_option("--eps", rn.eps, "Override epsilon");
  cmdRun->add_option("--t-end", rn.tEnd, "Override the series horizon");
  cmdRun->add_flag("--allow-non-gauge", rn.allowNonGauge,
                   "Allow nonlinearities without weak gauge invariance");
  cmdRun->callback([&] {
    Scenario s = Scenario::fromJson(loadJsonFile(rn.config));
    if (!rn.engine.empty()) s.engine = rn.engine;
    if (!std::isnan(rn.eps)) s.epsilon = rn.eps;
    if (!std::isnan(rn.tEnd)) {
      if (!(rn.tEnd >= 2.0)) throw ValidationError("--t-end must be at least 2");
      s.log10TEnd = std::log10(rn.tEnd);
    }
    if (rn.allowNonGauge) s.allowNonGauge = true;
    s.validate();
    rc = reportRun(runScenario(s, rn.out));
  });

  // sweep ----------------------------------------------------------------
  struct {
    std::string config;
    std::string out = "out";
    int workers = 0;
  } sw;
  auto* cmdSweep = app.add_subcommand(
      "sweep", "Run a batch of scenarios into isolated directories");
  cmdSweep->add_option("--config", sw.config, "Sweep JSON file")->required();
  cmdSweep->add_option("--out", sw.out, "Output directory")->capture_default_str();
  cmdSweep->add_option("--workers", sw.workers, "Override the worker count");
  cmdSweep->callback([&] {
    SweepConfig cfg = SweepConfig::fromJson(loadJsonFile(sw.config));
    if (sw.workers > 0) cfg.workers = sw.workers;
    const std::vector<SweepResult> results = runSweep(cfg, sw.out);
    json doc = json::array();
    bool anyError = false, anyVerdictFail = false;
    for (const SweepResult& r : results) {
      json row;
      row["name"] = r.name;
      if (!r.error.empty()) {
        row["error"] = r.error;
        anyError = true;
        std::fprintf(stderr, "%s: error: %s\n", r.name.c_str(), r.error.c_str());
      } else if (r.hasVerdict) {
        row["verdict_pass"] = r.verdictPass;
        anyVerdictFail = anyVerdictFail || !r.verdictPass;
        std::fprintf(stdout, "%s: verdict %s\n", r.name.c_str(),
                     r.verdictPass ? "pass" : "fail");
      } else {
        row["verdict_pass"] = nullptr;
        std::fprintf(stdout, "%s: done\n", r.name.c_str());
      }
      doc.push_back(std::move(row));
    }
    emit(doc, (std::filesystem::path(sw.out) / "sweep_results.json").string());
    rc = anyError ? 3 : anyVerdictFail ? 4 : 0;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return rc;
}
