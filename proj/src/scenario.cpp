#include "dnls/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <thread>

#include "dnls/classifier.hpp"
#include "dnls/errors.hpp"
#include "dnls/format.hpp"
#include "dnls/pde.hpp"
#include "dnls/profile.hpp"

namespace dnls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void checkKeys(const json& j, std::initializer_list<const char*> allowed,
               const std::string& ctx) {
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end())
      throw ValidationError("unknown key '" + item.key() + "' in " + ctx);
  }
}

double getNumber(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ValidationError(std::string("key '") + key + "' must be a number");
  return j[key].get<double>();
}

int getInt(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw ValidationError(std::string("key '") + key + "' must be an integer");
  return j[key].get<int>();
}

std::string getString(const json& j, const char* key, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw ValidationError(std::string("key '") + key + "' must be a string");
  return j[key].get<std::string>();
}

bool getBool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean())
    throw ValidationError(std::string("key '") + key + "' must be a boolean");
  return j[key].get<bool>();
}

class Timing {
public:
  void record(const std::string& stage, double ms) {
    entries_.emplace_back(stage, ms);
  }
  void write(const fs::path& file) const {
    std::ofstream out(file);
    for (const auto& [stage, ms] : entries_)
      out << stage << ' ' << formatDouble(ms) << " ms\n";
  }

private:
  std::vector<std::pair<std::string, double>> entries_;
};

template <typename F>
void stage(const char* name, Timing& timing, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
  const auto stop = std::chrono::steady_clock::now();
  timing.record(name, std::chrono::duration<double, std::milli>(stop - start).count());
}

void writeText(const fs::path& file, const std::string& text,
               std::vector<std::string>& written) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw NumericalError("cannot open " + file.string() + " for writing");
  out << text;
  written.push_back(file.filename().string());
}

EnvelopeKind envelopeFromName(const std::string& name) {
  if (name == "inverse_square") return EnvelopeKind::InverseSquare;
  if (name == "gaussian") return EnvelopeKind::Gaussian;
  throw ValidationError("unknown envelope '" + name +
                        "' (expected inverse_square or gaussian)");
}

std::string envelopeName(EnvelopeKind kind) {
  return kind == EnvelopeKind::InverseSquare ? "inverse_square" : "gaussian";
}

}  // namespace

Scenario Scenario::fromJson(const json& j) {
  if (!j.is_object()) throw ValidationError("scenario config must be a JSON object");
  checkKeys(j,
            {"name", "nonlinearity", "epsilon", "engine", "allow_non_gauge",
             "seed", "t_end", "log10_t_end", "profile", "fit", "verdict", "pde"},
            "scenario");
  Scenario s;
  s.name = getString(j, "name", s.name);
  if (!j.contains("nonlinearity"))
    throw ValidationError("scenario config needs a nonlinearity");
  if (j["nonlinearity"].is_string()) {
    s.nonlinearityText = j["nonlinearity"].get<std::string>();
    s.nonlinearity = parseNonlinearity(s.nonlinearityText);
  } else {
    s.nonlinearity = CubicNonlinearity::fromJson(j["nonlinearity"]);
  }
  s.epsilon = getNumber(j, "epsilon", s.epsilon);
  s.engine = getString(j, "engine", s.engine);
  s.allowNonGauge = getBool(j, "allow_non_gauge", s.allowNonGauge);
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("t_end") && j.contains("log10_t_end"))
    throw ValidationError("give either t_end or log10_t_end, not both");
  if (j.contains("t_end")) {
    const double tEnd = getNumber(j, "t_end", 0.0);
    if (!(tEnd >= 2.0)) throw ValidationError("t_end must be at least 2");
    s.log10TEnd = std::log10(tEnd);
  } else {
    s.log10TEnd = getNumber(j, "log10_t_end", s.log10TEnd);
  }

  if (j.contains("profile")) {
    const json& p = j["profile"];
    checkKeys(p,
              {"xi_half_width", "grid_count", "t0", "envelope", "width",
               "samples_per_decade", "steps_per_decade", "engine"},
              "profile config");
    s.profile.xiHalfWidth = getNumber(p, "xi_half_width", s.profile.xiHalfWidth);
    s.profile.gridCount = getInt(p, "grid_count", s.profile.gridCount);
    s.profile.t0 = getNumber(p, "t0", s.profile.t0);
    s.profile.envelope = envelopeFromName(
        getString(p, "envelope", envelopeName(s.profile.envelope)));
    s.profile.width = getNumber(p, "width", s.profile.width);
    s.profile.samplesPerDecade =
        getInt(p, "samples_per_decade", s.profile.samplesPerDecade);
    s.profile.stepsPerDecade = getInt(p, "steps_per_decade", s.profile.stepsPerDecade);
    s.profile.engine = getString(p, "engine", s.profile.engine);
  }

  if (j.contains("fit")) {
    const json& f = j["fit"];
    checkKeys(f, {"start_scaled", "end_scaled", "min_span_decades", "min_samples"},
              "fit config");
    s.fit.startScaled = getNumber(f, "start_scaled", s.fit.startScaled);
    if (f.contains("end_scaled") && f["end_scaled"].is_null())
      s.fit.endScaled = std::numeric_limits<double>::infinity();
    else
      s.fit.endScaled = getNumber(f, "end_scaled", s.fit.endScaled);
    s.fit.minSpanDecades = getNumber(f, "min_span_decades", s.fit.minSpanDecades);
    s.fit.minSamples = getInt(f, "min_samples", s.fit.minSamples);
  }

  if (j.contains("verdict")) {
    const json& v = j["verdict"];
    checkKeys(v, {"tolerance", "residual_threshold"}, "verdict config");
    s.verdictTolerance = getNumber(v, "tolerance", s.verdictTolerance);
    s.residualThreshold = getNumber(v, "residual_threshold", s.residualThreshold);
  }

  if (j.contains("pde")) {
    const json& p = j["pde"];
    checkKeys(p,
              {"box_half_width", "n", "dt", "t_end", "width", "series_samples",
               "compare_from_t", "band_xi_max", "alpha_snapshots"},
              "pde config");
    s.pde.boxHalfWidth = getNumber(p, "box_half_width", s.pde.boxHalfWidth);
    s.pde.n = getInt(p, "n", s.pde.n);
    s.pde.dt = getNumber(p, "dt", s.pde.dt);
    s.pde.tEnd = getNumber(p, "t_end", s.pde.tEnd);
    s.pde.width = getNumber(p, "width", s.pde.width);
    s.pde.seriesSamples = getInt(p, "series_samples", s.pde.seriesSamples);
    s.pde.compareFromT = getNumber(p, "compare_from_t", s.pde.compareFromT);
    s.pde.bandXiMax = getNumber(p, "band_xi_max", s.pde.bandXiMax);
    if (p.contains("alpha_snapshots")) {
      if (!p["alpha_snapshots"].is_array())
        throw ValidationError("alpha_snapshots must be an array of times");
      for (const json& v : p["alpha_snapshots"])
        s.pde.alphaSnapshots.push_back(v.get<double>());
    }
  }
  s.validate();
  return s;
}

json Scenario::toJson() const {
  json j;
  j["name"] = name;
  if (!nonlinearityText.empty())
    j["nonlinearity"] = nonlinearityText;
  else
    j["nonlinearity"] = nonlinearity.toJson();
  j["epsilon"] = epsilon;
  j["engine"] = engine;
  j["allow_non_gauge"] = allowNonGauge;
  j["seed"] = seed;
  j["log10_t_end"] = log10TEnd;
  j["profile"] = {{"xi_half_width", profile.xiHalfWidth},
                  {"grid_count", profile.gridCount},
                  {"t0", profile.t0},
                  {"envelope", envelopeName(profile.envelope)},
                  {"width", profile.width},
                  {"samples_per_decade", profile.samplesPerDecade},
                  {"steps_per_decade", profile.stepsPerDecade},
                  {"engine", profile.engine}};
  j["fit"] = {{"start_scaled", fit.startScaled},
              {"end_scaled", std::isfinite(fit.endScaled) ? json(fit.endScaled)
                                                          : json(nullptr)},
              {"min_span_decades", fit.minSpanDecades},
              {"min_samples", fit.minSamples}};
  j["verdict"] = {{"tolerance", verdictTolerance},
                  {"residual_threshold", residualThreshold}};
  j["pde"] = {{"box_half_width", pde.boxHalfWidth},
              {"n", pde.n},
              {"dt", pde.dt},
              {"t_end", pde.tEnd},
              {"width", pde.width},
              {"series_samples", pde.seriesSamples},
              {"compare_from_t", pde.compareFromT},
              {"band_xi_max", pde.bandXiMax},
              {"alpha_snapshots", pde.alphaSnapshots}};
  return j;
}

void Scenario::validate() const {
  if (name.empty() ||
      name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                             "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-") !=
          std::string::npos)
    throw ValidationError("scenario name must be non-empty and filesystem-safe");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (engine != "profile" && engine != "pde" && engine != "both")
    throw ValidationError("engine must be profile, pde or both");
  if (profile.engine != "auto" && profile.engine != "closed-form" &&
      profile.engine != "rk4")
    throw ValidationError("profile engine must be auto, closed-form or rk4");
  if (!(profile.xiHalfWidth > 0.0) || profile.gridCount < 2)
    throw ValidationError("profile grid is invalid");
  if (!(profile.t0 >= 2.0))
    throw ValidationError("profile t0 must be at least 2 (decay series domain)");
  if (!(profile.width > 0.0)) throw ValidationError("envelope width must be positive");
  if (profile.samplesPerDecade < 1 || profile.stepsPerDecade < 16)
    throw ValidationError("profile sampling configuration is invalid");
  if (!(logTEnd() >= std::log(profile.t0)))
    throw ValidationError("series horizon precedes the profile start time");
  if (!(verdictTolerance > 0.0) || !(residualThreshold > 0.0))
    throw ValidationError("verdict tolerances must be positive");
  if (!(pde.dt > 0.0) || !(pde.tEnd > 0.0) || pde.seriesSamples < 2)
    throw ValidationError("pde configuration is invalid");
  if (!(pde.compareFromT > 0.0) || !(pde.compareFromT < pde.tEnd))
    throw ValidationError("pde compare_from_t must lie inside (0, t_end)");
  if (!(pde.bandXiMax > 0.0)) throw ValidationError("pde band_xi_max must be positive");
  if (!std::is_sorted(pde.alphaSnapshots.begin(), pde.alphaSnapshots.end()))
    throw ValidationError("alpha_snapshots must be sorted ascending");
  for (const double ts : pde.alphaSnapshots)
    if (!(ts >= 0.0) || !(ts <= pde.tEnd))
      throw ValidationError("alpha_snapshots must lie within [0, pde t_end]");
  SpatialGrid grid{pde.boxHalfWidth, pde.n};
  grid.validate();
}

bool Scenario::operator==(const Scenario& other) const {
  return name == other.name && nonlinearityText == other.nonlinearityText &&
         nonlinearity == other.nonlinearity && epsilon == other.epsilon &&
         engine == other.engine && allowNonGauge == other.allowNonGauge &&
         seed == other.seed && log10TEnd == other.log10TEnd &&
         profile == other.profile &&
         fit.startScaled == other.fit.startScaled &&
         fit.endScaled == other.fit.endScaled &&
         fit.minSpanDecades == other.fit.minSpanDecades &&
         fit.minSamples == other.fit.minSamples &&
         verdictTolerance == other.verdictTolerance &&
         residualThreshold == other.residualThreshold && pde == other.pde;
}

namespace {

struct ClassificationResult {
  NuPolynomial nu;
  bool gauge = false;
  bool condA = false;
  std::optional<DissipationClass> cls;
  std::string condAWitness;
};

ClassificationResult classifyScenario(const Scenario& s, json& doc) {
  ClassificationResult r;
  r.gauge = s.nonlinearity.isWeaklyGaugeInvariant();
  if (!r.gauge && !s.allowNonGauge)
    throw ValidationError(
        "nonlinearity is not weakly gauge invariant (every derivative-free "
        "cubic term must be u^2 conj(u)); set allow_non_gauge to simulate "
        "anyway, without rate predictions");
  r.nu = s.nonlinearity.computeNu();
  doc["nu"] = r.nu.toJson();
  doc["weakly_gauge_invariant"] = r.gauge;
  const RealCubicPoly p = RealCubicPoly::fromNu(r.nu);
  r.condA = checkConditionA(p);
  if (r.condA) {
    r.cls = classify(p);
    doc["classification"] = r.cls->toJson();
  } else {
    try {
      classify(p);
    } catch (const ValidationError& e) {
      r.condAWitness = e.what();
    }
    doc["classification"] = {{"cond_a", false}, {"witness", r.condAWitness}};
  }
  return r;
}

std::string profileSeriesCsv(const ProfileSeries& series) {
  std::string csv = "log_t,t,l2_norm,max_node_modulus\n";
  for (std::size_t i = 0; i < series.logT.size(); ++i) {
    csv += formatDouble(series.logT[i]);
    csv += ',';
    csv += formatDouble(std::exp(series.logT[i]));
    csv += ',';
    csv += formatDouble(series.l2[i]);
    csv += ',';
    csv += formatDouble(series.maxModulus[i]);
    csv += '\n';
  }
  return csv;
}

std::string referenceSlopesCsv(const ProfileSeries& series, double epsilon,
                               const FitWindow& window) {
  const double e2 = epsilon * epsilon;
  std::string csv = "log_t,quarter,three_eighths,half\n";
  double x0 = 0.0, v0 = 0.0;
  for (std::size_t i = 0; i < series.logT.size(); ++i) {
    const double x = e2 * series.logT[i];
    if (x < window.startScaled || x > window.endScaled) continue;
    if (v0 == 0.0) {
      x0 = x;
      v0 = series.l2[i];
    }
    csv += formatDouble(series.logT[i]);
    for (const double gamma : {0.25, 0.375, 0.5}) {
      csv += ',';
      csv += formatDouble(v0 * std::pow(x / x0, -gamma));
    }
    csv += '\n';
  }
  return csv;
}

struct PdeOutputs {
  std::string seriesCsv;
  std::string comparisonCsv;
  double comparisonMaxDiff = 0.0;
  std::vector<std::pair<std::string, std::string>> alphaFiles;
  json summary;
};

/// Model prediction on the PDE's own frequency band: the profile equation is
/// seeded with the extracted alpha at compareFromT and advanced checkpoint
/// to checkpoint next to the PDE.
class ComparisonTracker {
public:
  ComparisonTracker(const NuPolynomial& nu, double bandXiMax)
      : nu_(nu), bandXiMax_(bandXiMax) {}

  void seed(const ExtractedProfile& profile) {
    std::vector<Complex> alpha;
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < profile.xi.size(); ++k) {
      if (std::abs(profile.xi[k]) > bandXiMax_) continue;
      if (alpha.empty()) lo = profile.xi[k];
      hi = profile.xi[k];
      alpha.push_back(profile.alpha[k]);
    }
    if (alpha.size() < 2)
      throw ValidationError("comparison band selects too few PDE modes");
    FrequencyGrid grid{lo, hi, static_cast<int>(alpha.size())};
    state_ = ProfileState{grid, std::log(profile.t), std::move(alpha)};
    seeded_ = true;
  }

  double compare(const ExtractedProfile& profile) {
    state_ = continueProfileLogT(std::move(state_), nu_, std::log(profile.t), 512);
    double maxDiff = 0.0;
    std::size_t b = 0;
    lastCsv_ = "xi,pde_abs,model_abs,abs_diff\n";
    for (std::size_t k = 0; k < profile.xi.size(); ++k) {
      if (std::abs(profile.xi[k]) > bandXiMax_) continue;
      const double pdeAbs = std::abs(profile.alpha[k]);
      const double modelAbs = std::abs(state_.beta[b]);
      const double diff = std::abs(pdeAbs - modelAbs);
      maxDiff = std::max(maxDiff, diff);
      lastCsv_ += formatDouble(profile.xi[k]);
      lastCsv_ += ',';
      lastCsv_ += formatDouble(pdeAbs);
      lastCsv_ += ',';
      lastCsv_ += formatDouble(modelAbs);
      lastCsv_ += ',';
      lastCsv_ += formatDouble(diff);
      lastCsv_ += '\n';
      ++b;
    }
    return maxDiff;
  }

  bool seeded() const { return seeded_; }
  const std::string& lastCsv() const { return lastCsv_; }

private:
  NuPolynomial nu_;
  double bandXiMax_;
  ProfileState state_;
  bool seeded_ = false;
  std::string lastCsv_;
};

PdeOutputs runPdeStage(const Scenario& s, const NuPolynomial& nu, bool compare) {
  const PdeConfig& cfg = s.pde;
  SpatialGrid grid{cfg.boxHalfWidth, cfg.n};
  PdeSolver solver(grid, s.nonlinearity);
  solver.initializeGaussian(s.epsilon, cfg.width);

  enum { kSeries = 1, kAlpha = 2, kCompare = 4 };
  std::vector<std::pair<double, int>> events;
  for (int i = 0; i < cfg.seriesSamples; ++i)
    events.emplace_back(cfg.tEnd * i / (cfg.seriesSamples - 1), kSeries);
  for (const double ts : cfg.alphaSnapshots) events.emplace_back(ts, kAlpha);
  if (compare) {
    events.emplace_back(cfg.compareFromT, kCompare);
    for (int i = 0; i < cfg.seriesSamples; ++i) {
      const double ts = cfg.tEnd * i / (cfg.seriesSamples - 1);
      if (ts > cfg.compareFromT) events.emplace_back(ts, kCompare);
    }
  }
  std::sort(events.begin(), events.end());
  std::vector<std::pair<double, int>> merged;
  for (const auto& ev : events) {
    if (!merged.empty() && merged.back().first == ev.first)
      merged.back().second |= ev.second;
    else
      merged.push_back(ev);
  }
  std::vector<double> times;
  times.reserve(merged.size());
  for (const auto& ev : merged) times.push_back(ev.first);

  PdeOutputs out;
  out.seriesCsv = "t,mass,j_norm,h3_norm\n";
  ComparisonTracker tracker(nu, cfg.bandXiMax);
  std::size_t eventIdx = 0;
  int alphaIdx = 0;
  auto onSnapshot = [&](const PdeSolver& sv) {
    const int tags = merged[eventIdx].second;
    ++eventIdx;
    if (tags & kSeries) {
      out.seriesCsv += formatDouble(sv.t());
      out.seriesCsv += ',';
      out.seriesCsv += formatDouble(sv.mass());
      out.seriesCsv += ',';
      out.seriesCsv += formatDouble(sv.jH2Norm());
      out.seriesCsv += ',';
      out.seriesCsv += formatDouble(sv.h3Norm());
      out.seriesCsv += '\n';
    }
    if (tags & kAlpha) {
      const ExtractedProfile profile = sv.extractProfile();
      json snap;
      snap["t"] = profile.t;
      json xs = json::array();
      json as = json::array();
      for (std::size_t k = 0; k < profile.xi.size(); ++k) {
        if (std::abs(profile.xi[k]) > cfg.bandXiMax) continue;
        xs.push_back(profile.xi[k]);
        as.push_back(std::abs(profile.alpha[k]));
      }
      snap["xi"] = std::move(xs);
      snap["alpha_abs"] = std::move(as);
      char name[32];
      std::snprintf(name, sizeof(name), "alpha_%04d.json", alphaIdx++);
      out.alphaFiles.emplace_back(name, snap.dump(2) + "\n");
    }
    if (tags & kCompare) {
      const ExtractedProfile profile = sv.extractProfile();
      if (!tracker.seeded()) {
        tracker.seed(profile);
      } else {
        out.comparisonMaxDiff =
            std::max(out.comparisonMaxDiff, tracker.compare(profile));
        out.comparisonCsv = tracker.lastCsv();
      }
    }
  };
  solver.run(cfg.tEnd, cfg.dt, times, onSnapshot);

  const double boundaryFraction = solver.boundaryMassFraction();
  out.summary = {
      {"epsilon_norm", solver.epsilonNorm()},
      {"steps", solver.stepCount()},
      {"final_mass", solver.mass()},
      {"boundary_mass_fraction", boundaryFraction},
      {"boundary_warning", boundaryFraction > 1e-8},
      {"series_csv", "pde_series.csv"},
  };
  if (compare) {
    out.summary["comparison"] = {
        {"csv", "comparison.csv"},
        {"from_t", cfg.compareFromT},
        {"band_xi_max", cfg.bandXiMax},
        {"max_abs_diff", out.comparisonMaxDiff},
        {"cubic_tolerance", 10.0 * s.epsilon * s.epsilon * s.epsilon},
    };
  }
  return out;
}

}  // namespace

RunSummary runScenario(const Scenario& s, const fs::path& outDir) {
  s.validate();
  fs::create_directories(outDir);
  Timing timing;
  RunSummary summary;
  json& doc = summary.document;
  doc["scenario"] = s.toJson();

  ClassificationResult cr;
  stage("classify", timing, [&] { cr = classifyScenario(s, doc); });

  const bool wantProfile = s.engine == "profile" || s.engine == "both";
  const bool wantPde = s.engine == "pde" || s.engine == "both";
  const bool predictable = cr.gauge && cr.condA && cr.cls &&
                           cr.cls->trichotomy != Trichotomy::IdenticallyZero;
  if (cr.condA && cr.cls && cr.cls->trichotomy == Trichotomy::IdenticallyZero)
    doc["regime_note"] =
        "dissipation vanishes identically: modulus-conserving phase rotation, "
        "no decay predicted";
  if (!cr.gauge)
    doc["regime_note"] =
        "gauge invariance disabled: diagnostics only, no rate predictions";

  FrequencyGrid grid =
      FrequencyGrid::symmetric(s.profile.xiHalfWidth, s.profile.gridCount);
  InitialProfile init = InitialProfile::envelope(grid, s.profile.envelope,
                                                 s.epsilon, s.profile.t0,
                                                 s.profile.width);

  if (!cr.condA) {
    std::vector<double> xs(grid.count), psiSq(grid.count);
    for (int k = 0; k < grid.count; ++k) {
      xs[k] = grid.xi(k);
      psiSq[k] = std::norm(init.alpha0[k]) / (s.epsilon * s.epsilon);
    }
    const double bound = lifespanBound(xs, psiSq, cr.nu);
    doc["regime_note"] =
        "dissipation condition violated: only a finite lifespan bound applies";
    doc["scaled_log_lifespan_bound"] =
        std::isfinite(bound) ? json(bound) : json(nullptr);
  }

  if (wantProfile) {
    stage("simulate-profile", timing, [&] {
      double seriesEnd = s.logTEnd();
      if (predictable && std::isfinite(s.fit.endScaled))
        seriesEnd = std::max(seriesEnd, s.fit.endScaled / (s.epsilon * s.epsilon));

      SeriesEngine engine;
      if (s.profile.engine == "closed-form")
        engine = SeriesEngine::ClosedForm;
      else if (s.profile.engine == "rk4")
        engine = SeriesEngine::Rk4;
      else
        engine = seriesEnd > 700.0 ? SeriesEngine::ClosedForm : SeriesEngine::Rk4;
      if (engine == SeriesEngine::Rk4) {
        const double work = (seriesEnd - std::log(s.profile.t0)) /
                            std::numbers::ln10 * s.profile.stepsPerDecade *
                            static_cast<double>(s.profile.gridCount);
        if (work > 2e9)
          throw ValidationError(
              "rk4 series engine infeasible at this horizon; use closed-form");
      }

      const ProfileSeries series =
          simulateProfileSeries(init, cr.nu, s.epsilon, seriesEnd,
                                s.profile.samplesPerDecade, engine,
                                s.profile.stepsPerDecade);
      writeText(outDir / "profile_series.csv", profileSeriesCsv(series),
                summary.writtenFiles);
      doc["profile"] = {
          {"series_csv", "profile_series.csv"},
          {"engine", engine == SeriesEngine::ClosedForm ? "closed-form" : "rk4"},
          {"log10_t_end_effective", seriesEnd / std::numbers::ln10},
          {"samples", series.logT.size()},
          {"envelope_bound", init.envelopeA},
          {"l2_tail_bound", std::sqrt(l2TailBoundSq(init.envelopeA, grid.xiMax))},
      };

      if (predictable) {
        writeText(outDir / "reference_slopes.csv",
                  referenceSlopesCsv(series, s.epsilon, s.fit),
                  summary.writtenFiles);
        try {
          const FitReport fit = fitDecayExponent(series.decay(), s.fit);
          doc["fit"] = fit.toJson();
          const VerdictReport verdict =
              makeVerdict(*cr.cls, fit, s.verdictTolerance, s.residualThreshold);
          doc["verdict"] = verdict.toJson();
          doc["predicted_exponent"] = verdict.predicted;
          summary.hasVerdict = true;
          summary.verdictPass = verdict.pass;
        } catch (const ValidationError& e) {
          doc["fit"] = {{"skipped", e.what()}};
        }
      }
    });
  }

  if (wantPde) {
    stage("simulate-pde", timing, [&] {
      PdeOutputs out = runPdeStage(s, cr.nu, s.engine == "both");
      writeText(outDir / "pde_series.csv", out.seriesCsv, summary.writtenFiles);
      for (const auto& [name, text] : out.alphaFiles)
        writeText(outDir / name, text, summary.writtenFiles);
      if (!out.comparisonCsv.empty())
        writeText(outDir / "comparison.csv", out.comparisonCsv,
                  summary.writtenFiles);
      doc["pde"] = std::move(out.summary);
    });
  }

  writeText(outDir / "summary.json", doc.dump(2) + "\n", summary.writtenFiles);
  timing.write(outDir / "timing.log");
  return summary;
}

SweepConfig SweepConfig::fromJson(const json& j) {
  if (!j.is_object()) throw ValidationError("sweep config must be a JSON object");
  checkKeys(j, {"workers", "scenarios"}, "sweep");
  SweepConfig cfg;
  cfg.workers = getInt(j, "workers", cfg.workers);
  if (cfg.workers < 1) throw ValidationError("workers must be at least 1");
  if (!j.contains("scenarios") || !j["scenarios"].is_array() ||
      j["scenarios"].empty())
    throw ValidationError("sweep config needs a non-empty scenarios array");
  std::set<std::string> names;
  for (const json& sj : j["scenarios"]) {
    cfg.scenarios.push_back(Scenario::fromJson(sj));
    if (!names.insert(cfg.scenarios.back().name).second)
      throw ValidationError("duplicate scenario name '" +
                            cfg.scenarios.back().name + "' in sweep");
  }
  return cfg;
}

std::vector<SweepResult> runSweep(const SweepConfig& config,
                                  const fs::path& outDir) {
  const std::size_t count = config.scenarios.size();
  std::vector<SweepResult> results(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      SweepResult& r = results[i];
      r.name = config.scenarios[i].name;
      try {
        const RunSummary s =
            runScenario(config.scenarios[i], outDir / r.name);
        r.hasVerdict = s.hasVerdict;
        r.verdictPass = s.verdictPass;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int workers =
      std::max(1, std::min<int>(config.workers, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  return results;
}

}  // namespace dnls
