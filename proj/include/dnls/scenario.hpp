#ifndef DNLS_SCENARIO_HPP
#define DNLS_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/analysis.hpp"
#include "dnls/nonlinearity.hpp"

namespace dnls {

struct ProfileConfig {
  double xiHalfWidth = 20.0;
  int gridCount = 4096;
  double t0 = 2.0;
  EnvelopeKind envelope = EnvelopeKind::InverseSquare;
  double width = 2.0;
  /// Series samples per decade of log t (the decay variable).
  int samplesPerDecade = 16;
  /// RK4 steps per decade of t.
  int stepsPerDecade = 64;
  /// auto picks rk4 while exp(logTEnd) is representable, closed-form past.
  std::string engine = "auto";

  bool operator==(const ProfileConfig&) const = default;
};

struct PdeConfig {
  double boxHalfWidth = 200.0;
  int n = 2048;
  double dt = 0.02;
  double tEnd = 100.0;
  double width = 2.0;
  int seriesSamples = 81;
  /// Start time of the PDE-vs-profile comparison (engine "both").
  double compareFromT = 10.0;
  double bandXiMax = 5.0;
  std::vector<double> alphaSnapshots;

  bool operator==(const PdeConfig&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  std::string nonlinearityText;
  CubicNonlinearity nonlinearity;
  double epsilon = 0.05;
  std::string engine = "profile";
  bool allowNonGauge = false;
  std::uint64_t seed = 0;
  /// Horizon for the decay series (config keys t_end or log10_t_end; stored
  /// as the log10 so the echoed config round-trips exactly).  The series is
  /// extended to cover the fit window when the window ends later; the PDE
  /// horizon is pde.tEnd and is independent.
  double log10TEnd = 12.0;
  double logTEnd() const { return log10TEnd * std::numbers::ln10; }
  ProfileConfig profile;
  /// Default window spans 4.3 decades of log t so that interior samples can
  /// satisfy the 4-decade fit precondition.
  FitWindow fit{5.0, 1e5, 4.0, 10};
  double verdictTolerance = 0.03;
  double residualThreshold = 0.05;
  PdeConfig pde;

  static Scenario fromJson(const nlohmann::json& j);
  nlohmann::json toJson() const;
  void validate() const;

  bool operator==(const Scenario&) const;
};

struct RunSummary {
  nlohmann::json document;
  bool hasVerdict = false;
  bool verdictPass = false;
  std::vector<std::string> writtenFiles;
};

/// classify -> simulate -> fit -> verdict.  Writes summary.json plus the
/// series CSVs into outDir (created if missing); wall-clock timings go to
/// timing.log so every other artifact is byte-reproducible.  Errors are
/// rethrown with the failing stage prepended.
RunSummary runScenario(const Scenario& scenario,
                       const std::filesystem::path& outDir);

struct SweepConfig {
  std::vector<Scenario> scenarios;
  int workers = 1;

  static SweepConfig fromJson(const nlohmann::json& j);
};

struct SweepResult {
  std::string name;
  bool hasVerdict = false;
  bool verdictPass = false;
  std::string error;
};

/// Runs each scenario in a worker pool, each into outDir/<name>/.  Results
/// come back in scenario order; failures are captured per scenario rather
/// than aborting the batch.
std::vector<SweepResult> runSweep(const SweepConfig& config,
                                  const std::filesystem::path& outDir);

}  // namespace dnls

#endif
