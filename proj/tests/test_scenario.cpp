#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "dnls/errors.hpp"
#include "dnls/scenario.hpp"

using namespace dnls;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("dnls_scenario_" + tag)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimalConfig() { return json{{"nonlinearity", "-i*u*|ux|^2"}}; }

}  // namespace

TEST_CASE("config defaults") {
  const Scenario s = Scenario::fromJson(minimalConfig());
  CHECK(s.name == "scenario");
  CHECK(s.epsilon == 0.05);
  CHECK(s.engine == "profile");
  CHECK_FALSE(s.allowNonGauge);
  CHECK(s.log10TEnd == 12.0);
  CHECK(s.profile.xiHalfWidth == 20.0);
  CHECK(s.profile.gridCount == 4096);
  CHECK(s.profile.t0 == 2.0);
  CHECK(s.profile.samplesPerDecade == 16);
  CHECK(s.profile.engine == "auto");
  CHECK(s.fit.startScaled == 5.0);
  CHECK(s.fit.endScaled == 1e5);
  CHECK(s.fit.minSpanDecades == 4.0);
  CHECK(s.fit.minSamples == 10);
  CHECK(s.verdictTolerance == 0.03);
  CHECK(s.residualThreshold == 0.05);
  CHECK(s.pde.boxHalfWidth == 200.0);
  CHECK(s.pde.n == 2048);
  CHECK_NOTHROW(s.validate());
  CHECK(s.nonlinearityText == "-i*u*|ux|^2");
}

TEST_CASE("horizon accepts t_end or log10_t_end but not both") {
  json cfg = minimalConfig();
  cfg["t_end"] = 1e6;
  CHECK(Scenario::fromJson(cfg).log10TEnd == doctest::Approx(6.0).epsilon(1e-15));
  json cfg2 = minimalConfig();
  cfg2["log10_t_end"] = 9.0;
  CHECK(Scenario::fromJson(cfg2).log10TEnd == 9.0);
  json both = minimalConfig();
  both["t_end"] = 1e6;
  both["log10_t_end"] = 9.0;
  CHECK_THROWS_AS(Scenario::fromJson(both), ValidationError);
}

TEST_CASE("unknown keys are rejected everywhere") {
  json cfg = minimalConfig();
  cfg["bogus"] = 1;
  try {
    Scenario::fromJson(cfg);
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  json nested = minimalConfig();
  nested["profile"] = {{"grid_count", 128}, {"typo", true}};
  CHECK_THROWS_AS(Scenario::fromJson(nested), ValidationError);
  json nestedPde = minimalConfig();
  nestedPde["pde"] = {{"dx", 0.1}};
  CHECK_THROWS_AS(Scenario::fromJson(nestedPde), ValidationError);
  json nestedFit = minimalConfig();
  nestedFit["fit"] = {{"start", 5.0}};
  CHECK_THROWS_AS(Scenario::fromJson(nestedFit), ValidationError);
}

TEST_CASE("config round trips through its json echo") {
  json cfg{{"name", "round-trip_1"},
           {"nonlinearity", "-i*|ux|^2*(u + ux) + 3*u^2*ux"},
           {"epsilon", 0.1},
           {"engine", "both"},
           {"seed", 7},
           {"log10_t_end", 8.0},
           {"profile",
            {{"xi_half_width", 10.0},
             {"grid_count", 512},
             {"t0", 3.0},
             {"envelope", "gaussian"},
             {"width", 1.5},
             {"samples_per_decade", 8},
             {"steps_per_decade", 32},
             {"engine", "rk4"}}},
           {"fit",
            {{"start_scaled", 6.0},
             {"end_scaled", 2e5},
             {"min_span_decades", 3.0},
             {"min_samples", 12}}},
           {"verdict", {{"tolerance", 0.04}, {"residual_threshold", 0.06}}},
           {"pde",
            {{"box_half_width", 80.0},
             {"n", 512},
             {"dt", 0.01},
             {"t_end", 50.0},
             {"width", 2.5},
             {"series_samples", 21},
             {"compare_from_t", 5.0},
             {"band_xi_max", 4.0},
             {"alpha_snapshots", {0.0, 25.0, 50.0}}}}};
  const Scenario s = Scenario::fromJson(cfg);
  const json echo = s.toJson();
  CHECK(echo.contains("log10_t_end"));
  CHECK_FALSE(echo.contains("t_end"));
  const Scenario back = Scenario::fromJson(echo);
  CHECK(back == s);
  CHECK(back.toJson() == echo);

  Scenario tweaked = back;
  tweaked.epsilon = 0.2;
  CHECK_FALSE(tweaked == s);
}

TEST_CASE("scenario validation rejects bad settings") {
  auto withPatch = [](const char* key, json value) {
    json cfg = minimalConfig();
    cfg[key] = std::move(value);
    return Scenario::fromJson(cfg);
  };
  CHECK_THROWS_AS(withPatch("name", "has space"), ValidationError);
  CHECK_THROWS_AS(withPatch("name", ""), ValidationError);
  CHECK_THROWS_AS(withPatch("epsilon", 0.0), ValidationError);
  CHECK_THROWS_AS(withPatch("engine", "banana"), ValidationError);
  CHECK_THROWS_AS(withPatch("log10_t_end", 0.1), ValidationError);
  CHECK_THROWS_AS(withPatch("profile", json{{"t0", 1.5}}), ValidationError);
  CHECK_THROWS_AS(withPatch("profile", json{{"steps_per_decade", 8}}),
                  ValidationError);
  CHECK_THROWS_AS(withPatch("profile", json{{"engine", "euler"}}), ValidationError);
  CHECK_THROWS_AS(withPatch("pde", json{{"dt", -0.1}}), ValidationError);
  CHECK_THROWS_AS(withPatch("pde", json{{"compare_from_t", 500.0}}),
                  ValidationError);
  CHECK_THROWS_AS(withPatch("pde", json{{"n", 100}}), ValidationError);
  CHECK_THROWS_AS(withPatch("pde", json{{"alpha_snapshots", {5.0, 1.0}}}),
                  ValidationError);
  CHECK_THROWS_AS(withPatch("verdict", json{{"tolerance", 0.0}}), ValidationError);
}

TEST_CASE("full profile pipeline produces a passing verdict") {
  TempDir tmp("verdict");
  json cfg{{"name", "double-root-rate"},
           {"nonlinearity", "-i*u*|ux|^2"},
           {"epsilon", 0.1},
           {"profile", {{"grid_count", 65536}}}};
  const Scenario s = Scenario::fromJson(cfg);
  const RunSummary out = runScenario(s, tmp.path);
  CHECK(out.hasVerdict);
  CHECK(out.verdictPass);
  const json& doc = out.document;
  CHECK(doc["classification"]["trichotomy"] == "double-root");
  CHECK(doc["classification"]["cond_a"] == true);
  CHECK(doc["weakly_gauge_invariant"] == true);
  CHECK(doc["predicted_exponent"] == 0.25);
  CHECK(doc["profile"]["engine"] == "closed-form");
  const double fitted = doc["fit"]["exponent"].get<double>();
  CHECK(fitted == doctest::Approx(0.25).epsilon(0.12));
  CHECK(doc["verdict"]["pass"] == true);
  for (const char* f :
       {"summary.json", "profile_series.csv", "reference_slopes.csv", "timing.log"})
    CHECK(fs::exists(tmp.path / f));
  // CSV layouts
  const std::string series = slurp(tmp.path / "profile_series.csv");
  CHECK(series.rfind("log_t,t,l2_norm,max_node_modulus\n", 0) == 0);
  const std::string slopes = slurp(tmp.path / "reference_slopes.csv");
  CHECK(slopes.rfind("log_t,quarter,three_eighths,half\n", 0) == 0);
}

TEST_CASE("artifacts are byte reproducible") {
  TempDir a("det_a");
  TempDir b("det_b");
  json cfg{{"name", "det"},
           {"nonlinearity", "-i*u*|ux|^2"},
           {"epsilon", 0.1},
           {"profile", {{"grid_count", 2048}}}};
  const Scenario s = Scenario::fromJson(cfg);
  runScenario(s, a.path);
  runScenario(s, b.path);
  for (const char* f : {"summary.json", "profile_series.csv"})
    CHECK(slurp(a.path / f) == slurp(b.path / f));
}

TEST_CASE("non-gauge nonlinearities require the explicit override") {
  TempDir tmp("gauge");
  json cfg{{"name", "cube"},
           {"nonlinearity", "u^3"},
           {"log10_t_end", 2.0},
           {"profile", {{"grid_count", 256}}}};
  const Scenario refused = Scenario::fromJson(cfg);
  try {
    runScenario(refused, tmp.path);
    CHECK(false);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("classify:", 0) == 0);
    CHECK(msg.find("allow_non_gauge") != std::string::npos);
  }
  cfg["allow_non_gauge"] = true;
  const RunSummary out = runScenario(Scenario::fromJson(cfg), tmp.path);
  CHECK_FALSE(out.hasVerdict);
  const json& doc = out.document;
  CHECK(doc["weakly_gauge_invariant"] == false);
  CHECK(std::string(doc["regime_note"]).find("diagnostics only") !=
        std::string::npos);
  CHECK_FALSE(doc.contains("verdict"));
  CHECK(fs::exists(tmp.path / "profile_series.csv"));
}

TEST_CASE("identically zero dissipation is reported as phase rotation") {
  TempDir tmp("zero");
  json cfg{{"name", "rotation"},
           {"nonlinearity", "u^2*conj(u)"},
           {"log10_t_end", 2.0},
           {"profile", {{"grid_count", 256}}}};
  const RunSummary out = runScenario(Scenario::fromJson(cfg), tmp.path);
  CHECK_FALSE(out.hasVerdict);
  const json& doc = out.document;
  CHECK(doc["classification"]["trichotomy"] == "identically-zero");
  CHECK(std::string(doc["regime_note"]).find("vanishes identically") !=
        std::string::npos);
  CHECK_FALSE(doc.contains("fit"));
  // modulus-conserving: the series is flat
  const std::string series = slurp(tmp.path / "profile_series.csv");
  std::stringstream ss(series);
  std::string line;
  std::getline(ss, line);
  double first = -1.0;
  while (std::getline(ss, line)) {
    const auto c2 = line.find(',', line.find(',') + 1);
    const auto c3 = line.rfind(',');
    const double l2 = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
    if (first < 0.0) first = l2;
    CHECK(l2 == doctest::Approx(first).epsilon(1e-9));
  }
}

TEST_CASE("violated dissipation condition yields a lifespan bound") {
  TempDir tmp("lifespan");
  json cfg{{"name", "focusing"},
           {"nonlinearity", "i*|u|^2*u"},
           {"log10_t_end", 2.0},
           {"profile", {{"grid_count", 1024}}}};
  const RunSummary out = runScenario(Scenario::fromJson(cfg), tmp.path);
  CHECK_FALSE(out.hasVerdict);
  const json& doc = out.document;
  CHECK(doc["classification"]["cond_a"] == false);
  CHECK(doc["classification"].contains("witness"));
  CHECK(std::string(doc["regime_note"]).find("lifespan") != std::string::npos);
  CHECK(doc["scaled_log_lifespan_bound"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("pde engine writes its artifacts and matches the model") {
  TempDir tmp("pde");
  json cfg{{"name", "pde-smoke"},
           {"nonlinearity", "-i*|ux|^2*(u + ux) + 3*u^2*ux"},
           {"epsilon", 0.05},
           {"engine", "both"},
           {"log10_t_end", 2.0},
           {"profile", {{"grid_count", 512}, {"xi_half_width", 8.0}}},
           {"pde",
            {{"box_half_width", 100.0},
             {"n", 512},
             {"dt", 0.05},
             {"t_end", 15.0},
             {"series_samples", 12},
             {"compare_from_t", 5.0},
             {"band_xi_max", 4.0},
             {"alpha_snapshots", {0.0, 10.0}}}}};
  const RunSummary out = runScenario(Scenario::fromJson(cfg), tmp.path);
  for (const char* f : {"pde_series.csv", "comparison.csv", "alpha_0000.json",
                        "alpha_0001.json", "summary.json"})
    CHECK(fs::exists(tmp.path / f));
  const json& pde = out.document["pde"];
  CHECK(pde["steps"].get<long>() >= 300);
  CHECK(pde["final_mass"].get<double>() > 0.0);
  CHECK(pde["epsilon_norm"].get<double>() > 0.0);
  CHECK(pde["boundary_mass_fraction"].get<double>() < 0.01);
  const double diff = pde["comparison"]["max_abs_diff"].get<double>();
  const double tol = pde["comparison"]["cubic_tolerance"].get<double>();
  CHECK(tol == doctest::Approx(10.0 * 0.05 * 0.05 * 0.05).epsilon(1e-12));
  CHECK(diff < tol);
  const json snap = json::parse(slurp(tmp.path / "alpha_0001.json"));
  CHECK(snap["t"] == 10.0);
  CHECK(snap["xi"].size() == snap["alpha_abs"].size());
  CHECK(snap["xi"].size() > 0);
}

TEST_CASE("sweep config validation") {
  json cfg{{"workers", 2},
           {"scenarios", {minimalConfig(), minimalConfig()}}};
  CHECK_THROWS_AS(SweepConfig::fromJson(cfg), ValidationError);  // same name
  cfg["scenarios"][1]["name"] = "other";
  CHECK(SweepConfig::fromJson(cfg).scenarios.size() == 2);
  cfg["workers"] = 0;
  CHECK_THROWS_AS(SweepConfig::fromJson(cfg), ValidationError);
  json empty{{"scenarios", json::array()}};
  CHECK_THROWS_AS(SweepConfig::fromJson(empty), ValidationError);
}

TEST_CASE("sweep captures per-scenario failures without aborting") {
  TempDir tmp("sweep");
  json good{{"name", "ok"},
            {"nonlinearity", "u^2*conj(u)"},
            {"log10_t_end", 1.0},
            {"profile", {{"grid_count", 128}}}};
  json bad{{"name", "refused"},
           {"nonlinearity", "u^3"},
           {"log10_t_end", 1.0},
           {"profile", {{"grid_count", 128}}}};
  json cfg{{"workers", 2}, {"scenarios", {good, bad}}};
  const auto results = runSweep(SweepConfig::fromJson(cfg), tmp.path);
  REQUIRE(results.size() == 2);
  CHECK(results[0].name == "ok");
  CHECK(results[0].error.empty());
  CHECK_FALSE(results[0].hasVerdict);
  CHECK(results[1].name == "refused");
  CHECK(results[1].error.find("classify:") != std::string::npos);
  CHECK(fs::exists(tmp.path / "ok" / "summary.json"));
  CHECK_FALSE(fs::exists(tmp.path / "refused" / "summary.json"));
}
