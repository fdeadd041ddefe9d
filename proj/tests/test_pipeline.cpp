#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "raterkit/config.hpp"
#include "raterkit/pipeline.hpp"

using namespace raterkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fixtures() { return RATERKIT_FIXTURE_DIR; }

fs::path fresh(const std::string& name) {
  auto dir = fs::path(RATERKIT_SCRATCH_DIR) / ("pipeline-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

json base_config(const fs::path& out) {
  json c;
  c["inputs"]["responses"] = "responses.jsonl";
  c["inputs"]["scores"] = "scores.csv";
  c["output"]["dir"] = out.string();
  c["run"]["seed"] = 7;
  return c;
}

}  // namespace

TEST_CASE("agreement-only config skips later stages") {
  auto out = fresh("agreement");
  auto c = base_config(out);
  c["agreement"]["comparisons"] = {"A:C", "A,C,D"};
  auto r = pipeline::run(c, fixtures());
  CHECK(r.ok);
  CHECK(r.stages_run == std::vector<std::string>{"ingest", "filter", "agreement"});
  auto report = read_json(r.report_json);
  CHECK(report.contains("reliability"));
  CHECK_FALSE(report.contains("classifier"));
  CHECK_FALSE(report.contains("clustering"));
  CHECK(report["toolkit_version"] == pipeline::kVersion);
  CHECK(fs::exists(out / "reliability.md"));
  CHECK(fs::path(report["config"]["inputs"]["responses"].get<std::string>()).is_absolute());
}

TEST_CASE("full fixture config produces every section") {
  auto out = fresh("full");
  auto c = config::load(fixtures() / "pipeline.toml");
  c["output"]["dir"] = out.string();
  auto r = pipeline::run(c, fixtures());
  REQUIRE_MESSAGE(r.ok, r.message);
  auto report = read_json(r.report_json);
  for (const char* key : {"corpus", "allocation", "reliability", "split", "representation", "classifier",
                          "reliability_with_machine", "clustering"}) {
    CHECK_MESSAGE(report.contains(key), key);
  }
  for (const char* file : {"allocation.csv", "split.csv", "vectors.tsv", "model.json", "predictions.csv",
                           "clusters.csv", "consistency.json", "report.md", "config.echo.json"}) {
    CHECK_MESSAGE(fs::exists(out / file), file);
  }
  CHECK(report["allocation"]["pass"] == true);
  CHECK(report["corpus"]["responses_removed"].get<int>() > 0);
}

TEST_CASE("stage failure names the stage and stops") {
  auto out = fresh("failure");
  auto c = base_config(out);
  c["inputs"]["vectors"] = "does-not-exist.tsv";
  c["split"] = json::object();
  c["representation"]["kind"] = "external";
  c["classifier"] = json::object();
  c["clustering"] = json::object();
  auto r = pipeline::run(c, fixtures());
  CHECK_FALSE(r.ok);
  CHECK(r.failed_stage == "vectorize");
  CHECK(r.error_code == static_cast<int>(Errc::io));
  CHECK(r.stages_run == std::vector<std::string>{"ingest", "filter", "split"});
  auto report = read_json(r.report_json);
  CHECK(report["failure"]["stage"] == "vectorize");
  CHECK(report["failure"]["message"].get<std::string>().find("does-not-exist.tsv") != std::string::npos);
  CHECK_FALSE(report.contains("classifier"));
  std::ifstream md(r.report_markdown);
  std::stringstream ss;
  ss << md.rdbuf();
  CHECK(ss.str().find("Stage `vectorize` failed") != std::string::npos);
}

TEST_CASE("clustering per task on external vectors without scores") {
  auto out = fresh("vectors");
  // Vectors from a first run feed the second.
  auto c = base_config(out);
  c["representation"]["kind"] = "tfidf";
  REQUIRE(pipeline::run(c, fixtures()).ok);

  auto out2 = fresh("vectors2");
  json d;
  d["inputs"]["responses"] = (fixtures() / "responses.jsonl").string();
  d["inputs"]["vectors"] = (out / "vectors.tsv").string();
  d["output"]["dir"] = out2.string();
  d["representation"]["kind"] = "external";
  d["clustering"]["k"] = 4;
  d["clustering"]["seeds"] = {1, 2};
  auto r = pipeline::run(d, fixtures());
  REQUIRE_MESSAGE(r.ok, r.message);
  auto cons = read_json(out2 / "consistency.json");
  CHECK(cons["strata"].size() == 4);
  CHECK(cons["strata"][0]["class"] == "all");
  CHECK(cons["strata"][0]["k"] == 4);
  CHECK(cons["strata"][0]["pairwise"].size() == 2);
}

TEST_CASE("wtmf retraining path") {
  auto out = fresh("wtmf");
  auto c = base_config(out);
  c["representation"] = {{"kind", "wtmf"}, {"dim", 5}, {"lambda", 0.5}, {"sweeps", 5}};
  c["clustering"] = {{"algorithm", "kmedoids"}, {"distance", "cosine"}, {"seeds", {1, 2}}, {"retrain", true},
                     {"labels", "consensus"}};
  auto r = pipeline::run(c, fixtures());
  REQUIRE_MESSAGE(r.ok, r.message);
  auto cons = read_json(out / "consistency.json");
  CHECK(cons["retrain"] == true);
  CHECK(cons["strata"].size() == 12);
  for (const auto& s : cons["strata"]) {
    CHECK(s["mean_consistency"].get<double>() >= 0.0);
    CHECK(s["mean_consistency"].get<double>() <= 1.0);
  }
  auto r2 = pipeline::run(c, fixtures());
  CHECK(read_json(out / "consistency.json") == cons);
}
