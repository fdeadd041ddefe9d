#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "raterkit/clustering.hpp"

namespace raterkit::pipeline {

inline constexpr const char* kVersion = "0.1.0";

/// Stage outcome of a pipeline run.
struct RunOutcome {
  bool ok = true;
  std::string failed_stage;
  int error_code = 0;  // raterkit::Errc value of the failure, 99 when not a raterkit::Error
  std::string message;
  std::vector<std::string> stages_run;
  std::filesystem::path report_json;
  std::filesystem::path report_markdown;
};

/// Runs every stage whose config section is present. Relative paths resolve
/// against base_dir. The report and stage artifacts go to [output].dir.
RunOutcome run(const nlohmann::json& config, const std::filesystem::path& base_dir);
RunOutcome run_file(const std::filesystem::path& config_path);

/// Clustering of one stratum, for export.
struct StratumClustering {
  clustering::Stratum stratum;
  clustering::RerunResult result;
};

/// Per-stratum results of a clustering stage.
std::vector<StratumClustering> cluster_strata(const repr::VectorSet& vectors,
                                              const std::vector<clustering::Stratum>& strata,
                                              const clustering::ClusterConfig& config,
                                              const std::vector<std::uint64_t>& seeds,
                                              const std::function<repr::VectorSet(std::uint64_t seed,
                                                                                  const std::string& task)>& retrain = {});

/// CSV task_id,class,student_id,cluster using each stratum's first run.
void write_clusters(std::ostream& out, const std::vector<StratumClustering>& results);
nlohmann::ordered_json consistency_json(const std::vector<StratumClustering>& results,
                                        const std::vector<std::uint64_t>& seeds);

}  // namespace raterkit::pipeline
