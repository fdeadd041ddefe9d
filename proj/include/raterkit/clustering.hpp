#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raterkit/common.hpp"
#include "raterkit/corpus.hpp"
#include "raterkit/representations.hpp"

namespace raterkit::clustering {

inline constexpr int kUnlabeled = -1;

/// One task's responses sharing one correctness class. label is kUnlabeled
/// when strata are formed per task only.
struct Stratum {
  std::string task_id;
  int label = kUnlabeled;
  std::vector<ItemKey> members;  // canonical order

  std::string id() const;
};

struct StrataResult {
  std::vector<Stratum> strata;
  std::vector<std::pair<std::string, int>> empty;  // (task, class) with no members
};

StrataResult build_strata(const corpus::Corpus& corpus, const std::map<ItemKey, int>& labels);
/// One stratum per task over the ids present in the vector set.
StrataResult strata_by_task(const repr::VectorSet& vectors);

/// Rows gathered for one stratum, in canonical id order.
struct PointSet {
  std::vector<ItemKey> ids;
  std::vector<std::vector<double>> rows;

  static PointSet gather(const repr::VectorSet& vectors, const std::vector<ItemKey>& members);
  std::size_t size() const { return ids.size(); }
};

enum class Algorithm { kmeans, kmedoids };
enum class Distance { euclidean, cosine };
const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
Distance parse_distance(std::string_view name);

struct Clustering {
  std::vector<ItemKey> ids;
  std::vector<int> assignment;  // dense cluster indices, numbered by first appearance
  std::size_t k = 0;
  Algorithm algorithm = Algorithm::kmeans;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  /// K-means: within-cluster sum of squares after each assignment step.
  /// K-medoids: total distance to medoids after each assignment step.
  std::vector<double> objective;
  std::vector<std::size_t> medoids;  // k-medoids only, indices into ids
};

struct KMeansOptions {
  std::size_t max_iter = 100;
  double tol = 1e-9;
};

Clustering kmeans(const PointSet& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

struct KMedoidsOptions {
  Distance distance = Distance::euclidean;
  std::size_t max_iter = 100;
};

Clustering kmedoids(const PointSet& points, std::size_t k, std::uint64_t seed, const KMedoidsOptions& options = {});

double distance(Distance kind, const std::vector<double>& a, const std::vector<double>& b);

/// min(5, ceil(n / 10), n)
std::size_t default_k(std::size_t n);

struct ConsistencyScore {
  double value = 1.0;
  std::int64_t together_both = 0;
  std::int64_t apart_both = 0;
  std::int64_t disagree = 0;
  std::int64_t pairs() const { return together_both + apart_both + disagree; }
};

/// Fraction of unordered pairs whose same-cluster status agrees between the
/// two clusterings (the unadjusted Rand index). 1 when there are no pairs.
ConsistencyScore consistency(const Clustering& a, const Clustering& b);
ConsistencyScore consistency(const std::vector<int>& a, const std::vector<int>& b);

struct ClusterConfig {
  Algorithm algorithm = Algorithm::kmeans;
  std::optional<std::size_t> k;  // default_k when unset
  KMeansOptions kmeans{};
  KMedoidsOptions kmedoids{};
};

Clustering run_clustering(const PointSet& points, const ClusterConfig& config, std::uint64_t seed);

struct RerunResult {
  double mean = 1.0;
  std::vector<std::vector<double>> matrix;  // seeds x seeds
  std::vector<Clustering> runs;
};

/// Called before each run with that run's seed; returns fresh points for the
/// stratum (e.g. vectors from a retrained representation).
using RetrainHook = std::function<PointSet(std::uint64_t seed)>;

RerunResult rerun_consistency(const PointSet& points, const ClusterConfig& config,
                              const std::vector<std::uint64_t>& seeds, const RetrainHook& retrain = {});

}  // namespace raterkit::clustering
