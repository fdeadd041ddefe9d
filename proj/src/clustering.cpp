#include "raterkit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "raterkit/random.hpp"

namespace raterkit::clustering {
namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_k(std::size_t k, std::size_t n) {
  if (k < 1) {
    throw Error(Errc::invalid_argument, "k must be at least 1");
  }
  if (k > n) {
    throw Error(Errc::invalid_argument, "k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                            " points in the stratum");
  }
}

std::vector<std::size_t> distinct_draws(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.below(n - i)]);
  }
  idx.resize(k);
  return idx;
}

/// Renumbers clusters by order of first appearance.
std::vector<int> relabel(const std::vector<int>& assignment) {
  std::map<int, int> mapping;
  std::vector<int> out;
  out.reserve(assignment.size());
  for (int c : assignment) {
    auto it = mapping.emplace(c, static_cast<int>(mapping.size())).first;
    out.push_back(it->second);
  }
  return out;
}

std::int64_t choose2(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

std::string Stratum::id() const {
  return label == kUnlabeled ? task_id + "/all" : task_id + "/" + std::to_string(label);
}

StrataResult build_strata(const corpus::Corpus& corpus, const std::map<ItemKey, int>& labels) {
  StrataResult out;
  std::map<std::pair<std::string, int>, std::vector<ItemKey>> groups;
  for (const auto& [key, label] : labels) {
    if (corpus.contains(key)) {
      groups[{key.task_id, label}].push_back(key);
    }
  }
  for (const auto& task : corpus.task_ids()) {
    for (int label = 0; label < kNumLabels; ++label) {
      auto it = groups.find({task, label});
      if (it == groups.end()) {
        out.empty.emplace_back(task, label);
        continue;
      }
      out.strata.push_back({task, label, it->second});
    }
  }
  return out;
}

StrataResult strata_by_task(const repr::VectorSet& vectors) {
  std::map<std::string, std::vector<ItemKey>> groups;
  for (const auto& [key, v] : vectors.entries()) {
    groups[key.task_id].push_back(key);
  }
  StrataResult out;
  for (auto& [task, members] : groups) {
    out.strata.push_back({task, kUnlabeled, std::move(members)});
  }
  return out;
}

PointSet PointSet::gather(const repr::VectorSet& vectors, const std::vector<ItemKey>& members) {
  PointSet ps;
  ps.ids = members;
  std::sort(ps.ids.begin(), ps.ids.end());
  for (const auto& key : ps.ids) {
    const auto* v = vectors.find(key);
    if (!v) {
      throw Error(Errc::not_found, "no vector for " + to_string(key));
    }
    ps.rows.push_back(*v);
  }
  return ps;
}

const char* algorithm_name(Algorithm a) { return a == Algorithm::kmeans ? "kmeans" : "kmedoids"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "kmeans") {
    return Algorithm::kmeans;
  }
  if (name == "kmedoids") {
    return Algorithm::kmedoids;
  }
  throw Error(Errc::invalid_argument, "unknown clustering algorithm '" + std::string(name) + "'");
}

Distance parse_distance(std::string_view name) {
  if (name == "euclidean") {
    return Distance::euclidean;
  }
  if (name == "cosine") {
    return Distance::cosine;
  }
  throw Error(Errc::invalid_argument, "unknown distance '" + std::string(name) + "'");
}

double distance(Distance kind, const std::vector<double>& a, const std::vector<double>& b) {
  if (kind == Distance::euclidean) {
    return std::sqrt(squared_distance(a, b));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    // Zero vectors have no direction: identical to each other, far from the rest.
    return na == nb ? 0.0 : 1.0;
  }
  const double cos = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
  return 1.0 - cos;
}

std::size_t default_k(std::size_t n) {
  return std::min({std::size_t{5}, (n + 9) / 10, n});
}

Clustering kmeans(const PointSet& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  const std::size_t n = points.size();
  check_k(k, n);
  const std::size_t dim = points.rows.front().size();
  Rng rng(derive_seed(seed, "kmeans"));
  std::vector<std::vector<double>> centroids;
  for (std::size_t i : distinct_draws(n, k, rng)) {
    centroids.push_back(points.rows[i]);
  }

  Clustering out;
  out.ids = points.ids;
  out.k = k;
  out.algorithm = Algorithm::kmeans;
  out.seed = seed;
  std::vector<int> assign(n, -1);
  std::vector<int> previous;
  std::vector<double> dist(n, 0.0);

  for (std::size_t iter = 1; iter <= std::max<std::size_t>(options.max_iter, 1); ++iter) {
    out.iterations = iter;
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points.rows[i], centroids[c]);
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      assign[i] = best_c;
      dist[i] = best;
      ++sizes[static_cast<std::size_t>(best_c)];
    }
    // Empty clusters take the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) {
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(assign[i])] > 1 && (far == n || dist[i] > dist[far])) {
          far = i;
        }
      }
      --sizes[static_cast<std::size_t>(assign[far])];
      assign[far] = static_cast<int>(c);
      sizes[c] = 1;
      dist[far] = 0.0;
      centroids[c] = points.rows[far];
    }
    out.objective.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));
    if (assign == previous) {
      break;
    }
    previous = assign;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(assign[i])];
      for (std::size_t j = 0; j < dim; ++j) {
        s[j] += points.rows[i][j];
      }
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (auto& v : sums[c]) {
        v /= static_cast<double>(sizes[c]);
      }
      shift = std::max(shift, std::sqrt(squared_distance(sums[c], centroids[c])));
      centroids[c] = std::move(sums[c]);
    }
    if (shift < options.tol) {
      break;
    }
  }
  out.assignment = relabel(assign);
  return out;
}

Clustering kmedoids(const PointSet& points, std::size_t k, std::uint64_t seed, const KMedoidsOptions& options) {
  const std::size_t n = points.size();
  check_k(k, n);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i * n + j] = d[j * n + i] = distance(options.distance, points.rows[i], points.rows[j]);
    }
  }
  auto dist = [&](std::size_t i, std::size_t j) { return d[i * n + j]; };

  // Seeded first medoid, then greedy additions that most reduce total cost.
  Rng rng(derive_seed(seed, "kmedoids"));
  std::vector<std::size_t> medoids{rng.below(n)};
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = dist(i, medoids[0]);
  }
  while (medoids.size() < k) {
    std::size_t best = n;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) {
        continue;
      }
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cost += std::min(nearest[i], dist(i, cand));
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = cand;
      }
    }
    medoids.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], dist(i, best));
    }
  }
  std::sort(medoids.begin(), medoids.end());

  Clustering out;
  out.ids = points.ids;
  out.k = k;
  out.algorithm = Algorithm::kmedoids;
  out.seed = seed;
  std::vector<int> assign(n, 0);
  for (std::size_t iter = 1; iter <= std::max<std::size_t>(options.max_iter, 1); ++iter) {
    out.iterations = iter;
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto own = std::find(medoids.begin(), medoids.end(), i);
      if (own != medoids.end()) {
        assign[i] = static_cast<int>(own - medoids.begin());
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        if (dist(i, medoids[c]) < best) {
          best = dist(i, medoids[c]);
          assign[i] = static_cast<int>(c);
        }
      }
      cost += best;
    }
    out.objective.push_back(cost);

    std::vector<std::size_t> next(k);
    for (std::size_t c = 0; c < k; ++c) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t cand = 0; cand < n; ++cand) {
        if (assign[cand] != static_cast<int>(c)) {
          continue;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (assign[i] == static_cast<int>(c)) {
            total += dist(cand, i);
          }
        }
        if (total < best) {
          best = total;
          next[c] = cand;
        }
      }
    }
    std::sort(next.begin(), next.end());
    if (next == medoids) {
      break;
    }
    medoids = std::move(next);
  }
  // Report the medoids in the order of the final (relabelled) clusters.
  out.assignment = relabel(assign);
  out.medoids.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    out.medoids[static_cast<std::size_t>(out.assignment[medoids[c]])] = medoids[c];
  }
  return out;
}

ConsistencyScore consistency(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::invalid_argument, "clusterings cover different numbers of items");
  }
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> ca;
  std::map<int, std::int64_t> cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  std::int64_t both = 0;
  std::int64_t in_a = 0;
  std::int64_t in_b = 0;
  for (const auto& [key, c] : joint) {
    both += choose2(c);
  }
  for (const auto& [key, c] : ca) {
    in_a += choose2(c);
  }
  for (const auto& [key, c] : cb) {
    in_b += choose2(c);
  }
  const std::int64_t total = choose2(static_cast<std::int64_t>(a.size()));
  ConsistencyScore s;
  s.together_both = both;
  s.disagree = in_a + in_b - 2 * both;
  s.apart_both = total - in_a - in_b + both;
  s.value = total == 0 ? 1.0 : static_cast<double>(s.together_both + s.apart_both) / static_cast<double>(total);
  return s;
}

ConsistencyScore consistency(const Clustering& a, const Clustering& b) {
  if (a.ids != b.ids) {
    throw Error(Errc::invalid_argument, "clusterings cover different member sets");
  }
  return consistency(a.assignment, b.assignment);
}

Clustering run_clustering(const PointSet& points, const ClusterConfig& config, std::uint64_t seed) {
  const std::size_t k = config.k ? std::min(*config.k, points.size()) : default_k(points.size());
  if (config.algorithm == Algorithm::kmeans) {
    return kmeans(points, k, seed, config.kmeans);
  }
  return kmedoids(points, k, seed, config.kmedoids);
}

RerunResult rerun_consistency(const PointSet& points, const ClusterConfig& config,
                              const std::vector<std::uint64_t>& seeds, const RetrainHook& retrain) {
  if (seeds.size() < 2) {
    throw Error(Errc::invalid_argument, "rerun consistency needs at least 2 seeds");
  }
  RerunResult out;
  for (auto seed : seeds) {
    if (retrain) {
      out.runs.push_back(run_clustering(retrain(seed), config, seed));
    } else {
      out.runs.push_back(run_clustering(points, config, seed));
    }
  }
  const std::size_t m = seeds.size();
  out.matrix.assign(m, std::vector<double>(m, 1.0));
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = consistency(out.runs[i], out.runs[j]).value;
      out.matrix[i][j] = out.matrix[j][i] = v;
      sum += v;
    }
  }
  out.mean = sum / static_cast<double>(m * (m - 1) / 2);
  return out;
}

}  // namespace raterkit::clustering
