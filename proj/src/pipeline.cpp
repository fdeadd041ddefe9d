#include "raterkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "raterkit/agreement.hpp"
#include "raterkit/allocation.hpp"
#include "raterkit/classifier.hpp"
#include "raterkit/config.hpp"
#include "raterkit/csv.hpp"
#include "raterkit/corpus.hpp"
#include "raterkit/random.hpp"
#include "raterkit/representations.hpp"

namespace raterkit::pipeline {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct StageFailure {
  std::string stage;
  std::string message;
};

/// Typed accessors over one config section.
class Section {
 public:
  Section(const nlohmann::json& root, std::string name) : name_(std::move(name)) {
    auto it = root.find(name_);
    if (it != root.end()) {
      if (!it->is_object()) {
        throw Error(Errc::invalid_argument, "config section [" + name_ + "] must be a table");
      }
      node_ = &*it;
    }
  }

  bool present() const { return node_ != nullptr; }
  bool has(const char* key) const { return node_ && node_->contains(key); }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!has(key)) {
      return fallback;
    }
    try {
      return node_->at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(Errc::invalid_argument, "config key " + name_ + "." + key + " has the wrong type");
    }
  }

  std::vector<std::string> strings(const char* key) const { return get<std::vector<std::string>>(key, {}); }

 private:
  std::string name_;
  const nlohmann::json* node_ = nullptr;
};

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::io, "cannot write '" + path.string() + "'");
  }
  out << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::io, "cannot write '" + path.string() + "'");
  }
  fn(out);
}

/// Resolves every path-valued key so the echoed config stands on its own.
nlohmann::json resolve_paths(nlohmann::json config, const fs::path& base_dir) {
  auto fix = [&](const char* section, const char* key) {
    if (config.contains(section) && config[section].contains(key) && config[section][key].is_string()) {
      fs::path p = config[section][key].get<std::string>();
      if (p.is_relative()) {
        p = base_dir / p;
      }
      config[section][key] = p.lexically_normal().string();
    }
  };
  fix("inputs", "responses");
  fix("inputs", "scores");
  fix("inputs", "vectors");
  fix("inputs", "split");
  fix("output", "dir");
  return config;
}

std::vector<std::vector<RaterRef>> comparisons_of(const std::vector<std::string>& specs) {
  std::vector<std::vector<RaterRef>> out;
  for (const auto& s : specs) {
    auto parsed = agreement::parse_comparisons(s);
    out.insert(out.end(), parsed.begin(), parsed.end());
  }
  return out;
}

agreement::DisplayNames names_of(const Section& s) {
  agreement::DisplayNames names;
  for (const auto& entry : s.strings("names")) {
    auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::invalid_argument, "agreement.names entries look like \"A=Rater A\"");
    }
    names[std::string(trim(entry.substr(0, eq)))] = std::string(trim(entry.substr(eq + 1)));
  }
  return names;
}

ojson reliability_section(const agreement::ReliabilityTable& table) {
  return ojson::parse(agreement::to_json(table));
}

std::string markdown_confusion(const agreement::ConfusionMatrix& cm) {
  std::string out = "| gold \\ predicted | 0 | 1 | 2 |\n|---|---|---|---|\n";
  for (int i = 0; i < cm.categories(); ++i) {
    out += "| " + std::to_string(i) + " |";
    for (int j = 0; j < cm.categories(); ++j) {
      out += " " + std::to_string(cm.at(i, j)) + " |";
    }
    out += "\n";
  }
  return out;
}

/// Default gold source: the first current-session rater, by id.
std::string default_gold(const corpus::Corpus& corpus) {
  for (const auto& r : corpus.raters()) {
    if (r.epoch == kDefaultEpoch) {
      return format_rater_ref(r);
    }
  }
  if (corpus.raters().empty()) {
    throw Error(Errc::invalid_argument, "no scores to take gold labels from");
  }
  return format_rater_ref(corpus.raters().front());
}

}  // namespace

std::vector<StratumClustering> cluster_strata(
    const repr::VectorSet& vectors, const std::vector<clustering::Stratum>& strata,
    const clustering::ClusterConfig& config, const std::vector<std::uint64_t>& seeds,
    const std::function<repr::VectorSet(std::uint64_t, const std::string&)>& retrain) {
  std::map<std::pair<std::uint64_t, std::string>, repr::VectorSet> cache;
  std::vector<StratumClustering> out;
  for (const auto& stratum : strata) {
    std::vector<std::uint64_t> stratum_seeds;
    for (auto s : seeds) {
      stratum_seeds.push_back(derive_seed(s, "cluster", stratum.id()));
    }
    clustering::RetrainHook hook;
    if (retrain) {
      // Hook seeds are the derived stratum seeds; map them back to run seeds
      // so every stratum of a task shares one retrained representation.
      hook = [&, stratum_seeds](std::uint64_t derived) {
        std::size_t run = static_cast<std::size_t>(
            std::find(stratum_seeds.begin(), stratum_seeds.end(), derived) - stratum_seeds.begin());
        const std::uint64_t run_seed = seeds[run];
        auto key = std::make_pair(run_seed, stratum.task_id);
        auto it = cache.find(key);
        if (it == cache.end()) {
          it = cache.emplace(key, retrain(run_seed, stratum.task_id)).first;
        }
        return clustering::PointSet::gather(it->second, stratum.members);
      };
    }
    auto points = clustering::PointSet::gather(vectors, stratum.members);
    if (stratum_seeds.size() == 1) {
      clustering::RerunResult single;
      single.runs.push_back(clustering::run_clustering(hook ? hook(stratum_seeds[0]) : points, config,
                                                       stratum_seeds[0]));
      single.matrix = {{1.0}};
      out.push_back({stratum, std::move(single)});
      continue;
    }
    out.push_back({stratum, clustering::rerun_consistency(points, config, stratum_seeds, hook)});
  }
  return out;
}

void write_clusters(std::ostream& out, const std::vector<StratumClustering>& results) {
  out << "task_id,class,student_id,cluster\n";
  for (const auto& r : results) {
    const auto& run = r.result.runs.front();
    const std::string cls = r.stratum.label == clustering::kUnlabeled ? "all" : std::to_string(r.stratum.label);
    for (std::size_t i = 0; i < run.ids.size(); ++i) {
      out << csv::join({r.stratum.task_id, cls, run.ids[i].student_id, std::to_string(run.assignment[i])}) << '\n';
    }
  }
}

ojson consistency_json(const std::vector<StratumClustering>& results, const std::vector<std::uint64_t>& seeds) {
  ojson strata = ojson::array();
  double sum = 0.0;
  for (const auto& r : results) {
    ojson s;
    s["stratum"] = r.stratum.id();
    s["task_id"] = r.stratum.task_id;
    s["class"] = r.stratum.label == clustering::kUnlabeled ? ojson("all") : ojson(r.stratum.label);
    s["n"] = r.stratum.members.size();
    s["k"] = r.result.runs.front().k;
    s["algorithm"] = clustering::algorithm_name(r.result.runs.front().algorithm);
    s["mean_consistency"] = r.result.runs.size() < 2 ? ojson(nullptr) : ojson(r.result.mean);
    s["pairwise"] = r.result.matrix;
    ojson iters = ojson::array();
    for (const auto& run : r.result.runs) {
      iters.push_back(run.iterations);
    }
    s["iterations"] = iters;
    strata.push_back(s);
    sum += r.result.mean;
  }
  ojson doc;
  doc["seeds"] = seeds;
  doc["strata"] = strata;
  const bool reruns = seeds.size() >= 2 && !results.empty();
  doc["mean_over_strata"] = reruns ? ojson(sum / static_cast<double>(results.size())) : ojson(nullptr);
  return doc;
}

RunOutcome run(const nlohmann::json& raw_config, const fs::path& base_dir) {
  RunOutcome outcome;
  const nlohmann::json config = resolve_paths(raw_config, base_dir);

  Section inputs(config, "inputs");
  Section output(config, "output");
  Section run_section(config, "run");
  if (!inputs.has("responses")) {
    throw Error(Errc::invalid_argument, "config needs inputs.responses");
  }
  const fs::path out_dir = output.get<std::string>("dir", (base_dir / "out").string());
  fs::create_directories(out_dir);
  const std::uint64_t master = run_section.get<std::uint64_t>("seed", 0);

  ojson report;
  report["generated_at"] = timestamp();
  report["toolkit_version"] = kVersion;
  report["config"] = ojson::parse(config.dump());
  std::string md = "# Scoring reliability report\n\n<!-- generated_at: " + report["generated_at"].get<std::string>() +
                   " -->\n\nToolkit version " + kVersion + ", master seed " + std::to_string(master) + ".\n";

  corpus::Corpus raw;
  corpus::Corpus corpus;
  std::optional<agreement::ReliabilityTable> human_table;
  std::optional<corpus::SplitAssignment> split;
  std::optional<repr::VectorSet> vectors;
  std::function<repr::VectorSet(std::uint64_t, const std::string&)> retrain;
  std::string stage;

  auto stage_run = [&](const std::string& name, auto&& body) {
    stage = name;
    body();
    outcome.stages_run.push_back(name);
  };

  try {
    stage_run("ingest", [&] {
      corpus::Corpus responses(corpus::load_responses(inputs.get<std::string>("responses", "")), {});
      raw = inputs.has("scores") ? corpus::load_scores(inputs.get<std::string>("scores", ""), responses) : responses;
      report["corpus"] = {{"responses", raw.responses().size()},
                          {"scores", raw.scores().size()},
                          {"students", [&] {
                             std::set<std::string> s;
                             for (const auto& r : raw.responses()) s.insert(r.student_id);
                             return s.size();
                           }()},
                          {"tasks", raw.task_ids()}};
    });

    stage_run("filter", [&] {
      Section earnest(config, "earnest");
      const auto min_tokens = earnest.get<std::size_t>("min_tokens", 1);
      auto filtered = corpus::earnest_filter(raw, min_tokens);
      corpus = std::move(filtered.corpus);
      report["corpus"]["min_tokens"] = min_tokens;
      report["corpus"]["responses_removed"] = filtered.removed.size();
      report["corpus"]["scores_dropped"] = filtered.scores_dropped;
      report["corpus"]["responses_retained"] = corpus.responses().size();
      md += "\n## Corpus\n\n" + std::to_string(raw.responses().size()) + " responses, " +
            std::to_string(raw.scores().size()) + " scores. Earnest filter (min_tokens = " +
            std::to_string(min_tokens) + ") removed " + std::to_string(filtered.removed.size()) +
            " responses and " + std::to_string(filtered.scores_dropped) + " scores.\n";
    });

    Section alloc(config, "allocation");
    if (alloc.present()) {
      stage_run("allocate", [&] {
        allocation::AllocationDesign design;
        design.raters = alloc.strings("raters");
        std::set<std::string> students;
        for (const auto& r : raw.responses()) {
          students.insert(r.student_id);
        }
        design.pool.assign(students.begin(), students.end());
        design.pair_size = alloc.get<std::size_t>("pair_size", 0);
        design.consensus_size = alloc.get<std::size_t>("consensus_size", 0);
        if (alloc.has("pinned_rater")) {
          allocation::PinnedConstraint pin;
          pin.rater_id = alloc.get<std::string>("pinned_rater", "");
          auto from = parse_rater_ref(alloc.get<std::string>("pinned_from", pin.rater_id));
          for (const auto& [key, label] : raw.labels_of(from)) {
            pin.required.insert(key.student_id);
          }
          pin.min_overlap = alloc.get<std::size_t>("min_overlap", 0);
          design.pinned = std::move(pin);
        }
        auto result = allocation::design_allocation(design, derive_seed(master, "allocation"));
        for (const auto& extra : alloc.strings("extend")) {
          result = allocation::extend_rater_all_shared(result, extra);
        }
        auto verification = allocation::verify_allocation(result, design);
        write_with(out_dir / "allocation.csv", [&](std::ostream& o) { allocation::write_allocation(o, result); });
        write_text(out_dir / "allocation_verification.json", verification.to_json() + "\n");

        // Yield after the earnest filter: students with at least one retained response.
        std::set<std::string> retained;
        for (const auto& r : corpus.responses()) {
          retained.insert(r.student_id);
        }
        ojson a;
        a["pool"] = design.pool.size();
        a["multi_rated"] = result.multi_rated().size();
        a["pass"] = verification.pass();
        a["checks"] = ojson::parse(verification.to_json())["checks"];
        ojson yields;
        std::size_t multi_yield = 0;
        for (const auto& s : result.multi_rated()) {
          multi_yield += retained.count(s);
        }
        for (const auto& [rater, set] : result.assigned) {
          std::size_t y = 0;
          for (const auto& s : set) {
            y += retained.count(s);
          }
          yields[rater] = {{"assigned", set.size()}, {"post_filter", y}};
        }
        a["post_filter_yield"] = yields;
        a["multi_rated_post_filter"] = multi_yield;
        report["allocation"] = a;
        md += "\n## Allocation\n\n| Check | Expected | Actual | Pass |\n|---|---|---|---|\n";
        for (const auto& c : verification.checks) {
          md += "| " + c.name + " | " + std::to_string(c.expected) + " | " + std::to_string(c.actual) + " | " +
                (c.pass ? "yes" : "no") + " |\n";
        }
        md += "\nMulti-rated students: " + std::to_string(result.multi_rated().size()) + " (" +
              std::to_string(multi_yield) + " after the earnest filter).\n";
      });
    }

    Section agree(config, "agreement");
    const auto names = names_of(agree);
    if (agree.present()) {
      stage_run("agreement", [&] {
        if (!inputs.has("scores")) {
          throw Error(Errc::invalid_argument, "agreement needs inputs.scores");
        }
        human_table = agreement::reliability_table(corpus, comparisons_of(agree.strings("comparisons")), names);
        write_text(out_dir / "reliability.json", agreement::to_json(*human_table) + "\n");
        write_text(out_dir / "reliability.md", agreement::to_markdown(*human_table));
        report["reliability"] = reliability_section(*human_table);
        md += "\n## Reliability among raters\n\n" + agreement::to_markdown(*human_table);
      });
    }

    Section split_section(config, "split");
    if (inputs.has("split")) {
      stage_run("split", [&] {
        const fs::path path = inputs.get<std::string>("split", "");
        std::ifstream in(path);
        if (!in) {
          throw Error(Errc::io, "cannot open split file '" + path.string() + "'");
        }
        split = corpus::read_split(in);
        auto sizes = split->sizes();
        report["split"] = {{"source", path.string()}, {"train", sizes[0]}, {"dev", sizes[1]}, {"test", sizes[2]},
                           {"reserve", sizes[3]}};
      });
    } else if (split_section.present()) {
      stage_run("split", [&] {
        auto ratios = split_section.get<std::vector<double>>(
            "ratios", {corpus::kDefaultProportions.begin(), corpus::kDefaultProportions.end()});
        if (ratios.size() != 4) {
          throw Error(Errc::invalid_argument, "split.ratios needs four values");
        }
        corpus::SplitProportions props{ratios[0], ratios[1], ratios[2], ratios[3]};
        std::vector<ItemKey> items;
        if (corpus.scores().empty()) {
          items = corpus.item_keys();
        } else {
          std::set<ItemKey> scored;
          for (const auto& s : corpus.scores()) {
            scored.insert(s.key());
          }
          items.assign(scored.begin(), scored.end());
        }
        auto rank = corpus::unanimity_rank(corpus);
        split = corpus::split_dataset(items, props, rank, derive_seed(master, "split"));
        write_with(out_dir / "split.csv", [&](std::ostream& o) { corpus::write_split(o, *split); });
        auto sizes = split->sizes();
        std::size_t unanimous_in_test = 0;
        for (const auto& key : split->members(corpus::Partition::test)) {
          unanimous_in_test += rank[key] >= 2;
        }
        report["split"] = {{"items", items.size()},
                           {"train", sizes[0]},
                           {"dev", sizes[1]},
                           {"test", sizes[2]},
                           {"reserve", sizes[3]},
                           {"test_unanimous", unanimous_in_test}};
        md += "\n## Split\n\n| train | dev | test | reserve |\n|---|---|---|---|\n| " + std::to_string(sizes[0]) +
              " | " + std::to_string(sizes[1]) + " | " + std::to_string(sizes[2]) + " | " +
              std::to_string(sizes[3]) + " |\n\n" + std::to_string(unanimous_in_test) +
              " test items carry unanimous scores from two or more raters.\n";
      });
    }

    Section rep(config, "representation");
    if (rep.present()) {
      stage_run("vectorize", [&] {
        const auto kind = rep.get<std::string>("kind", "tfidf");
        repr::TfidfOptions tfidf{rep.get<std::size_t>("min_df", 2)};
        ojson r;
        r["kind"] = kind;
        if (kind == "tfidf") {
          vectors = repr::tfidf_vectorize(repr::documents_of(corpus), std::nullopt, tfidf).vectors;
        } else if (kind == "wtmf") {
          repr::WtmfConfig wc;
          wc.dim = rep.get<std::size_t>("dim", 50);
          wc.lambda = rep.get<double>("lambda", 20.0);
          wc.w_missing = rep.get<double>("w_missing", 0.01);
          wc.sweeps = rep.get<std::size_t>("sweeps", 30);
          wc.tfidf = tfidf;
          wc.seed = derive_seed(master, "wtmf");
          const bool pooled = rep.get<bool>("pooled", false);
          vectors = repr::wtmf_vectors(corpus, wc, pooled);
          r["pooled"] = pooled;
          retrain = [wc, pooled, &corpus](std::uint64_t run_seed, const std::string& task) {
            auto cfg = wc;
            cfg.seed = derive_seed(run_seed, "wtmf-retrain", pooled ? "pooled" : task);
            return repr::wtmf_train(repr::documents_of(corpus, pooled ? std::nullopt : std::optional(task)), cfg)
                .sentence_vectors();
          };
        } else if (kind == "external") {
          if (!inputs.has("vectors")) {
            throw Error(Errc::invalid_argument, "representation.kind = external needs inputs.vectors");
          }
          std::optional<std::size_t> dim;
          if (rep.has("dim")) {
            dim = rep.get<std::size_t>("dim", 0);
          }
          vectors = repr::load_vectors(inputs.get<std::string>("vectors", ""), dim);
        } else {
          throw Error(Errc::invalid_argument, "unknown representation kind '" + kind + "'");
        }
        r["dim"] = vectors->dim();
        r["count"] = vectors->size();
        r["degenerate"] = vectors->degenerate().size();
        report["representation"] = r;
        write_with(out_dir / "vectors.tsv", [&](std::ostream& o) { repr::write_vectors(o, *vectors); });
        md += "\n## Representation\n\n" + kind + " vectors: " + std::to_string(vectors->size()) + " items, D = " +
              std::to_string(vectors->dim()) + ".\n";
      });
    }

    Section cls(config, "classifier");
    if (cls.present()) {
      stage_run("train", [&] {
        if (!vectors || !split) {
          throw Error(Errc::invalid_argument, "classifier needs [representation] and [split]");
        }
        auto source = corpus::LabelSource::parse(cls.has("gold") ? cls.get<std::string>("gold", "") : default_gold(corpus));
        auto gold = corpus::resolve_labels(corpus, source);
        classifier::TrainConfig tc;
        tc.learning_rate = cls.get<double>("learning_rate", tc.learning_rate);
        tc.l2_penalty = cls.get<double>("l2_penalty", tc.l2_penalty);
        tc.max_epochs = cls.get<std::size_t>("max_epochs", tc.max_epochs);
        tc.tolerance = cls.get<double>("tolerance", tc.tolerance);
        tc.seed = derive_seed(master, "classifier");
        // Gold may be missing for some split items when a single rater is used.
        corpus::SplitAssignment usable;
        for (const auto& [key, p] : split->partition) {
          if (gold.count(key) && vectors->find(key)) {
            usable.partition.emplace(key, p);
          }
        }
        auto model = classifier::train_softmax(*vectors, gold, usable, tc);
        write_text(out_dir / "model.json", classifier::model_to_json(model) + "\n");

        repr::VectorSet test_vectors(vectors->dim(), vectors->provenance());
        for (const auto& key : usable.members(corpus::Partition::test)) {
          test_vectors.add(key, *vectors->find(key));
        }
        auto predictions = classifier::predict(model, test_vectors);
        write_with(out_dir / "predictions.csv", [&](std::ostream& o) { classifier::write_predictions(o, predictions); });

        ojson c;
        c["gold"] = source.describe();
        c["epochs_run"] = model.epochs_run;
        c["final_loss"] = model.final_loss;
        md += "\n## Algorithmic rater\n\nGold labels: " + source.describe() + ". Trained for " +
              std::to_string(model.epochs_run) + " epochs (final loss " + fixed(model.final_loss) + ").\n";
        for (auto p : {corpus::Partition::train, corpus::Partition::dev, corpus::Partition::test}) {
          auto items = usable.members(p);
          if (items.empty()) {
            continue;
          }
          auto eval = classifier::evaluate(model, *vectors, gold, items);
          c[std::string(corpus::partition_name(p)) + "_accuracy"] = eval.accuracy;
          md += "\n" + std::string(corpus::partition_name(p)) + " accuracy: " + fixed(eval.accuracy) + " (" +
                std::to_string(eval.n_items) + " items)\n";
          if (p == corpus::Partition::test) {
            md += "\n" + markdown_confusion(eval.confusion);
            ojson m = ojson::array();
            for (int i = 0; i < 3; ++i) {
              m.push_back({eval.confusion.at(i, 0), eval.confusion.at(i, 1), eval.confusion.at(i, 2)});
            }
            c["test_confusion_matrix"] = m;
          }
        }
        report["classifier"] = c;

        const auto machine = cls.get<std::string>("machine_rater", "");
        if (!machine.empty()) {
          auto records = classifier::as_rater(predictions, machine, cls.get<std::string>("machine_epoch",
                                                                                          std::string(kDefaultEpoch)));
          auto augmented = corpus.with_scores(records);
          auto all = comparisons_of(agree.strings("comparisons"));
          auto extra = comparisons_of(cls.strings("comparisons"));
          all.insert(all.end(), extra.begin(), extra.end());
          if (all.empty()) {
            // Every current-session human against the machine, then all of them together.
            const RaterRef m{machine, cls.get<std::string>("machine_epoch", std::string(kDefaultEpoch))};
            std::vector<RaterRef> group;
            for (const auto& r : corpus.raters()) {
              if (r.epoch == kDefaultEpoch && r != m) {
                all.push_back({r, m});
                group.push_back(r);
              }
            }
            if (group.size() >= 2) {
              group.push_back(m);
              all.push_back(group);
            }
          }
          if (!all.empty()) {
            auto table = agreement::reliability_table(augmented, all, names);
            write_text(out_dir / "reliability_with_machine.json", agreement::to_json(table) + "\n");
            write_text(out_dir / "reliability_with_machine.md", agreement::to_markdown(table));
            report["reliability_with_machine"] = reliability_section(table);
            md += "\n## Reliability including the algorithmic rater\n\n" + agreement::to_markdown(table);
          }
        }
      });
    }

    Section clu(config, "clustering");
    if (clu.present()) {
      stage_run("cluster", [&] {
        if (!vectors) {
          throw Error(Errc::invalid_argument, "clustering needs [representation]");
        }
        clustering::ClusterConfig cc;
        cc.algorithm = clustering::parse_algorithm(clu.get<std::string>("algorithm", "kmeans"));
        if (clu.get<std::size_t>("k", 0) > 0) {
          cc.k = clu.get<std::size_t>("k", 0);
        }
        cc.kmeans.max_iter = clu.get<std::size_t>("max_iter", 100);
        cc.kmeans.tol = clu.get<double>("tol", 1e-9);
        cc.kmedoids.max_iter = cc.kmeans.max_iter;
        cc.kmedoids.distance = clustering::parse_distance(clu.get<std::string>("distance", "euclidean"));
        auto seeds = clu.get<std::vector<std::uint64_t>>("seeds", {});
        if (seeds.empty()) {
          seeds = {derive_seed(master, "cluster-run", "0"), derive_seed(master, "cluster-run", "1")};
        }
        clustering::StrataResult strata;
        std::string label_desc = "per task";
        if (!corpus.scores().empty()) {
          auto source = corpus::LabelSource::parse(clu.has("labels") ? clu.get<std::string>("labels", "") : default_gold(corpus));
          label_desc = source.describe();
          strata = clustering::build_strata(corpus, corpus::resolve_labels(corpus, source));
        } else {
          strata = clustering::strata_by_task(*vectors);
        }
        const bool use_retrain = clu.get<bool>("retrain", false);
        if (use_retrain && !retrain) {
          throw Error(Errc::invalid_argument, "clustering.retrain needs representation.kind = wtmf");
        }
        auto results = cluster_strata(*vectors, strata.strata, cc, seeds, use_retrain ? retrain : nullptr);
        write_with(out_dir / "clusters.csv", [&](std::ostream& o) { write_clusters(o, results); });
        auto cj = consistency_json(results, seeds);
        cj["labels"] = label_desc;
        cj["retrain"] = use_retrain;
        ojson empty = ojson::array();
        for (const auto& [task, label] : strata.empty) {
          empty.push_back(task + "/" + std::to_string(label));
        }
        cj["empty_strata"] = empty;
        write_text(out_dir / "consistency.json", cj.dump(2) + "\n");
        report["clustering"] = cj;
        md += "\n## Clustering\n\nAlgorithm " + std::string(clustering::algorithm_name(cc.algorithm)) +
              ", strata from " + label_desc + (use_retrain ? ", representation retrained per run" : "") +
              ".\n\n| Stratum | n | k | Mean consistency |\n|---|---|---|---|\n";
        for (const auto& r : results) {
          md += "| " + r.stratum.id() + " | " + std::to_string(r.stratum.members.size()) + " | " +
                std::to_string(r.result.runs.front().k) + " | " + fixed(r.result.mean) + " |\n";
        }
      });
    }
  } catch (const std::exception& e) {
    outcome.ok = false;
    auto* err = dynamic_cast<const Error*>(&e);
    outcome.error_code = err ? static_cast<int>(err->code()) : 99;
    outcome.failed_stage = stage;
    outcome.message = e.what();
    report["failure"] = {{"stage", stage}, {"message", e.what()}};
    md += "\n## Failure\n\nStage `" + stage + "` failed: " + e.what() + "\n";
  }

  report["stages"] = outcome.stages_run;
  outcome.report_json = out_dir / "report.json";
  outcome.report_markdown = out_dir / "report.md";
  write_text(outcome.report_json, report.dump(2) + "\n");
  write_text(outcome.report_markdown, md);
  write_text(out_dir / "config.echo.json", config.dump(2) + "\n");
  return outcome;
}

RunOutcome run_file(const fs::path& config_path) {
  auto config = config::load(config_path);
  auto base = config_path.parent_path();
  if (base.empty()) {
    base = ".";
  }
  return run(config, fs::absolute(base));
}

}  // namespace raterkit::pipeline
