// Command-line front end. Talks to the library only through raterkit.h.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raterkit/raterkit.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Owned {
  char* p = nullptr;
  ~Owned() { rk_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int report_error(rk_status status) {
  std::cerr << "error (" << rk_status_name(status) << "): " << rk_last_error() << "\n";
  return status == RK_ERR_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
}

/// Flags shared by every subcommand, plus the subcommand-specific values that
/// end up in the run config.
struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string responses;
  std::string scores;
  std::string vectors;
  std::string split_file;
  std::size_t min_tokens = 1;

  // allocate
  std::vector<std::string> raters;
  std::size_t pair_size = 0;
  std::size_t consensus_size = 0;
  std::vector<std::string> extend;
  std::string pinned_rater;
  std::string pinned_from;
  std::size_t min_overlap = 0;
  std::size_t pool_size = 0;

  // agreement
  std::vector<std::string> pairs;
  std::vector<std::string> triples;
  std::vector<std::string> compare;
  std::vector<std::string> names;

  // split
  std::vector<double> ratios;

  // representation
  std::string kind;
  std::size_t min_df = 2;
  std::size_t dim = 50;
  double lambda = 20.0;
  double w_missing = 0.01;
  std::size_t sweeps = 30;
  bool pooled = false;

  // classifier
  std::string gold;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t max_epochs = 500;
  std::string machine_rater;

  // clustering
  std::string algorithm;
  std::string distance;
  std::size_t k = 0;
  std::vector<std::uint64_t> seeds;
  std::string labels;
  bool retrain = false;
};

bool given(const CLI::App* app, const char* name) {
  try {
    return app->get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Run config (TOML subset or JSON)");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--responses", f.responses, "Responses JSONL");
  sub->add_option("--scores", f.scores, "Scores CSV");
  sub->add_option("--min-tokens", f.min_tokens, "Earnest filter threshold");
}

void add_representation(CLI::App* sub, Flags& f, bool with_kind) {
  sub->add_option("--vectors", f.vectors, "External vectors TSV");
  if (with_kind) {
    sub->add_option("--kind", f.kind, "tfidf | wtmf | external")->check(CLI::IsMember({"tfidf", "wtmf", "external"}));
  }
  sub->add_option("--min-df", f.min_df, "Minimum document frequency");
  sub->add_option("--dim", f.dim, "WTMF dimension");
  sub->add_option("--lambda", f.lambda, "WTMF regularization");
  sub->add_option("--w-missing", f.w_missing, "WTMF weight of missing cells");
  sub->add_option("--sweeps", f.sweeps, "WTMF sweeps");
  sub->add_flag("--pooled", f.pooled, "One WTMF model across tasks");
}

std::string joined(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

/// Loads --config (if any) and overlays the flags that were given.
json build_config(const CLI::App* sub, const Flags& f, const std::string& command) {
  json c = json::object();
  if (!f.config.empty()) {
    Owned text;
    if (auto st = rk_config_load(f.config.c_str(), &text.p); st != RK_OK) {
      throw st;
    }
    c = json::parse(text.str());
  }
  auto cwd = fs::current_path();
  auto abs = [&](const std::string& p) { return fs::absolute(cwd / p).lexically_normal().string(); };
  if (given(sub, "--responses")) c["inputs"]["responses"] = abs(f.responses);
  if (given(sub, "--scores")) c["inputs"]["scores"] = abs(f.scores);
  if (given(sub, "--vectors")) {
    c["inputs"]["vectors"] = abs(f.vectors);
    c["representation"]["kind"] = "external";
  }
  if (given(sub, "--split")) c["inputs"]["split"] = abs(f.split_file);
  if (given(sub, "--out")) c["output"]["dir"] = abs(f.out);
  if (given(sub, "--seed")) c["run"]["seed"] = f.seed;
  if (given(sub, "--min-tokens")) c["earnest"]["min_tokens"] = f.min_tokens;

  if (command == "allocate") {
    auto& a = c["allocation"];
    if (a.is_null()) a = json::object();
    if (given(sub, "--raters")) a["raters"] = f.raters;
    if (given(sub, "--pair-size")) a["pair_size"] = f.pair_size;
    if (given(sub, "--consensus-size")) a["consensus_size"] = f.consensus_size;
    if (given(sub, "--extend")) a["extend"] = f.extend;
    if (given(sub, "--pinned-rater")) a["pinned_rater"] = f.pinned_rater;
    if (given(sub, "--pinned-from")) a["pinned_from"] = f.pinned_from;
    if (given(sub, "--min-overlap")) a["min_overlap"] = f.min_overlap;
  }
  if (command == "agreement") {
    std::vector<std::string> specs;
    for (const auto& p : f.pairs) specs.push_back(p);
    for (const auto& t : f.triples) specs.push_back(t);
    for (const auto& s : f.compare) specs.push_back(s);
    auto& a = c["agreement"];
    if (a.is_null()) a = json::object();
    if (!specs.empty()) a["comparisons"] = specs;
    if (given(sub, "--names")) a["names"] = f.names;
  }
  if (command == "split" || command == "train") {
    if (given(sub, "--ratios")) c["split"]["ratios"] = f.ratios;
    if (!c.contains("split")) c["split"] = json::object();
  }
  const bool wants_repr = command == "vectorize" || command == "wtmf" || command == "train" ||
                          command == "cluster" || command == "consistency";
  if (wants_repr) {
    auto& r = c["representation"];
    if (r.is_null()) r = json::object();
    if (command == "wtmf") r["kind"] = "wtmf";
    if (given(sub, "--kind")) r["kind"] = f.kind;
    if (!r.contains("kind")) r["kind"] = "tfidf";
    if (given(sub, "--min-df")) r["min_df"] = f.min_df;
    if (given(sub, "--dim")) r["dim"] = f.dim;
    if (given(sub, "--lambda")) r["lambda"] = f.lambda;
    if (given(sub, "--w-missing")) r["w_missing"] = f.w_missing;
    if (given(sub, "--sweeps")) r["sweeps"] = f.sweeps;
    if (given(sub, "--pooled")) r["pooled"] = f.pooled;
  }
  if (command == "train") {
    auto& k = c["classifier"];
    if (k.is_null()) k = json::object();
    if (given(sub, "--gold")) k["gold"] = f.gold;
    if (given(sub, "--learning-rate")) k["learning_rate"] = f.learning_rate;
    if (given(sub, "--l2")) k["l2_penalty"] = f.l2;
    if (given(sub, "--max-epochs")) k["max_epochs"] = f.max_epochs;
    if (given(sub, "--machine-rater")) k["machine_rater"] = f.machine_rater;
  }
  if (command == "cluster" || command == "consistency") {
    auto& k = c["clustering"];
    if (k.is_null()) k = json::object();
    if (given(sub, "--algorithm")) k["algorithm"] = f.algorithm;
    if (given(sub, "--distance")) k["distance"] = f.distance;
    if (given(sub, "--k")) k["k"] = f.k;
    if (given(sub, "--seeds")) k["seeds"] = f.seeds;
    if (given(sub, "--labels")) k["labels"] = f.labels;
    if (given(sub, "--retrain")) k["retrain"] = f.retrain;
  }

  // Keep only the sections the subcommand needs.
  static const std::map<std::string, std::set<std::string>> kSections = {
      {"allocate", {"allocation"}},
      {"agreement", {"agreement"}},
      {"split", {"split"}},
      {"vectorize", {"representation"}},
      {"wtmf", {"representation"}},
      {"train", {"split", "representation", "classifier", "agreement"}},
      {"cluster", {"representation", "clustering"}},
      {"consistency", {"representation", "clustering"}},
  };
  auto it = kSections.find(command);
  if (it != kSections.end()) {
    json kept = json::object();
    for (auto& [key, value] : c.items()) {
      if (key == "inputs" || key == "output" || key == "run" || key == "earnest" || it->second.count(key)) {
        kept[key] = value;
      }
    }
    c = kept;
  }
  if (!c.contains("output") || !c["output"].contains("dir")) {
    c["output"]["dir"] = abs("raterkit-out");
  }
  return c;
}

void print_file(const fs::path& path) {
  std::ifstream in(path);
  if (in) {
    std::cout << in.rdbuf();
  }
}

int run_pipeline(const CLI::App* sub, const Flags& f, const std::string& command) {
  json config;
  try {
    config = build_config(sub, f, command);
  } catch (rk_status st) {
    return report_error(st);
  }
  if (command == "consistency") {
    auto& seeds = config["clustering"]["seeds"];
    if (!seeds.is_array() || seeds.size() < 2) {
      std::cerr << "error: consistency needs --seeds with at least two values\n";
      return kExitUsage;
    }
  }
  std::string base = f.config.empty() ? fs::current_path().string()
                                       : fs::absolute(fs::path(f.config)).parent_path().string();
  Owned report;
  rk_status st = rk_pipeline_run_json(config.dump().c_str(), base.c_str(), &report.p);
  if (report.p) {
    fs::path dir = fs::path(report.str()).parent_path();
    if (command == "agreement") {
      print_file(dir / "reliability.md");
    } else if (command == "consistency" || command == "cluster") {
      print_file(dir / "consistency.json");
    } else if (command == "allocate") {
      print_file(dir / "allocation_verification.json");
    } else {
      print_file(dir / "report.md");
    }
    std::cerr << "report: " << report.str() << "\n";
  }
  if (st != RK_OK) {
    std::cerr << "error (" << rk_status_name(st) << "): " << rk_last_error() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_ingest(const Flags& f) {
  if (f.responses.empty()) {
    std::cerr << "error: ingest needs --responses\n";
    return kExitUsage;
  }
  rk_corpus* raw = nullptr;
  rk_status st = rk_corpus_load(f.responses.c_str(), f.scores.empty() ? nullptr : f.scores.c_str(), &raw);
  if (st != RK_OK) {
    return report_error(st);
  }
  rk_corpus* kept = nullptr;
  std::size_t removed = 0;
  st = rk_corpus_filter(raw, f.min_tokens, &kept, &removed);
  std::size_t n_raw = 0, s_raw = 0, n_kept = 0, s_kept = 0;
  rk_corpus_counts(raw, &n_raw, &s_raw);
  rk_corpus_free(raw);
  if (st != RK_OK) {
    return report_error(st);
  }
  rk_corpus_counts(kept, &n_kept, &s_kept);
  fs::path out = f.out.empty() ? fs::path("raterkit-out") : fs::path(f.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  auto responses = (out / "responses.jsonl").string();
  auto scores = (out / "scores.csv").string();
  st = rk_corpus_write(kept, responses.c_str(), f.scores.empty() ? nullptr : scores.c_str());
  rk_corpus_free(kept);
  if (st != RK_OK) {
    return report_error(st);
  }
  json summary = {{"responses", n_raw},
                  {"scores", s_raw},
                  {"min_tokens", f.min_tokens},
                  {"responses_removed", removed},
                  {"responses_retained", n_kept},
                  {"scores_retained", s_kept}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

/// Synthetic pool of ids S0001..SNNNN for designing an allocation without a corpus.
int run_allocate_pool(const Flags& f) {
  std::vector<std::string> pool;
  const int width = static_cast<int>(std::to_string(f.pool_size).size());
  for (std::size_t i = 1; i <= f.pool_size; ++i) {
    std::string n = std::to_string(i);
    pool.push_back("S" + std::string(static_cast<std::size_t>(width) - n.size(), '0') + n);
  }
  json design = {{"raters", f.raters},   {"pool", pool},        {"pair_size", f.pair_size},
                 {"consensus_size", f.consensus_size}, {"extend", f.extend}};
  fs::path out = f.out.empty() ? fs::path("raterkit-out") : fs::path(f.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  auto csv = (out / "allocation.csv").string();
  Owned verification;
  rk_status st = rk_allocation_run(design.dump().c_str(), f.seed, csv.c_str(), &verification.p);
  if (st != RK_OK) {
    return report_error(st);
  }
  std::cout << verification.str() << "\n";
  return json::parse(verification.str()).value("pass", false) ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raterkit: scoring reliability toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rk_version()));
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "Load, validate and filter a corpus");
  add_common(ingest, f);

  auto* allocate = app.add_subcommand("allocate", "Design and verify a rater allocation");
  add_common(allocate, f);
  allocate->add_option("--raters", f.raters, "Core rater ids")->delimiter(',');
  allocate->add_option("--pair-size", f.pair_size, "Students per rater pair");
  allocate->add_option("--consensus-size", f.consensus_size, "Students shared by all raters");
  allocate->add_option("--extend", f.extend, "Extra raters who score every shared student")->delimiter(',');
  allocate->add_option("--pinned-rater", f.pinned_rater, "Rater who must keep prior students");
  allocate->add_option("--pinned-from", f.pinned_from, "Rater ref whose scored students are required");
  allocate->add_option("--min-overlap", f.min_overlap, "Required students the pinned rater must keep");
  allocate->add_option("--pool-size", f.pool_size, "Design over a synthetic pool instead of a corpus");

  auto* agreement = app.add_subcommand("agreement", "Reliability table");
  add_common(agreement, f);
  agreement->add_option("--pairs", f.pairs, "Rater pairs, e.g. A:C,A:D")->delimiter(',');
  agreement->add_option("--triple", f.triples, "Rater group for Fleiss' kappa, e.g. A,C,D");
  agreement->add_option("--compare", f.compare, "Raw comparison list, e.g. \"A:C;A@2015:A\"");
  agreement->add_option("--names", f.names, "Display names, e.g. A=\"Rater A\"")->delimiter(',');

  auto* split = app.add_subcommand("split", "Train/dev/test/reserve split");
  add_common(split, f);
  split->add_option("--ratios", f.ratios, "Four proportions")->delimiter(',')->expected(4);

  auto* vectorize = app.add_subcommand("vectorize", "TF-IDF or external vectors");
  add_common(vectorize, f);
  add_representation(vectorize, f, true);

  auto* wtmf = app.add_subcommand("wtmf", "Weighted textual matrix factorization vectors");
  add_common(wtmf, f);
  add_representation(wtmf, f, false);

  auto* train = app.add_subcommand("train", "Train and evaluate the softmax rater");
  add_common(train, f);
  add_representation(train, f, true);
  train->add_option("--split", f.split_file, "Existing split CSV");
  train->add_option("--ratios", f.ratios, "Four proportions")->delimiter(',')->expected(4);
  train->add_option("--gold", f.gold, "consensus, consensus:A,C or a rater ref");
  train->add_option("--learning-rate", f.learning_rate, "Initial step size");
  train->add_option("--l2", f.l2, "L2 penalty");
  train->add_option("--max-epochs", f.max_epochs, "Epoch limit");
  train->add_option("--machine-rater", f.machine_rater, "Add test predictions as this rater");

  std::vector<CLI::App*> cluster_commands;
  for (const char* name : {"cluster", "consistency"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "cluster" ? "Cluster each stratum"
                                                                         : "Rerun consistency across seeds");
    add_common(sub, f);
    add_representation(sub, f, true);
    sub->add_option("--algorithm", f.algorithm, "kmeans | kmedoids")->check(CLI::IsMember({"kmeans", "kmedoids"}));
    sub->add_option("--distance", f.distance, "euclidean | cosine")->check(CLI::IsMember({"euclidean", "cosine"}));
    sub->add_option("--k", f.k, "Clusters per stratum (0 picks a default)");
    sub->add_option("--seeds", f.seeds, "Run seeds")->delimiter(',');
    sub->add_option("--labels", f.labels, "Class source for strata");
    sub->add_flag("--retrain", f.retrain, "Retrain WTMF for every seed");
    cluster_commands.push_back(sub);
  }

  auto* report = app.add_subcommand("report", "Run every configured stage and write the report");
  add_common(report, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (command == "ingest") {
    return run_ingest(f);
  }
  if (command == "allocate" && given(sub, "--pool-size")) {
    return run_allocate_pool(f);
  }
  if (command == "report" && f.config.empty()) {
    std::cerr << "error: report needs --config\n";
    return kExitUsage;
  }
  return run_pipeline(sub, f, command);
}
