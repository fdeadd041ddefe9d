#include "raterkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "raterkit/csv.hpp"
#include "raterkit/random.hpp"
#include "raterkit/text.hpp"

namespace raterkit::corpus {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open '" + path.string() + "'");
  }
  return in;
}

bool score_less(const ScoreRecord& x, const ScoreRecord& y) {
  return std::tie(x.rater_id, x.student_id, x.task_id, x.epoch) <
         std::tie(y.rater_id, y.student_id, y.task_id, y.epoch);
}

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

Corpus::Corpus(std::vector<Response> responses, std::vector<ScoreRecord> scores)
    : responses_(std::move(responses)), scores_(std::move(scores)) {
  std::sort(responses_.begin(), responses_.end(),
            [](const Response& x, const Response& y) { return x.key() < y.key(); });
  for (std::size_t i = 1; i < responses_.size(); ++i) {
    if (responses_[i - 1].key() == responses_[i].key()) {
      throw Error(Errc::invalid_argument, "duplicate response " + to_string(responses_[i].key()));
    }
  }
  std::sort(scores_.begin(), scores_.end(), score_less);
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    const auto& s = scores_[i];
    if (s.label < 0 || s.label >= kNumLabels) {
      throw Error(Errc::invalid_argument, "label " + std::to_string(s.label) + " outside {0,1,2} for " +
                                              to_string(s.key()));
    }
    if (i > 0 && !score_less(scores_[i - 1], s)) {
      throw Error(Errc::invalid_argument, "duplicate score by rater '" + s.rater_id + "' epoch '" + s.epoch +
                                              "' for " + to_string(s.key()));
    }
    if (!contains(s.key())) {
      throw Error(Errc::not_found, "score for unknown response " + to_string(s.key()));
    }
  }
}

const Response* Corpus::find(const ItemKey& key) const {
  auto it = std::lower_bound(responses_.begin(), responses_.end(), key,
                             [](const Response& r, const ItemKey& k) { return r.key() < k; });
  if (it == responses_.end() || it->key() != key) {
    return nullptr;
  }
  return &*it;
}

std::vector<ItemKey> Corpus::item_keys() const {
  std::vector<ItemKey> keys;
  keys.reserve(responses_.size());
  for (const auto& r : responses_) {
    keys.push_back(r.key());
  }
  return keys;
}

std::vector<RaterRef> Corpus::raters() const {
  std::set<RaterRef> refs;
  for (const auto& s : scores_) {
    refs.insert(s.rater());
  }
  return {refs.begin(), refs.end()};
}

std::vector<std::string> Corpus::task_ids() const {
  std::set<std::string> tasks;
  for (const auto& r : responses_) {
    tasks.insert(r.task_id);
  }
  return {tasks.begin(), tasks.end()};
}

Corpus Corpus::with_scores(const std::vector<ScoreRecord>& extra) const {
  auto scores = scores_;
  scores.insert(scores.end(), extra.begin(), extra.end());
  return Corpus(responses_, std::move(scores));
}

std::map<ItemKey, int> Corpus::labels_of(const RaterRef& rater) const {
  std::map<ItemKey, int> out;
  for (const auto& s : scores_) {
    if (s.rater_id == rater.rater_id && s.epoch == rater.epoch) {
      out.emplace(s.key(), s.label);
    }
  }
  return out;
}

std::vector<Response> parse_responses(std::istream& in) {
  std::vector<Response> out;
  std::set<ItemKey> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse, line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw Error(Errc::parse, line_prefix(line_no) + "expected a JSON object");
    }
    Response r;
    for (auto [name, field] : {std::pair{"student_id", &r.student_id}, std::pair{"task_id", &r.task_id},
                               std::pair{"text", &r.text}}) {
      auto it = obj.find(name);
      if (it == obj.end() || !it->is_string()) {
        throw Error(Errc::parse, line_prefix(line_no) + "missing string field '" + name + "'");
      }
      *field = it->get<std::string>();
    }
    if (!seen.insert(r.key()).second) {
      throw Error(Errc::invalid_argument, line_prefix(line_no) + "duplicate response " + to_string(r.key()));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Response> load_responses(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_responses(in);
}

std::vector<ScoreRecord> parse_scores(std::istream& in) {
  static const std::vector<std::string> kHeader{"rater_id", "student_id", "task_id", "label", "epoch"};
  std::size_t line_no = 0;
  auto header = csv::read_record(in, line_no);
  if (!header || *header != kHeader) {
    throw Error(Errc::parse, "line 1: expected header rater_id,student_id,task_id,label,epoch");
  }
  std::vector<ScoreRecord> out;
  while (true) {
    std::size_t at = line_no + 1;
    auto rec = csv::read_record(in, line_no);
    if (!rec) {
      break;
    }
    if (rec->size() == 1 && trim((*rec)[0]).empty()) {
      continue;
    }
    if (rec->size() != kHeader.size()) {
      throw Error(Errc::parse, line_prefix(at) + "expected 5 fields, got " + std::to_string(rec->size()));
    }
    ScoreRecord s;
    s.rater_id = (*rec)[0];
    s.student_id = (*rec)[1];
    s.task_id = (*rec)[2];
    s.epoch = (*rec)[4];
    const std::string& label = (*rec)[3];
    if (label.empty() || label.find_first_not_of("-0123456789") != std::string::npos) {
      throw Error(Errc::parse, line_prefix(at) + "label '" + label + "' is not an integer");
    }
    try {
      s.label = std::stoi(label);
    } catch (const std::exception&) {
      throw Error(Errc::parse, line_prefix(at) + "label '" + label + "' is not an integer");
    }
    if (s.label < 0 || s.label >= kNumLabels) {
      throw Error(Errc::invalid_argument, line_prefix(at) + "label " + label + " outside {0,1,2}");
    }
    out.push_back(std::move(s));
  }
  return out;
}

Corpus load_scores(const std::filesystem::path& path, const Corpus& corpus) {
  auto in = open_input(path);
  auto scores = parse_scores(in);
  for (const auto& s : scores) {
    if (!corpus.contains(s.key())) {
      throw Error(Errc::not_found, "score for unknown response " + to_string(s.key()) + " (rater '" +
                                       s.rater_id + "')");
    }
  }
  return corpus.with_scores(scores);
}

void write_responses(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.responses()) {
    nlohmann::ordered_json obj;
    obj["student_id"] = r.student_id;
    obj["task_id"] = r.task_id;
    obj["text"] = r.text;
    out << obj.dump() << '\n';
  }
}

void write_scores(std::ostream& out, const Corpus& corpus) {
  out << "rater_id,student_id,task_id,label,epoch\n";
  for (const auto& s : corpus.scores()) {
    out << csv::join({s.rater_id, s.student_id, s.task_id, std::to_string(s.label), s.epoch}) << '\n';
  }
}

FilterResult earnest_filter(const Corpus& corpus, std::size_t min_tokens) {
  FilterResult result;
  std::vector<Response> kept;
  std::set<ItemKey> removed;
  for (const auto& r : corpus.responses()) {
    if (text::tokenize(r.text).size() >= min_tokens) {
      kept.push_back(r);
    } else {
      removed.insert(r.key());
      result.removed.push_back(r.key());
    }
  }
  std::vector<ScoreRecord> scores;
  for (const auto& s : corpus.scores()) {
    if (removed.count(s.key())) {
      ++result.scores_dropped;
    } else {
      scores.push_back(s);
    }
  }
  result.corpus = Corpus(std::move(kept), std::move(scores));
  return result;
}

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::train:
      return "train";
    case Partition::dev:
      return "dev";
    case Partition::test:
      return "test";
    case Partition::reserve:
      return "reserve";
  }
  return "?";
}

Partition parse_partition(std::string_view name) {
  for (auto p : {Partition::train, Partition::dev, Partition::test, Partition::reserve}) {
    if (name == partition_name(p)) {
      return p;
    }
  }
  throw Error(Errc::parse, "unknown partition '" + std::string(name) + "'");
}

std::array<std::size_t, 4> SplitAssignment::sizes() const {
  std::array<std::size_t, 4> out{};
  for (const auto& [key, p] : partition) {
    ++out[static_cast<std::size_t>(p)];
  }
  return out;
}

std::vector<ItemKey> SplitAssignment::members(Partition p) const {
  std::vector<ItemKey> out;
  for (const auto& [key, q] : partition) {
    if (q == p) {
      out.push_back(key);
    }
  }
  return out;
}

std::array<std::size_t, 4> split_sizes(std::size_t n, const SplitProportions& proportions) {
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0)) {
      throw Error(Errc::invalid_argument, "split proportions must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::invalid_argument, "split proportions sum to " + format_double(sum) + ", expected 1");
  }
  std::array<std::size_t, 4> sizes{};
  std::array<double, 4> frac{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    double exact = proportions[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return frac[x] > frac[y]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % 4) {
    ++sizes[order[i]];
    ++assigned;
  }
  return sizes;
}

SplitAssignment split_dataset(const std::vector<ItemKey>& items, const SplitProportions& proportions,
                              const std::map<ItemKey, int>& agreement_rank, std::uint64_t seed) {
  auto sizes = split_sizes(items.size(), proportions);
  std::vector<ItemKey> pool(items);
  std::sort(pool.begin(), pool.end());
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
    throw Error(Errc::invalid_argument, "split items contain duplicates");
  }

  auto rank_of = [&](const ItemKey& k) {
    auto it = agreement_rank.find(k);
    return it == agreement_rank.end() ? 0 : it->second;
  };

  Rng tie_rng(derive_seed(seed, "split", "test-ties"));
  tie_rng.shuffle(pool);
  std::stable_sort(pool.begin(), pool.end(),
                   [&](const ItemKey& x, const ItemKey& y) { return rank_of(x) > rank_of(y); });

  SplitAssignment out;
  const std::size_t n_test = sizes[static_cast<std::size_t>(Partition::test)];
  for (std::size_t i = 0; i < n_test; ++i) {
    out.partition.emplace(pool[i], Partition::test);
  }
  std::vector<ItemKey> rest(pool.begin() + static_cast<std::ptrdiff_t>(n_test), pool.end());
  std::sort(rest.begin(), rest.end());
  Rng rest_rng(derive_seed(seed, "split", "remainder"));
  rest_rng.shuffle(rest);
  std::size_t pos = 0;
  for (auto p : {Partition::train, Partition::dev, Partition::reserve}) {
    for (std::size_t i = 0; i < sizes[static_cast<std::size_t>(p)]; ++i) {
      out.partition.emplace(rest[pos++], p);
    }
  }
  return out;
}

std::map<ItemKey, int> unanimity_rank(const Corpus& corpus) {
  std::map<ItemKey, std::vector<int>> labels;
  for (const auto& s : corpus.scores()) {
    labels[s.key()].push_back(s.label);
  }
  std::map<ItemKey, int> out;
  for (const auto& key : corpus.item_keys()) {
    auto it = labels.find(key);
    if (it == labels.end()) {
      out.emplace(key, 0);
      continue;
    }
    const auto& v = it->second;
    bool unanimous = std::all_of(v.begin(), v.end(), [&](int x) { return x == v.front(); });
    out.emplace(key, unanimous ? static_cast<int>(v.size()) : 0);
  }
  return out;
}

void write_split(std::ostream& out, const SplitAssignment& split) {
  out << "student_id,task_id,partition\n";
  for (const auto& [key, p] : split.partition) {
    out << csv::join({key.student_id, key.task_id, partition_name(p)}) << '\n';
  }
}

SplitAssignment read_split(std::istream& in) {
  std::size_t line_no = 0;
  auto header = csv::read_record(in, line_no);
  if (!header || *header != std::vector<std::string>{"student_id", "task_id", "partition"}) {
    throw Error(Errc::parse, "line 1: expected header student_id,task_id,partition");
  }
  SplitAssignment out;
  while (true) {
    std::size_t at = line_no + 1;
    auto rec = csv::read_record(in, line_no);
    if (!rec) {
      break;
    }
    if (rec->size() == 1 && trim((*rec)[0]).empty()) {
      continue;
    }
    if (rec->size() != 3) {
      throw Error(Errc::parse, line_prefix(at) + "expected 3 fields");
    }
    ItemKey key{(*rec)[0], (*rec)[1]};
    if (!out.partition.emplace(key, parse_partition((*rec)[2])).second) {
      throw Error(Errc::invalid_argument, line_prefix(at) + "duplicate item " + to_string(key));
    }
  }
  return out;
}

PairedLabels paired_labels(const Corpus& corpus, const RaterRef& a, const RaterRef& b) {
  auto la = corpus.labels_of(a);
  auto lb = corpus.labels_of(b);
  PairedLabels out;
  for (const auto& [key, label] : la) {
    auto it = lb.find(key);
    if (it != lb.end()) {
      out.items.push_back(key);
      out.a.push_back(label);
      out.b.push_back(it->second);
    }
  }
  return out;
}

RatingTable rating_table(const Corpus& corpus, const std::vector<RaterRef>& raters, int categories) {
  if (raters.size() < 2) {
    throw Error(Errc::invalid_argument, "rating table needs at least 2 raters");
  }
  std::set<RaterRef> unique(raters.begin(), raters.end());
  if (unique.size() != raters.size()) {
    throw Error(Errc::invalid_argument, "rating table raters must be distinct");
  }
  std::map<ItemKey, std::vector<int>> labels;
  for (const auto& s : corpus.scores()) {
    if (unique.count(s.rater())) {
      labels[s.key()].push_back(s.label);
    }
  }
  RatingTable table;
  table.n_raters = raters.size();
  for (const auto& [key, v] : labels) {
    if (v.size() != raters.size()) {
      ++table.dropped_items;
      continue;
    }
    std::vector<std::int64_t> row(static_cast<std::size_t>(categories), 0);
    for (int label : v) {
      if (label < 0 || label >= categories) {
        throw Error(Errc::invalid_argument, "label outside category range for " + to_string(key));
      }
      ++row[static_cast<std::size_t>(label)];
    }
    table.items.push_back(key);
    table.rows.push_back(std::move(row));
  }
  return table;
}

LabelSource LabelSource::parse(std::string_view text) {
  text = trim(text);
  LabelSource source;
  if (text == "consensus") {
    return source;
  }
  if (text.starts_with("consensus:")) {
    for (const auto& part : split_string(text.substr(10), ',')) {
      source.consensus_over.push_back(parse_rater_ref(part));
    }
    return source;
  }
  source.rater = parse_rater_ref(text);
  return source;
}

std::string LabelSource::describe() const {
  if (rater) {
    return format_rater_ref(*rater);
  }
  if (consensus_over.empty()) {
    return "consensus";
  }
  std::string out = "consensus:";
  for (std::size_t i = 0; i < consensus_over.size(); ++i) {
    out += (i ? "," : "") + format_rater_ref(consensus_over[i]);
  }
  return out;
}

std::map<ItemKey, int> consensus_labels(const Corpus& corpus, const std::vector<RaterRef>& raters) {
  std::set<RaterRef> allowed(raters.begin(), raters.end());
  std::map<ItemKey, std::array<int, kNumLabels>> votes;
  for (const auto& s : corpus.scores()) {
    if (allowed.empty() || allowed.count(s.rater())) {
      ++votes[s.key()][static_cast<std::size_t>(s.label)];
    }
  }
  std::map<ItemKey, int> out;
  for (const auto& [key, v] : votes) {
    // max_element returns the first maximum, so ties go to the lower label.
    out.emplace(key, static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()));
  }
  return out;
}

std::map<ItemKey, int> resolve_labels(const Corpus& corpus, const LabelSource& source) {
  if (source.rater) {
    return corpus.labels_of(*source.rater);
  }
  return consensus_labels(corpus, source.consensus_over);
}

}  // namespace raterkit::corpus
