#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raterkit/common.hpp"

namespace raterkit::corpus {

struct Response {
  std::string student_id;
  std::string task_id;
  std::string text;

  ItemKey key() const { return {student_id, task_id}; }
  bool operator==(const Response&) const = default;
};

struct ScoreRecord {
  std::string rater_id;
  std::string student_id;
  std::string task_id;
  int label = 0;
  std::string epoch;

  ItemKey key() const { return {student_id, task_id}; }
  RaterRef rater() const { return {rater_id, epoch}; }
  bool operator==(const ScoreRecord&) const = default;
};

/// Immutable collection of responses and the scores attached to them.
/// Responses are held in canonical (student_id, task_id) order; scores in
/// (rater_id, student_id, task_id, epoch) order.
class Corpus {
 public:
  Corpus() = default;

  /// Validates uniqueness and that every score refers to a known response.
  Corpus(std::vector<Response> responses, std::vector<ScoreRecord> scores);

  const std::vector<Response>& responses() const { return responses_; }
  const std::vector<ScoreRecord>& scores() const { return scores_; }

  const Response* find(const ItemKey& key) const;
  bool contains(const ItemKey& key) const { return find(key) != nullptr; }
  std::vector<ItemKey> item_keys() const;

  /// Distinct (rater, epoch) pairs, sorted.
  std::vector<RaterRef> raters() const;
  std::vector<std::string> task_ids() const;

  /// Returns a copy with extra scores appended (e.g. a machine rater).
  Corpus with_scores(const std::vector<ScoreRecord>& extra) const;

  /// Label given by one rater, keyed by item.
  std::map<ItemKey, int> labels_of(const RaterRef& rater) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Response> responses_;
  std::vector<ScoreRecord> scores_;
};

std::vector<Response> load_responses(const std::filesystem::path& path);
std::vector<Response> parse_responses(std::istream& in);
Corpus load_scores(const std::filesystem::path& path, const Corpus& corpus);
std::vector<ScoreRecord> parse_scores(std::istream& in);

void write_responses(std::ostream& out, const Corpus& corpus);
void write_scores(std::ostream& out, const Corpus& corpus);

struct FilterResult {
  Corpus corpus;
  std::vector<ItemKey> removed;
  std::size_t scores_dropped = 0;
};

/// Keeps responses with at least min_tokens tokens; scores of dropped
/// responses go with them.
FilterResult earnest_filter(const Corpus& corpus, std::size_t min_tokens);

enum class Partition { train, dev, test, reserve };
const char* partition_name(Partition p);
Partition parse_partition(std::string_view name);

using SplitProportions = std::array<double, 4>;
inline constexpr SplitProportions kDefaultProportions{0.72, 0.09, 0.09, 0.10};

struct SplitAssignment {
  std::map<ItemKey, Partition> partition;

  std::array<std::size_t, 4> sizes() const;
  std::vector<ItemKey> members(Partition p) const;
};

/// Partition sizes by largest remainder; leftover items go to the largest
/// fractional parts, ties to the earlier partition.
std::array<std::size_t, 4> split_sizes(std::size_t n, const SplitProportions& proportions);

/// Test slots go to the items with the highest agreement rank (ties broken by
/// a seeded shuffle); everything else is shuffled into train/dev/reserve.
SplitAssignment split_dataset(const std::vector<ItemKey>& items,
                              const SplitProportions& proportions,
                              const std::map<ItemKey, int>& agreement_rank,
                              std::uint64_t seed);

/// Number of ratings on the item when all of them agree, else 0.
std::map<ItemKey, int> unanimity_rank(const Corpus& corpus);

void write_split(std::ostream& out, const SplitAssignment& split);
SplitAssignment read_split(std::istream& in);

struct PairedLabels {
  std::vector<ItemKey> items;
  std::vector<int> a;
  std::vector<int> b;
};

/// Labels for the items scored by both raters, in canonical item order.
PairedLabels paired_labels(const Corpus& corpus, const RaterRef& a, const RaterRef& b);

struct RatingTable {
  std::vector<ItemKey> items;
  std::vector<std::vector<std::int64_t>> rows;
  std::size_t dropped_items = 0;
  std::size_t n_raters = 0;
};

/// Item-by-category counts over the items scored by every listed rater.
RatingTable rating_table(const Corpus& corpus, const std::vector<RaterRef>& raters, int categories = kNumLabels);

/// Where gold labels come from: one rater, or the majority of a set of raters
/// (all raters when the set is empty), ties to the lower label.
struct LabelSource {
  std::optional<RaterRef> rater;
  std::vector<RaterRef> consensus_over;

  static LabelSource parse(std::string_view text);
  std::string describe() const;
};

std::map<ItemKey, int> consensus_labels(const Corpus& corpus, const std::vector<RaterRef>& raters = {});
std::map<ItemKey, int> resolve_labels(const Corpus& corpus, const LabelSource& source);

}  // namespace raterkit::corpus
