#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raterkit/common.hpp"
#include "raterkit/corpus.hpp"

namespace raterkit::agreement {

/// K x K cross-tabulation; rows are the first rater's labels.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int categories = kNumLabels);
  ConfusionMatrix(int categories, std::vector<std::int64_t> row_major);

  int categories() const { return k_; }
  std::int64_t at(int row, int col) const { return counts_[index(row, col)]; }
  std::int64_t& at(int row, int col) { return counts_[index(row, col)]; }
  std::int64_t total() const;
  std::int64_t trace() const;
  std::vector<std::int64_t> row_sums() const;
  std::vector<std::int64_t> col_sums() const;
  ConfusionMatrix transposed() const;
  const std::vector<std::int64_t>& data() const { return counts_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int row, int col) const;

  int k_;
  std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> labels_a, std::span<const int> labels_b,
                                 int categories = kNumLabels);

struct AgreementProfile {
  std::int64_t n_items = 0;
  double percent_agreement = 1.0;
  /// discrepancies[l] counts pairs with |a - b| == l; index 0 holds exact matches.
  std::vector<std::int64_t> discrepancies;
  /// Set when there are no items and percent_agreement is vacuously 1.
  bool degenerate = false;
};

AgreementProfile agreement_profile(const ConfusionMatrix& cm);

enum class KappaKind { cohen, qwk, fleiss };
const char* kappa_kind_name(KappaKind kind);

struct KappaValue {
  double value = 0.0;
  KappaKind kind = KappaKind::cohen;
  std::int64_t n_items = 0;
  std::size_t n_raters = 0;
};

/// Unweighted kappa. Throws Errc::degenerate when expected agreement is 1.
KappaValue cohen_kappa(const ConfusionMatrix& cm);

/// Kappa with squared-distance disagreement weights (i - j)^2 / (K - 1)^2.
KappaValue quadratic_weighted_kappa(const ConfusionMatrix& cm);

/// Consensus kappa over an items x categories count table where every row
/// sums to the same number of raters.
KappaValue fleiss_kappa(const std::vector<std::vector<std::int64_t>>& table);

enum class Band { worse_than_chance, slight, fair, moderate, substantial, almost_perfect };

struct InterpretationBand {
  Band band;
  double lower;  // inclusive
  double upper;  // exclusive, except the top band which includes 1
};

/// Left-closed bands: <0, [0,.2), [.2,.4), [.4,.6), [.6,.8), [.8,1].
InterpretationBand interpret_kappa(double value);
const char* band_label(Band band);   // "almost-perfect"
const char* band_phrase(Band band);  // "almost perfect"

struct ReliabilityRow {
  std::string label;
  std::vector<RaterRef> raters;
  KappaKind kind = KappaKind::qwk;
  std::optional<double> value;
  std::optional<Band> band;
  std::int64_t n_items = 0;
  std::size_t dropped_items = 0;
  std::string note;  // reason when not computable
  std::optional<ConfusionMatrix> confusion;
  std::optional<AgreementProfile> profile;

  bool intra_rater() const;
};

struct ReliabilityTable {
  std::vector<ReliabilityRow> rows;

  /// Sentences summarizing inter- and intra-rater agreement, using the band of
  /// the weakest comparison in each group.
  std::vector<std::string> narrative() const;
};

/// Display names per rater id (e.g. "A" -> "Rater A"); ids without an entry
/// are shown as-is.
using DisplayNames = std::map<std::string, std::string>;

/// Two raters produce a QWK row, three or more a Fleiss row.
ReliabilityTable reliability_table(const corpus::Corpus& corpus,
                                   const std::vector<std::vector<RaterRef>>& comparisons,
                                   const DisplayNames& names = {});

/// "A:C;A@2015:A;A,C,D" style list: ':' joins a pair, ',' a group, ';' separates.
std::vector<std::vector<RaterRef>> parse_comparisons(std::string_view text);

std::string format_measure(const ReliabilityRow& row);
std::string to_markdown(const ReliabilityTable& table);
std::string to_json(const ReliabilityTable& table);

}  // namespace raterkit::agreement
