#include "raterkit/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace raterkit::agreement {

ConfusionMatrix::ConfusionMatrix(int categories)
    : k_(categories), counts_(static_cast<std::size_t>(categories) * static_cast<std::size_t>(categories), 0) {
  if (categories < 2) {
    throw Error(Errc::invalid_argument, "confusion matrix needs at least 2 categories");
  }
}

ConfusionMatrix::ConfusionMatrix(int categories, std::vector<std::int64_t> row_major) : ConfusionMatrix(categories) {
  if (row_major.size() != counts_.size()) {
    throw Error(Errc::invalid_argument, "confusion matrix data has wrong size");
  }
  for (auto c : row_major) {
    if (c < 0) {
      throw Error(Errc::invalid_argument, "confusion matrix counts must be nonnegative");
    }
  }
  counts_ = std::move(row_major);
}

std::size_t ConfusionMatrix::index(int row, int col) const {
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(col);
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto c : counts_) {
    t += c;
  }
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < k_; ++i) {
    t += at(i, i);
  }
  return t;
}

std::vector<std::int64_t> ConfusionMatrix::row_sums() const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(k_), 0);
  for (int i = 0; i < k_; ++i) {
    for (int j = 0; j < k_; ++j) {
      out[static_cast<std::size_t>(i)] += at(i, j);
    }
  }
  return out;
}

std::vector<std::int64_t> ConfusionMatrix::col_sums() const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(k_), 0);
  for (int i = 0; i < k_; ++i) {
    for (int j = 0; j < k_; ++j) {
      out[static_cast<std::size_t>(j)] += at(i, j);
    }
  }
  return out;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
  ConfusionMatrix t(k_);
  for (int i = 0; i < k_; ++i) {
    for (int j = 0; j < k_; ++j) {
      t.at(j, i) = at(i, j);
    }
  }
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> labels_a, std::span<const int> labels_b, int categories) {
  if (labels_a.size() != labels_b.size()) {
    throw Error(Errc::invalid_argument, "label sequences differ in length (" + std::to_string(labels_a.size()) +
                                            " vs " + std::to_string(labels_b.size()) + ")");
  }
  ConfusionMatrix cm(categories);
  for (std::size_t t = 0; t < labels_a.size(); ++t) {
    int a = labels_a[t];
    int b = labels_b[t];
    if (a < 0 || a >= categories || b < 0 || b >= categories) {
      throw Error(Errc::invalid_argument, "label out of range at position " + std::to_string(t));
    }
    ++cm.at(a, b);
  }
  return cm;
}

AgreementProfile agreement_profile(const ConfusionMatrix& cm) {
  AgreementProfile p;
  const int k = cm.categories();
  p.n_items = cm.total();
  p.discrepancies.assign(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      p.discrepancies[static_cast<std::size_t>(std::abs(i - j))] += cm.at(i, j);
    }
  }
  if (p.n_items == 0) {
    p.percent_agreement = 1.0;
    p.degenerate = true;
  } else {
    p.percent_agreement = static_cast<double>(cm.trace()) / static_cast<double>(p.n_items);
  }
  return p;
}

const char* kappa_kind_name(KappaKind kind) {
  switch (kind) {
    case KappaKind::cohen:
      return "cohen";
    case KappaKind::qwk:
      return "qwk";
    case KappaKind::fleiss:
      return "fleiss";
  }
  return "?";
}

KappaValue cohen_kappa(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total <= 0) {
    throw Error(Errc::degenerate, "kappa of an empty confusion matrix");
  }
  const double n = static_cast<double>(total);
  const auto rows = cm.row_sums();
  const auto cols = cm.col_sums();
  double p_o = static_cast<double>(cm.trace()) / n;
  double p_e = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    p_e += static_cast<double>(rows[i]) * static_cast<double>(cols[i]);
  }
  p_e /= n * n;
  if (p_e >= 1.0) {
    throw Error(Errc::degenerate, "degenerate marginals: both raters used a single identical category");
  }
  return {(p_o - p_e) / (1.0 - p_e), KappaKind::cohen, total, 2};
}

KappaValue quadratic_weighted_kappa(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total <= 0) {
    throw Error(Errc::degenerate, "kappa of an empty confusion matrix");
  }
  const int k = cm.categories();
  const double n = static_cast<double>(total);
  const auto rows = cm.row_sums();
  const auto cols = cm.col_sums();
  const double scale = static_cast<double>((k - 1) * (k - 1));
  double observed = 0.0;
  double expected = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double w = static_cast<double>((i - j) * (i - j)) / scale;
      observed += w * static_cast<double>(cm.at(i, j)) / n;
      expected += w * static_cast<double>(rows[static_cast<std::size_t>(i)]) *
                  static_cast<double>(cols[static_cast<std::size_t>(j)]) / (n * n);
    }
  }
  if (expected <= 0.0) {
    throw Error(Errc::degenerate, "degenerate marginals: expected weighted disagreement is zero");
  }
  return {1.0 - observed / expected, KappaKind::qwk, total, 2};
}

KappaValue fleiss_kappa(const std::vector<std::vector<std::int64_t>>& table) {
  if (table.empty()) {
    throw Error(Errc::invalid_argument, "Fleiss' kappa needs at least one item");
  }
  const std::size_t k = table.front().size();
  std::int64_t raters = -1;
  std::vector<double> column(k, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    if (row.size() != k) {
      throw Error(Errc::invalid_argument, "rating table rows differ in category count");
    }
    std::int64_t sum = 0;
    std::int64_t sq = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (row[c] < 0) {
        throw Error(Errc::invalid_argument, "rating table counts must be nonnegative");
      }
      sum += row[c];
      sq += row[c] * row[c];
      column[c] += static_cast<double>(row[c]);
    }
    if (raters < 0) {
      raters = sum;
    } else if (sum != raters) {
      throw Error(Errc::invalid_argument, "rating table row " + std::to_string(i) + " sums to " +
                                              std::to_string(sum) + ", expected " + std::to_string(raters));
    }
    p_bar += static_cast<double>(sq - sum);
  }
  if (raters < 2) {
    throw Error(Errc::invalid_argument, "Fleiss' kappa needs at least 2 ratings per item");
  }
  const double n = static_cast<double>(raters);
  const double items = static_cast<double>(table.size());
  p_bar /= items * n * (n - 1.0);
  double p_e = 0.0;
  for (double c : column) {
    const double p = c / (items * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    throw Error(Errc::degenerate, "degenerate marginals: every rating falls in one category");
  }
  return {(p_bar - p_e) / (1.0 - p_e), KappaKind::fleiss, static_cast<std::int64_t>(table.size()),
          static_cast<std::size_t>(raters)};
}

InterpretationBand interpret_kappa(double value) {
  if (!(value >= -1.0 && value <= 1.0)) {
    throw Error(Errc::invalid_argument, "kappa value " + format_double(value) + " outside [-1, 1]");
  }
  if (value < 0.0) {
    return {Band::worse_than_chance, -1.0, 0.0};
  }
  if (value < 0.2) {
    return {Band::slight, 0.0, 0.2};
  }
  if (value < 0.4) {
    return {Band::fair, 0.2, 0.4};
  }
  if (value < 0.6) {
    return {Band::moderate, 0.4, 0.6};
  }
  if (value < 0.8) {
    return {Band::substantial, 0.6, 0.8};
  }
  return {Band::almost_perfect, 0.8, 1.0};
}

const char* band_label(Band band) {
  switch (band) {
    case Band::worse_than_chance:
      return "worse-than-chance";
    case Band::slight:
      return "slight";
    case Band::fair:
      return "fair";
    case Band::moderate:
      return "moderate";
    case Band::substantial:
      return "substantial";
    case Band::almost_perfect:
      return "almost-perfect";
  }
  return "?";
}

const char* band_phrase(Band band) {
  switch (band) {
    case Band::worse_than_chance:
      return "worse than chance";
    case Band::almost_perfect:
      return "almost perfect";
    default:
      return band_label(band);
  }
}

bool ReliabilityRow::intra_rater() const {
  return raters.size() == 2 && raters[0].rater_id == raters[1].rater_id;
}

std::vector<std::string> ReliabilityTable::narrative() const {
  std::vector<std::string> out;
  for (bool intra : {false, true}) {
    const ReliabilityRow* weakest = nullptr;
    std::size_t count = 0;
    for (const auto& row : rows) {
      if (row.intra_rater() != intra || !row.value) {
        continue;
      }
      ++count;
      if (!weakest || *row.value < *weakest->value) {
        weakest = &row;
      }
    }
    if (!weakest) {
      continue;
    }
    const char* kind = intra ? "intra-rater" : "inter-rater";
    std::string sentence = std::string(intra ? "Intra" : "Inter") + "-rater comparisons (" + std::to_string(count) +
                           "): " + band_phrase(*weakest->band) + " " + kind + " agreement; lowest " +
                           format_measure(*weakest) + " (" + weakest->label + ").";
    out.push_back(std::move(sentence));
  }
  return out;
}

namespace {

std::string display(const RaterRef& ref, const DisplayNames& names) {
  auto it = names.find(ref.rater_id);
  std::string out = it == names.end() ? ref.rater_id : it->second;
  if (ref.epoch != kDefaultEpoch) {
    out += " (" + ref.epoch + ")";
  }
  return out;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

ReliabilityTable reliability_table(const corpus::Corpus& corpus,
                                   const std::vector<std::vector<RaterRef>>& comparisons,
                                   const DisplayNames& names) {
  ReliabilityTable table;
  for (const auto& group : comparisons) {
    if (group.size() < 2) {
      throw Error(Errc::invalid_argument, "a comparison needs at least 2 raters");
    }
    ReliabilityRow row;
    row.raters = group;
    for (std::size_t i = 0; i < group.size(); ++i) {
      row.label += (i ? " & " : "") + display(group[i], names);
    }
    try {
      if (group.size() == 2) {
        row.kind = KappaKind::qwk;
        auto paired = corpus::paired_labels(corpus, group[0], group[1]);
        auto cm = confusion_matrix(paired.a, paired.b);
        row.n_items = cm.total();
        row.confusion = cm;
        row.profile = agreement_profile(cm);
        if (row.n_items == 0) {
          row.note = "no items scored by both raters";
        } else {
          row.value = quadratic_weighted_kappa(cm).value;
        }
      } else {
        row.kind = KappaKind::fleiss;
        auto rt = corpus::rating_table(corpus, group);
        row.n_items = static_cast<std::int64_t>(rt.items.size());
        row.dropped_items = rt.dropped_items;
        if (rt.items.empty()) {
          row.note = "no items scored by every rater";
        } else {
          row.value = fleiss_kappa(rt.rows).value;
        }
      }
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate) {
        throw;
      }
      row.note = e.what();
    }
    if (row.value) {
      row.band = interpret_kappa(*row.value).band;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::vector<RaterRef>> parse_comparisons(std::string_view text) {
  std::vector<std::vector<RaterRef>> out;
  for (const auto& part : split_string(text, ';')) {
    auto item = trim(part);
    if (item.empty()) {
      continue;
    }
    // "A:C,A:D" is a list of pairs; "A,C,D" is one group.
    std::vector<std::string> groups;
    if (item.find(':') != std::string_view::npos) {
      groups = split_string(item, ',');
    } else {
      groups.emplace_back(item);
    }
    for (const auto& g : groups) {
      const char sep = g.find(':') != std::string::npos ? ':' : ',';
      std::vector<RaterRef> group;
      for (const auto& r : split_string(g, sep)) {
        group.push_back(parse_rater_ref(r));
      }
      if (group.size() < 2) {
        throw Error(Errc::invalid_argument, "comparison '" + std::string(trim(g)) + "' needs at least 2 raters");
      }
      std::vector<RaterRef> sorted = group;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(Errc::invalid_argument, "comparison '" + std::string(trim(g)) + "' repeats a rater");
      }
      out.push_back(std::move(group));
    }
  }
  return out;
}

std::string format_measure(const ReliabilityRow& row) {
  std::string name = row.kind == KappaKind::fleiss ? "Fleiss' Kappa" : "QWK";
  if (!row.value) {
    return name + " = n/a";
  }
  return name + " = " + fixed4(*row.value);
}

std::string to_markdown(const ReliabilityTable& table) {
  std::string out = "| Rater Comparison | Measure of Reliability |\n|---|---|\n";
  for (const auto& row : table.rows) {
    out += "| " + row.label + " | " + format_measure(row);
    if (!row.value) {
      out += " (" + row.note + ")";
    }
    out += " |\n";
  }
  auto lines = table.narrative();
  if (!lines.empty()) {
    out += "\n";
    for (const auto& line : lines) {
      out += line + "\n";
    }
  }
  return out;
}

std::string to_json(const ReliabilityTable& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r;
    r["comparison"] = row.label;
    nlohmann::ordered_json raters = nlohmann::ordered_json::array();
    for (const auto& ref : row.raters) {
      raters.push_back(format_rater_ref(ref));
    }
    r["raters"] = raters;
    r["measure"] = kappa_kind_name(row.kind);
    r["value"] = row.value ? nlohmann::ordered_json(*row.value) : nlohmann::ordered_json(nullptr);
    r["display"] = format_measure(row);
    r["band"] = row.band ? nlohmann::ordered_json(band_label(*row.band)) : nlohmann::ordered_json(nullptr);
    r["n_items"] = row.n_items;
    if (row.kind == KappaKind::fleiss) {
      r["dropped_items"] = row.dropped_items;
    }
    if (row.confusion) {
      nlohmann::ordered_json m = nlohmann::ordered_json::array();
      for (int i = 0; i < row.confusion->categories(); ++i) {
        nlohmann::ordered_json line = nlohmann::ordered_json::array();
        for (int j = 0; j < row.confusion->categories(); ++j) {
          line.push_back(row.confusion->at(i, j));
        }
        m.push_back(line);
      }
      r["confusion_matrix"] = m;
    }
    if (row.profile) {
      r["percent_agreement"] = row.profile->percent_agreement;
      nlohmann::ordered_json d;
      for (std::size_t l = 1; l < row.profile->discrepancies.size(); ++l) {
        d[std::to_string(l)] = row.profile->discrepancies[l];
      }
      r["discrepancies"] = d;
    }
    if (!row.note.empty()) {
      r["note"] = row.note;
    }
    rows.push_back(r);
  }
  nlohmann::ordered_json doc;
  doc["rows"] = rows;
  doc["summary"] = table.narrative();
  return doc.dump(2);
}

}  // namespace raterkit::agreement
