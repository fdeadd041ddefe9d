#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "raterkit/common.hpp"
#include "raterkit/corpus.hpp"

namespace raterkit::repr {

enum class Provenance { tfidf, external, wtmf };
const char* provenance_name(Provenance p);

/// Id-aligned real vectors of a common dimension.
class VectorSet {
 public:
  VectorSet(std::size_t dim, Provenance provenance);

  std::size_t dim() const { return dim_; }
  Provenance provenance() const { return provenance_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Throws on wrong length, non-finite components, or a duplicate id.
  void add(const ItemKey& key, std::vector<double> values);
  const std::vector<double>* find(const ItemKey& key) const;
  const std::map<ItemKey, std::vector<double>>& entries() const { return entries_; }

  /// Items whose vector is all zeros (e.g. empty documents).
  const std::set<ItemKey>& degenerate() const { return degenerate_; }
  void mark_degenerate(const ItemKey& key) { degenerate_.insert(key); }

  /// Merges another set of the same dimension; ids must not overlap.
  void merge(const VectorSet& other);

 private:
  std::size_t dim_;
  Provenance provenance_;
  std::map<ItemKey, std::vector<double>> entries_;
  std::set<ItemKey> degenerate_;
};

/// Tokens in lexicographic order with dense indices and document frequencies.
struct Vocabulary {
  std::vector<std::string> tokens;
  std::vector<std::size_t> doc_freq;
  std::size_t n_docs = 0;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return tokens.size(); }
  std::optional<std::size_t> find(const std::string& token) const;
  /// ln((1 + N) / (1 + df)) + 1
  double idf(std::size_t term) const;
};

struct TfidfOptions {
  std::size_t min_df = 2;
};

struct Document {
  ItemKey key;
  std::string text;
};

std::vector<Document> documents_of(const corpus::Corpus& corpus, const std::optional<std::string>& task = {});

Vocabulary build_vocabulary(const std::vector<Document>& docs, const TfidfOptions& options = {});

/// Sparse, L2-normalized tf-idf column for one text: (term index, weight),
/// sorted by term index. Out-of-vocabulary tokens are ignored.
std::vector<std::pair<std::size_t, double>> tfidf_column(const Vocabulary& vocab, std::string_view text);

struct TfidfResult {
  Vocabulary vocabulary;
  VectorSet vectors;
};

/// Builds a vocabulary from the documents unless one is supplied.
TfidfResult tfidf_vectorize(const std::vector<Document>& docs, const std::optional<Vocabulary>& vocabulary = {},
                            const TfidfOptions& options = {});

VectorSet load_vectors(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = {});
VectorSet read_vectors(std::istream& in, std::optional<std::size_t> expected_dim = {});
void write_vectors(std::ostream& out, const VectorSet& vectors);

struct WtmfConfig {
  std::size_t dim = 50;
  double lambda = 20.0;
  double w_missing = 0.01;
  std::size_t sweeps = 30;
  std::uint64_t seed = 0;
  TfidfOptions tfidf{};
};

/// Weighted factorization problem for a terms x sentences matrix X. Observed
/// (nonzero) cells carry weight 1, every other cell weight w_missing.
class WtmfProblem {
 public:
  /// columns[c] lists the nonzero (term, value) entries of sentence c.
  WtmfProblem(std::size_t terms, std::vector<std::vector<std::pair<std::size_t, double>>> columns, double lambda,
              double w_missing);

  /// Dense constructor: every nonzero entry of x counts as observed.
  static WtmfProblem from_dense(const Eigen::MatrixXd& x, double lambda, double w_missing);

  std::size_t terms() const { return terms_; }
  std::size_t sentences() const { return columns_.size(); }
  double lambda() const { return lambda_; }
  double w_missing() const { return w_missing_; }
  const std::vector<std::pair<std::size_t, double>>& column(std::size_t c) const { return columns_[c]; }

  double objective(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) const;

  /// Closed-form ridge update of term row t given sentence factors q.
  /// q_gram, when given, must equal q^T q.
  Eigen::VectorXd solve_term(const Eigen::MatrixXd& q, std::size_t t, const Eigen::MatrixXd* q_gram = nullptr) const;
  /// Closed-form ridge update of sentence row c given term factors p.
  Eigen::VectorXd solve_sentence(const Eigen::MatrixXd& p, std::size_t c,
                                 const Eigen::MatrixXd* p_gram = nullptr) const;
  /// Same ridge solve for an arbitrary sparse column (fold-in).
  Eigen::VectorXd solve_column(const Eigen::MatrixXd& p, const std::vector<std::pair<std::size_t, double>>& col) const;

 private:
  std::size_t terms_;
  std::vector<std::vector<std::pair<std::size_t, double>>> columns_;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
  double lambda_;
  double w_missing_;
};

struct Factorization {
  Eigen::MatrixXd p;  // terms x dim
  Eigen::MatrixXd q;  // sentences x dim
  /// Objective after every half-sweep: [init, after P, after Q, after P, ...].
  std::vector<double> half_sweep_objective;
};

/// Alternating least squares starting from small seeded uniform factors.
Factorization wtmf_factorize(const WtmfProblem& problem, std::size_t dim, std::size_t sweeps, std::uint64_t seed);

struct WtmfModel {
  Vocabulary vocabulary;
  std::vector<ItemKey> items;
  Eigen::MatrixXd p;
  Eigen::MatrixXd q;
  double lambda = 0.0;
  double w_missing = 0.0;
  std::vector<double> objective;  // after every full sweep

  VectorSet sentence_vectors() const;
};

WtmfModel wtmf_train(const std::vector<Document>& docs, const WtmfConfig& config);

struct FoldIn {
  std::vector<double> vector;
  bool degenerate = false;
};

FoldIn wtmf_fold_in(const WtmfModel& model, std::string_view text);

/// Trains one model per task (default) or a single pooled model and returns
/// the sentence vectors of every item.
VectorSet wtmf_vectors(const corpus::Corpus& corpus, const WtmfConfig& config, bool pooled = false);

}  // namespace raterkit::repr
