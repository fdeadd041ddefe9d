#include "raterkit/representations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "raterkit/random.hpp"
#include "raterkit/text.hpp"

namespace raterkit::repr {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::tfidf:
      return "tfidf";
    case Provenance::external:
      return "external";
    case Provenance::wtmf:
      return "wtmf";
  }
  return "?";
}

VectorSet::VectorSet(std::size_t dim, Provenance provenance) : dim_(dim), provenance_(provenance) {
  if (dim == 0) {
    throw Error(Errc::invalid_argument, "vector dimension must be positive");
  }
}

void VectorSet::add(const ItemKey& key, std::vector<double> values) {
  if (values.size() != dim_) {
    throw Error(Errc::invalid_argument, "vector for " + to_string(key) + " has " + std::to_string(values.size()) +
                                            " components, expected " + std::to_string(dim_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(Errc::invalid_argument, "non-finite component in vector for " + to_string(key));
    }
  }
  if (!entries_.emplace(key, std::move(values)).second) {
    throw Error(Errc::invalid_argument, "duplicate vector id " + to_string(key));
  }
}

const std::vector<double>* VectorSet::find(const ItemKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void VectorSet::merge(const VectorSet& other) {
  if (other.dim_ != dim_) {
    throw Error(Errc::invalid_argument, "cannot merge vector sets of different dimension");
  }
  for (const auto& [key, v] : other.entries_) {
    add(key, v);
  }
  degenerate_.insert(other.degenerate_.begin(), other.degenerate_.end());
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  auto it = index.find(token);
  if (it == index.end()) {
    return std::nullopt;
  }
  return it->second;
}

double Vocabulary::idf(std::size_t term) const {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(doc_freq[term]))) + 1.0;
}

std::vector<Document> documents_of(const corpus::Corpus& corpus, const std::optional<std::string>& task) {
  std::vector<Document> docs;
  for (const auto& r : corpus.responses()) {
    if (!task || r.task_id == *task) {
      docs.push_back({r.key(), r.text});
    }
  }
  return docs;
}

Vocabulary build_vocabulary(const std::vector<Document>& docs, const TfidfOptions& options) {
  if (docs.empty()) {
    throw Error(Errc::invalid_argument, "cannot build a vocabulary from an empty slice");
  }
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    auto tokens = text::tokenize(d.text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) {
      ++df[t];
    }
  }
  Vocabulary vocab;
  vocab.n_docs = docs.size();
  for (const auto& [token, count] : df) {
    if (count >= std::max<std::size_t>(options.min_df, 1)) {
      vocab.index.emplace(token, vocab.tokens.size());
      vocab.tokens.push_back(token);
      vocab.doc_freq.push_back(count);
    }
  }
  return vocab;
}

std::vector<std::pair<std::size_t, double>> tfidf_column(const Vocabulary& vocab, std::string_view text) {
  std::map<std::size_t, double> tf;
  for (const auto& token : text::tokenize(text)) {
    if (auto idx = vocab.find(token)) {
      tf[*idx] += 1.0;
    }
  }
  std::vector<std::pair<std::size_t, double>> col;
  double norm = 0.0;
  for (const auto& [idx, count] : tf) {
    double w = count * vocab.idf(idx);
    col.emplace_back(idx, w);
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (auto& entry : col) {
    entry.second /= norm;
  }
  return col;
}

TfidfResult tfidf_vectorize(const std::vector<Document>& docs, const std::optional<Vocabulary>& vocabulary,
                            const TfidfOptions& options) {
  Vocabulary vocab = vocabulary ? *vocabulary : build_vocabulary(docs, options);
  if (vocab.size() == 0) {
    throw Error(Errc::degenerate, "vocabulary is empty (min_df " + std::to_string(options.min_df) + ")");
  }
  VectorSet vectors(vocab.size(), Provenance::tfidf);
  for (const auto& d : docs) {
    std::vector<double> v(vocab.size(), 0.0);
    auto col = tfidf_column(vocab, d.text);
    for (const auto& [idx, w] : col) {
      v[idx] = w;
    }
    vectors.add(d.key, std::move(v));
    if (col.empty()) {
      vectors.mark_degenerate(d.key);
    }
  }
  return {std::move(vocab), std::move(vectors)};
}

VectorSet read_vectors(std::istream& in, std::optional<std::size_t> expected_dim) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::parse, "line 1: missing '#dim=<D>' header");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (!line.starts_with("#dim=")) {
    throw Error(Errc::parse, "line 1: expected '#dim=<D>' header");
  }
  double declared = parse_double(line.substr(5));
  if (declared < 1 || declared != std::floor(declared)) {
    throw Error(Errc::parse, "line 1: dimension must be a positive integer");
  }
  const auto dim = static_cast<std::size_t>(declared);
  if (expected_dim && *expected_dim != dim) {
    throw Error(Errc::invalid_argument, "vector file declares dim " + std::to_string(dim) + ", expected " +
                                            std::to_string(*expected_dim));
  }
  VectorSet out(dim, Provenance::external);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto fields = split_string(line, '\t');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != dim + 2) {
      throw Error(Errc::parse, where + "row has " + std::to_string(fields.size() < 2 ? 0 : fields.size() - 2) +
                                   " values, expected " + std::to_string(dim));
    }
    std::vector<double> v;
    v.reserve(dim);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      double x;
      try {
        x = parse_double(fields[i]);
      } catch (const Error&) {
        throw Error(Errc::parse, where + "bad value '" + fields[i] + "'");
      }
      if (!std::isfinite(x)) {
        throw Error(Errc::parse, where + "non-finite value");
      }
      v.push_back(x);
    }
    try {
      out.add({fields[0], fields[1]}, std::move(v));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  return out;
}

VectorSet load_vectors(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open '" + path.string() + "'");
  }
  return read_vectors(in, expected_dim);
}

void write_vectors(std::ostream& out, const VectorSet& vectors) {
  out << "#dim=" << vectors.dim() << '\n';
  for (const auto& [key, v] : vectors.entries()) {
    out << key.student_id << '\t' << key.task_id;
    for (double x : v) {
      out << '\t' << format_double(x);
    }
    out << '\n';
  }
}

WtmfProblem::WtmfProblem(std::size_t terms, std::vector<std::vector<std::pair<std::size_t, double>>> columns,
                         double lambda, double w_missing)
    : terms_(terms), columns_(std::move(columns)), rows_(terms), lambda_(lambda), w_missing_(w_missing) {
  if (lambda < 0.0) {
    throw Error(Errc::invalid_argument, "lambda must be nonnegative");
  }
  if (!(w_missing > 0.0 && w_missing <= 1.0)) {
    throw Error(Errc::invalid_argument, "w_missing must lie in (0, 1]");
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    for (const auto& [t, x] : columns_[c]) {
      if (t >= terms_) {
        throw Error(Errc::invalid_argument, "term index out of range");
      }
      rows_[t].emplace_back(c, x);
    }
  }
}

WtmfProblem WtmfProblem::from_dense(const Eigen::MatrixXd& x, double lambda, double w_missing) {
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      if (x(t, c) != 0.0) {
        cols[static_cast<std::size_t>(c)].emplace_back(static_cast<std::size_t>(t), x(t, c));
      }
    }
  }
  return WtmfProblem(static_cast<std::size_t>(x.rows()), std::move(cols), lambda, w_missing);
}

double WtmfProblem::objective(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) const {
  // Unobserved cells: w_m * (P_t . Q_c)^2 summed over everything, then
  // corrected on the observed cells.
  double total = w_missing_ * ((p.transpose() * p) * (q.transpose() * q)).trace();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    for (const auto& [t, x] : columns_[c]) {
      const double pred = p.row(static_cast<Eigen::Index>(t)).dot(q.row(static_cast<Eigen::Index>(c)));
      total += (x - pred) * (x - pred) - w_missing_ * pred * pred;
    }
  }
  return total + lambda_ * (p.squaredNorm() + q.squaredNorm());
}

namespace {

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& fixed, const Eigen::MatrixXd& gram,
                            const std::vector<std::pair<std::size_t, double>>& observed, double lambda,
                            double w_missing) {
  const Eigen::Index d = fixed.cols();
  Eigen::MatrixXd a = w_missing * gram;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (const auto& [idx, x] : observed) {
    auto row = fixed.row(static_cast<Eigen::Index>(idx));
    a.noalias() += (1.0 - w_missing) * row.transpose() * row;
    b.noalias() += x * row.transpose();
  }
  a.diagonal().array() += lambda;
  return a.ldlt().solve(b);
}

}  // namespace

Eigen::VectorXd WtmfProblem::solve_term(const Eigen::MatrixXd& q, std::size_t t,
                                        const Eigen::MatrixXd* q_gram) const {
  if (q_gram) {
    return ridge_solve(q, *q_gram, rows_[t], lambda_, w_missing_);
  }
  return ridge_solve(q, q.transpose() * q, rows_[t], lambda_, w_missing_);
}

Eigen::VectorXd WtmfProblem::solve_sentence(const Eigen::MatrixXd& p, std::size_t c,
                                            const Eigen::MatrixXd* p_gram) const {
  if (p_gram) {
    return ridge_solve(p, *p_gram, columns_[c], lambda_, w_missing_);
  }
  return ridge_solve(p, p.transpose() * p, columns_[c], lambda_, w_missing_);
}

Eigen::VectorXd WtmfProblem::solve_column(const Eigen::MatrixXd& p,
                                          const std::vector<std::pair<std::size_t, double>>& col) const {
  return ridge_solve(p, p.transpose() * p, col, lambda_, w_missing_);
}

Factorization wtmf_factorize(const WtmfProblem& problem, std::size_t dim, std::size_t sweeps, std::uint64_t seed) {
  if (dim < 1 || sweeps < 1) {
    throw Error(Errc::invalid_argument, "WTMF needs dim >= 1 and sweeps >= 1");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  const auto v = static_cast<Eigen::Index>(problem.terms());
  const auto n = static_cast<Eigen::Index>(problem.sentences());
  Factorization f;
  f.p.resize(v, d);
  f.q.resize(n, d);
  Rng rng(derive_seed(seed, "wtmf-init"));
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      f.p(i, j) = rng.uniform(-0.05, 0.05);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      f.q(i, j) = rng.uniform(-0.05, 0.05);
    }
  }
  f.half_sweep_objective.push_back(problem.objective(f.p, f.q));
  for (std::size_t s = 0; s < sweeps; ++s) {
    // Rows within a half-sweep only read the other factor, so the update
    // order does not affect the result.
    const Eigen::MatrixXd q_gram = f.q.transpose() * f.q;
    for (Eigen::Index t = 0; t < v; ++t) {
      f.p.row(t) = problem.solve_term(f.q, static_cast<std::size_t>(t), &q_gram).transpose();
    }
    f.half_sweep_objective.push_back(problem.objective(f.p, f.q));
    const Eigen::MatrixXd p_gram = f.p.transpose() * f.p;
    for (Eigen::Index c = 0; c < n; ++c) {
      f.q.row(c) = problem.solve_sentence(f.p, static_cast<std::size_t>(c), &p_gram).transpose();
    }
    f.half_sweep_objective.push_back(problem.objective(f.p, f.q));
  }
  return f;
}

VectorSet WtmfModel::sentence_vectors() const {
  VectorSet out(static_cast<std::size_t>(q.cols()), Provenance::wtmf);
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto row = q.row(static_cast<Eigen::Index>(i));
    out.add(items[i], std::vector<double>(row.begin(), row.end()));
  }
  return out;
}

WtmfModel wtmf_train(const std::vector<Document>& docs, const WtmfConfig& config) {
  WtmfModel model;
  model.vocabulary = build_vocabulary(docs, config.tfidf);
  model.lambda = config.lambda;
  model.w_missing = config.w_missing;
  std::vector<std::vector<std::pair<std::size_t, double>>> columns;
  for (const auto& d : docs) {
    model.items.push_back(d.key);
    columns.push_back(tfidf_column(model.vocabulary, d.text));
  }
  WtmfProblem problem(model.vocabulary.size(), std::move(columns), config.lambda, config.w_missing);
  auto f = wtmf_factorize(problem, config.dim, config.sweeps, config.seed);
  model.p = std::move(f.p);
  model.q = std::move(f.q);
  for (std::size_t i = 2; i < f.half_sweep_objective.size(); i += 2) {
    model.objective.push_back(f.half_sweep_objective[i]);
  }
  return model;
}

FoldIn wtmf_fold_in(const WtmfModel& model, std::string_view text) {
  FoldIn out;
  const auto dim = static_cast<std::size_t>(model.p.cols());
  auto col = tfidf_column(model.vocabulary, text);
  if (col.empty()) {
    out.vector.assign(dim, 0.0);
    out.degenerate = true;
    return out;
  }
  WtmfProblem problem(model.vocabulary.size(), {}, model.lambda, model.w_missing);
  Eigen::VectorXd q = problem.solve_column(model.p, col);
  out.vector.assign(q.begin(), q.end());
  return out;
}

VectorSet wtmf_vectors(const corpus::Corpus& corpus, const WtmfConfig& config, bool pooled) {
  if (pooled) {
    auto cfg = config;
    cfg.seed = derive_seed(config.seed, "wtmf", "pooled");
    return wtmf_train(documents_of(corpus), cfg).sentence_vectors();
  }
  VectorSet out(config.dim, Provenance::wtmf);
  for (const auto& task : corpus.task_ids()) {
    auto cfg = config;
    cfg.seed = derive_seed(config.seed, "wtmf", task);
    out.merge(wtmf_train(documents_of(corpus, task), cfg).sentence_vectors());
  }
  return out;
}

}  // namespace raterkit::repr
