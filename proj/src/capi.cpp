#include "raterkit/raterkit.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "raterkit/agreement.hpp"
#include "raterkit/allocation.hpp"
#include "raterkit/clustering.hpp"
#include "raterkit/config.hpp"
#include "raterkit/corpus.hpp"
#include "raterkit/pipeline.hpp"
#include "raterkit/representations.hpp"

struct rk_corpus {
  raterkit::corpus::Corpus value;
};

struct rk_vectors {
  raterkit::repr::VectorSet value;
};

namespace {

using raterkit::Errc;
using raterkit::Error;

thread_local std::string last_error;

rk_status fail(rk_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

/// Runs body, converting exceptions to status codes.
template <typename Fn>
rk_status guarded(Fn&& body) {
  try {
    last_error.clear();
    body();
    return RK_OK;
  } catch (const Error& e) {
    return fail(static_cast<rk_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(RK_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RK_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw Error(Errc::invalid_argument, what);
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
void write_file(const char* path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::io, std::string("cannot write '") + path + "'");
  }
  fn(out);
}

raterkit::agreement::ConfusionMatrix matrix_of(const int64_t* data, int k) {
  require(data != nullptr, "matrix is null");
  require(k >= 2, "need at least 2 categories");
  return raterkit::agreement::ConfusionMatrix(
      k, std::vector<std::int64_t>(data, data + static_cast<std::size_t>(k) * static_cast<std::size_t>(k)));
}

rk_status finish_pipeline(const raterkit::pipeline::RunOutcome& outcome, char** report_path_out) {
  if (report_path_out) {
    *report_path_out = dup_string(outcome.report_json.string());
  }
  if (!outcome.ok) {
    throw Error(static_cast<Errc>(outcome.error_code == 99 ? 99 : outcome.error_code),
                "stage '" + outcome.failed_stage + "' failed: " + outcome.message);
  }
  return RK_OK;
}

}  // namespace

extern "C" {

const char* rk_version(void) { return raterkit::pipeline::kVersion; }

const char* rk_last_error(void) { return last_error.c_str(); }

const char* rk_status_name(rk_status status) {
  switch (status) {
    case RK_OK: return "ok";
    case RK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RK_ERR_PARSE: return "parse error";
    case RK_ERR_IO: return "i/o error";
    case RK_ERR_DEGENERATE: return "degenerate input";
    case RK_ERR_INFEASIBLE: return "infeasible";
    case RK_ERR_NOT_FOUND: return "not found";
    case RK_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void rk_string_free(char* s) { std::free(s); }

rk_status rk_confusion_matrix(const int* labels_a, const int* labels_b, size_t n, int k, int64_t* out) {
  return guarded([&] {
    require(out && (n == 0 || (labels_a && labels_b)), "null argument");
    auto cm = raterkit::agreement::confusion_matrix({labels_a, n}, {labels_b, n}, k);
    std::copy(cm.data().begin(), cm.data().end(), out);
  });
}

rk_status rk_cohen_kappa(const int64_t* matrix, int k, double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = raterkit::agreement::cohen_kappa(matrix_of(matrix, k)).value;
  });
}

rk_status rk_quadratic_weighted_kappa(const int64_t* matrix, int k, double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = raterkit::agreement::quadratic_weighted_kappa(matrix_of(matrix, k)).value;
  });
}

rk_status rk_fleiss_kappa(const int64_t* table, size_t items, int k, double* out) {
  return guarded([&] {
    require(out && (items == 0 || table), "null argument");
    require(k >= 2, "need at least 2 categories");
    std::vector<std::vector<std::int64_t>> rows(items);
    for (size_t i = 0; i < items; ++i) {
      rows[i].assign(table + i * static_cast<size_t>(k), table + (i + 1) * static_cast<size_t>(k));
    }
    *out = raterkit::agreement::fleiss_kappa(rows).value;
  });
}

rk_status rk_interpret_kappa(double value, const char** band_label) {
  return guarded([&] {
    require(band_label, "null output");
    *band_label = raterkit::agreement::band_label(raterkit::agreement::interpret_kappa(value).band);
  });
}

rk_status rk_consistency(const int* assignment_a, const int* assignment_b, size_t n, double* out) {
  return guarded([&] {
    require(out && (n == 0 || (assignment_a && assignment_b)), "null argument");
    *out = raterkit::clustering::consistency(std::vector<int>(assignment_a, assignment_a + n),
                                             std::vector<int>(assignment_b, assignment_b + n))
               .value;
  });
}

rk_status rk_corpus_load(const char* responses_path, const char* scores_path, rk_corpus** out) {
  return guarded([&] {
    require(responses_path && out, "null argument");
    raterkit::corpus::Corpus responses(raterkit::corpus::load_responses(responses_path), {});
    auto corpus = scores_path ? raterkit::corpus::load_scores(scores_path, responses) : std::move(responses);
    *out = new rk_corpus{std::move(corpus)};
  });
}

void rk_corpus_free(rk_corpus* corpus) { delete corpus; }

rk_status rk_corpus_counts(const rk_corpus* corpus, size_t* responses, size_t* scores) {
  return guarded([&] {
    require(corpus, "null corpus");
    if (responses) *responses = corpus->value.responses().size();
    if (scores) *scores = corpus->value.scores().size();
  });
}

rk_status rk_corpus_filter(const rk_corpus* corpus, size_t min_tokens, rk_corpus** out, size_t* removed) {
  return guarded([&] {
    require(corpus && out, "null argument");
    auto result = raterkit::corpus::earnest_filter(corpus->value, min_tokens);
    if (removed) *removed = result.removed.size();
    *out = new rk_corpus{std::move(result.corpus)};
  });
}

rk_status rk_corpus_write(const rk_corpus* corpus, const char* responses_path, const char* scores_path) {
  return guarded([&] {
    require(corpus, "null corpus");
    if (responses_path) {
      write_file(responses_path, [&](std::ostream& o) { raterkit::corpus::write_responses(o, corpus->value); });
    }
    if (scores_path) {
      write_file(scores_path, [&](std::ostream& o) { raterkit::corpus::write_scores(o, corpus->value); });
    }
  });
}

rk_status rk_split_write(const rk_corpus* corpus, const double ratios[4], uint64_t seed, const char* out_csv,
                         size_t sizes[4]) {
  return guarded([&] {
    require(corpus && out_csv, "null argument");
    auto props = ratios ? raterkit::corpus::SplitProportions{ratios[0], ratios[1], ratios[2], ratios[3]}
                        : raterkit::corpus::kDefaultProportions;
    const auto& c = corpus->value;
    std::set<raterkit::ItemKey> scored;
    for (const auto& s : c.scores()) {
      scored.insert(s.key());
    }
    auto items = scored.empty() ? c.item_keys() : std::vector<raterkit::ItemKey>(scored.begin(), scored.end());
    auto split = raterkit::corpus::split_dataset(items, props, raterkit::corpus::unanimity_rank(c), seed);
    write_file(out_csv, [&](std::ostream& o) { raterkit::corpus::write_split(o, split); });
    if (sizes) {
      auto s = split.sizes();
      std::copy(s.begin(), s.end(), sizes);
    }
  });
}

rk_status rk_reliability_table(const rk_corpus* corpus, const char* comparisons, const char* names,
                               char** json_out, char** markdown_out) {
  return guarded([&] {
    require(corpus && comparisons, "null argument");
    raterkit::agreement::DisplayNames display;
    if (names) {
      for (const auto& entry : raterkit::split_string(names, ';')) {
        if (raterkit::trim(entry).empty()) continue;
        auto eq = entry.find('=');
        require(eq != std::string::npos, "names look like \"A=Rater A;C=Rater C\"");
        display[std::string(raterkit::trim(entry.substr(0, eq)))] =
            std::string(raterkit::trim(entry.substr(eq + 1)));
      }
    }
    auto table = raterkit::agreement::reliability_table(
        corpus->value, raterkit::agreement::parse_comparisons(comparisons), display);
    char* json = json_out ? dup_string(raterkit::agreement::to_json(table)) : nullptr;
    if (markdown_out) {
      try {
        *markdown_out = dup_string(raterkit::agreement::to_markdown(table));
      } catch (...) {
        std::free(json);
        throw;
      }
    }
    if (json_out) *json_out = json;
  });
}

rk_status rk_allocation_run(const char* design_json, uint64_t seed, const char* out_csv,
                            char** verification_json_out) {
  return guarded([&] {
    require(design_json, "null design");
    auto j = nlohmann::json::parse(design_json);
    raterkit::allocation::AllocationDesign design;
    design.raters = j.at("raters").get<std::vector<std::string>>();
    design.pool = j.at("pool").get<std::vector<std::string>>();
    design.pair_size = j.value("pair_size", std::size_t{0});
    design.consensus_size = j.value("consensus_size", std::size_t{0});
    if (j.contains("pinned")) {
      const auto& p = j.at("pinned");
      raterkit::allocation::PinnedConstraint pin;
      pin.rater_id = p.at("rater").get<std::string>();
      auto req = p.value("required", std::vector<std::string>{});
      pin.required.insert(req.begin(), req.end());
      pin.min_overlap = p.value("min_overlap", std::size_t{0});
      design.pinned = std::move(pin);
    }
    auto allocation = raterkit::allocation::design_allocation(design, seed);
    for (const auto& extra : j.value("extend", std::vector<std::string>{})) {
      allocation = raterkit::allocation::extend_rater_all_shared(allocation, extra);
    }
    auto report = raterkit::allocation::verify_allocation(allocation, design);
    if (out_csv) {
      write_file(out_csv, [&](std::ostream& o) { raterkit::allocation::write_allocation(o, allocation); });
    }
    if (verification_json_out) *verification_json_out = dup_string(report.to_json());
  });
}

rk_status rk_vectors_load(const char* path, size_t expected_dim, rk_vectors** out) {
  return guarded([&] {
    require(path && out, "null argument");
    std::optional<std::size_t> dim;
    if (expected_dim > 0) dim = expected_dim;
    *out = new rk_vectors{raterkit::repr::load_vectors(path, dim)};
  });
}

rk_status rk_vectors_tfidf(const rk_corpus* corpus, size_t min_df, rk_vectors** out) {
  return guarded([&] {
    require(corpus && out, "null argument");
    auto result = raterkit::repr::tfidf_vectorize(raterkit::repr::documents_of(corpus->value), std::nullopt,
                                                  raterkit::repr::TfidfOptions{min_df});
    *out = new rk_vectors{std::move(result.vectors)};
  });
}

rk_status rk_vectors_wtmf(const rk_corpus* corpus, const char* options_json, uint64_t seed, rk_vectors** out) {
  return guarded([&] {
    require(corpus && out, "null argument");
    auto j = options_json ? nlohmann::json::parse(options_json) : nlohmann::json::object();
    raterkit::repr::WtmfConfig config;
    config.dim = j.value("dim", config.dim);
    config.lambda = j.value("lambda", config.lambda);
    config.w_missing = j.value("w_missing", config.w_missing);
    config.sweeps = j.value("sweeps", config.sweeps);
    config.tfidf.min_df = j.value("min_df", config.tfidf.min_df);
    config.seed = seed;
    *out = new rk_vectors{raterkit::repr::wtmf_vectors(corpus->value, config, j.value("pooled", false))};
  });
}

rk_status rk_vectors_save(const rk_vectors* vectors, const char* path) {
  return guarded([&] {
    require(vectors && path, "null argument");
    write_file(path, [&](std::ostream& o) { raterkit::repr::write_vectors(o, vectors->value); });
  });
}

rk_status rk_vectors_info(const rk_vectors* vectors, size_t* count, size_t* dim) {
  return guarded([&] {
    require(vectors, "null vectors");
    if (count) *count = vectors->value.size();
    if (dim) *dim = vectors->value.dim();
  });
}

void rk_vectors_free(rk_vectors* vectors) { delete vectors; }

rk_status rk_pipeline_run(const char* config_path, char** report_path_out) {
  return guarded([&] {
    require(config_path, "null config path");
    finish_pipeline(raterkit::pipeline::run_file(config_path), report_path_out);
  });
}

rk_status rk_pipeline_run_json(const char* config_json, const char* base_dir, char** report_path_out) {
  return guarded([&] {
    require(config_json, "null config");
    finish_pipeline(raterkit::pipeline::run(nlohmann::json::parse(config_json), base_dir ? base_dir : "."),
                    report_path_out);
  });
}

rk_status rk_config_load(const char* config_path, char** json_out) {
  return guarded([&] {
    require(config_path && json_out, "null argument");
    *json_out = dup_string(raterkit::config::load(config_path).dump());
  });
}

}  // extern "C"
