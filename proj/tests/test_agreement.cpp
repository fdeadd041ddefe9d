#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "raterkit/agreement.hpp"
#include "raterkit/random.hpp"

using namespace raterkit;
using namespace raterkit::agreement;

namespace {

ConfusionMatrix from_rows(const oracle::Matrix& m) {
  std::vector<std::int64_t> flat;
  for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
  return ConfusionMatrix(static_cast<int>(m.size()), flat);
}

corpus::Corpus small_corpus(const std::vector<corpus::ScoreRecord>& scores) {
  std::vector<corpus::Response> responses;
  for (int s = 1; s <= 6; ++s) {
    responses.push_back({"s" + std::to_string(s), "2a", "text"});
  }
  return corpus::Corpus(responses, scores);
}

}  // namespace

TEST_CASE("confusion matrix counts") {
  std::vector<int> a{0, 1, 2}, b{0, 1, 2};
  auto cm = confusion_matrix(a, b);
  CHECK(cm.trace() == 3);
  CHECK(cm.total() == 3);

  std::vector<int> c{2, 2, 0}, d{1, 2, 0};
  auto cm2 = confusion_matrix(c, d);
  CHECK(cm2.at(2, 1) == 1);
  CHECK(cm2.at(2, 2) == 1);
  CHECK(cm2.at(0, 0) == 1);
  CHECK(cm2.total() == 3);

  auto empty = confusion_matrix(std::vector<int>{}, std::vector<int>{});
  CHECK(empty.total() == 0);

  CHECK_THROWS_AS(confusion_matrix(std::vector<int>{0}, std::vector<int>{0, 1}), Error);
  CHECK_THROWS_AS(confusion_matrix(std::vector<int>{3}, std::vector<int>{0}), Error);
  CHECK_THROWS_AS(confusion_matrix(std::vector<int>{-1}, std::vector<int>{0}), Error);
}

TEST_CASE("agreement profile") {
  auto p = agreement_profile(from_rows({{5, 0, 0}, {0, 5, 0}, {0, 0, 5}}));
  CHECK(p.percent_agreement == 1.0);
  CHECK(p.discrepancies[1] == 0);
  CHECK(p.discrepancies[2] == 0);

  auto q = agreement_profile(from_rows({{0, 0, 4}, {0, 0, 0}, {0, 0, 0}}));
  CHECK(q.percent_agreement == 0.0);
  CHECK(q.discrepancies[2] == 4);

  auto r = agreement_profile(from_rows({{3, 1, 0}, {0, 4, 1}, {1, 0, 2}}));
  CHECK(r.percent_agreement == doctest::Approx(9.0 / 12.0));
  CHECK(r.discrepancies[1] == 2);
  CHECK(r.discrepancies[2] == 1);

  auto e = agreement_profile(ConfusionMatrix(3));
  CHECK(e.degenerate);
  CHECK(e.percent_agreement == 1.0);
}

TEST_CASE("cohen kappa worked values") {
  CHECK(cohen_kappa(from_rows({{45, 5}, {5, 45}})).value == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(cohen_kappa(from_rows({{3, 0, 0}, {0, 7, 0}, {0, 0, 1}})).value == doctest::Approx(1.0));
  // Outer product of marginals: observed agreement equals chance.
  CHECK(std::abs(cohen_kappa(from_rows({{2, 4, 2}, {3, 6, 3}, {1, 2, 1}})).value) < 1e-15);
  CHECK_THROWS_AS(cohen_kappa(from_rows({{9, 0}, {0, 0}})), Error);
  try {
    cohen_kappa(from_rows({{0, 0, 0}, {0, 4, 0}, {0, 0, 0}}));
    FAIL("expected degenerate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate);
  }
}

TEST_CASE("quadratic weighted kappa against the definitional oracle") {
  oracle::Matrix m{{10, 2, 0}, {2, 10, 2}, {0, 2, 10}};
  // Disagreement-weight form evaluated by hand: sum w O = 8 * (1/4) = 2;
  // marginals are 12, 14, 12 on both sides, N = 38.
  double num = 0, den = 0;
  const double r[3] = {12, 14, 12};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double w = (i - j) * (i - j) / 4.0;
      num += w * static_cast<double>(m[i][j]);
      den += w * r[i] * r[j] / 38.0;
    }
  }
  const double hand = 1.0 - num / den;
  CHECK(quadratic_weighted_kappa(from_rows(m)).value == doctest::Approx(hand).epsilon(1e-14));
  CHECK(quadratic_weighted_kappa(from_rows(m)).value == doctest::Approx(oracle::qwk(m)).epsilon(1e-14));
  CHECK(quadratic_weighted_kappa(from_rows({{4, 0, 0}, {0, 0, 0}, {0, 0, 6}})).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(quadratic_weighted_kappa(from_rows({{0, 0, 0}, {0, 5, 0}, {0, 0, 0}})), Error);
}

TEST_CASE("kappa properties on random matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    oracle::Matrix m(k, std::vector<std::int64_t>(k));
    for (auto& row : m) {
      for (auto& v : row) v = static_cast<std::int64_t>(rng.below(20));
    }
    auto cm = from_rows(m);
    double c = 0, q = 0;
    try {
      c = cohen_kappa(cm).value;
      q = quadratic_weighted_kappa(cm).value;
    } catch (const Error&) {
      continue;
    }
    CHECK(c <= 1.0 + 1e-12);
    CHECK(q <= 1.0 + 1e-12);
    // Swapping the raters transposes the matrix and leaves both kappas alone.
    CHECK(cohen_kappa(cm.transposed()).value == doctest::Approx(c).epsilon(1e-12));
    CHECK(quadratic_weighted_kappa(cm.transposed()).value == doctest::Approx(q).epsilon(1e-12));
    // Reversing the label order keeps every squared distance.
    oracle::Matrix rev(k, std::vector<std::int64_t>(k));
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) rev[i][j] = m[k - 1 - i][k - 1 - j];
    }
    CHECK(quadratic_weighted_kappa(from_rows(rev)).value == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("fleiss kappa") {
  CHECK(fleiss_kappa({{3, 0, 0}, {0, 3, 0}}).value == 1.0);
  CHECK(fleiss_kappa({{0, 0, 3}, {0, 3, 0}, {3, 0, 0}}).value == 1.0);
  CHECK_THROWS_AS(fleiss_kappa({{3, 0, 0}, {0, 2, 0}}), Error);
  CHECK_THROWS_AS(fleiss_kappa({{1, 0, 0}}), Error);
  CHECK_THROWS_AS(fleiss_kappa({}), Error);
  try {
    fleiss_kappa({{3, 0, 0}, {3, 0, 0}});
    FAIL("expected degenerate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate);
  }
  // Two raters: Fleiss equals Scott's pi, computed here directly.
  std::vector<std::vector<std::int64_t>> t{{2, 0, 0}, {1, 1, 0}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
  const double p_o = 3.0 / 5.0;
  const double p0 = 3.0 / 10, p1 = 4.0 / 10, p2 = 3.0 / 10;
  const double p_e = p0 * p0 + p1 * p1 + p2 * p2;
  CHECK(fleiss_kappa(t).value == doctest::Approx((p_o - p_e) / (1 - p_e)).epsilon(1e-14));
}

TEST_CASE("interpretation bands are left-closed") {
  CHECK(interpret_kappa(-0.01).band == Band::worse_than_chance);
  CHECK(interpret_kappa(0.0).band == Band::slight);
  CHECK(interpret_kappa(0.2).band == Band::fair);
  CHECK(interpret_kappa(0.4).band == Band::moderate);
  CHECK(interpret_kappa(0.6).band == Band::substantial);
  CHECK(interpret_kappa(0.8).band == Band::almost_perfect);
  CHECK(interpret_kappa(1.0).band == Band::almost_perfect);
  CHECK(interpret_kappa(-1.0).band == Band::worse_than_chance);
  CHECK(interpret_kappa(0.8342).band == Band::almost_perfect);
  CHECK(interpret_kappa(0.698).band == Band::substantial);
  CHECK_THROWS_AS(interpret_kappa(1.0001), Error);
  CHECK_THROWS_AS(interpret_kappa(-1.5), Error);
  CHECK_THROWS_AS(interpret_kappa(std::nan("")), Error);
  CHECK(std::string(band_label(Band::almost_perfect)) == "almost-perfect");
  CHECK(std::string(band_phrase(Band::almost_perfect)) == "almost perfect");
}

TEST_CASE("parse comparisons") {
  auto c = parse_comparisons("A:C;A@2015:A;A,C,D");
  REQUIRE(c.size() == 3);
  CHECK(c[0] == std::vector<RaterRef>{{"A", "current"}, {"C", "current"}});
  CHECK(c[1] == std::vector<RaterRef>{{"A", "2015"}, {"A", "current"}});
  CHECK(c[2].size() == 3);
  CHECK_THROWS_AS(parse_comparisons("A"), Error);
  CHECK_THROWS_AS(parse_comparisons("A:A"), Error);
  CHECK_THROWS_AS(parse_comparisons("A,C,A"), Error);
  auto pairs = parse_comparisons("A:C,A:D");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1][1] == RaterRef{"D", "current"});
}

TEST_CASE("reliability table row shapes and notes") {
  std::vector<corpus::ScoreRecord> scores;
  const int a[6] = {0, 1, 2, 2, 1, 0};
  const int c[6] = {0, 1, 2, 1, 1, 0};
  const int d[6] = {0, 2, 2, 2, 1, 0};
  for (int s = 0; s < 6; ++s) {
    const std::string id = "s" + std::to_string(s + 1);
    scores.push_back({"A", id, "2a", a[s], "current"});
    scores.push_back({"C", id, "2a", c[s], "current"});
    if (s < 4) scores.push_back({"D", id, "2a", d[s], "current"});
    if (s < 3) scores.push_back({"A", id, "2a", a[s], "2015"});
  }
  auto corpus = small_corpus(scores);
  auto table = reliability_table(corpus, parse_comparisons("A:C;A:D;C:D;A@2015:A;A,C,D;A:E"),
                                 {{"A", "Rater A"}, {"C", "Rater C"}, {"D", "Rater D"}});
  REQUIRE(table.rows.size() == 6);
  CHECK(table.rows[0].kind == KappaKind::qwk);
  CHECK(table.rows[0].label == "Rater A & Rater C");
  CHECK(table.rows[0].n_items == 6);
  CHECK(table.rows[1].n_items == 4);
  CHECK(table.rows[3].label == "Rater A (2015) & Rater A");
  CHECK(table.rows[3].intra_rater());
  CHECK_FALSE(table.rows[0].intra_rater());
  CHECK(*table.rows[3].value == doctest::Approx(1.0));
  CHECK(table.rows[4].kind == KappaKind::fleiss);
  CHECK(table.rows[4].n_items == 4);
  CHECK(table.rows[4].dropped_items == 2);  // s5, s6 lack a D score
  CHECK_FALSE(table.rows[5].value.has_value());
  CHECK_FALSE(table.rows[5].note.empty());

  // Hand check of the A:C row.
  auto cm = confusion_matrix(std::vector<int>(a, a + 6), std::vector<int>(c, c + 6));
  CHECK(*table.rows[0].value == doctest::Approx(quadratic_weighted_kappa(cm).value));

  auto md = to_markdown(table);
  CHECK(md.find("| Rater Comparison | Measure of Reliability |") != std::string::npos);
  CHECK(md.find("| Rater A (2015) & Rater A | QWK = 1.0000 |") != std::string::npos);
  CHECK(md.find("Fleiss' Kappa = ") != std::string::npos);
  CHECK(md.find("almost perfect intra-rater agreement") != std::string::npos);
  CHECK(nlohmann::json::parse(to_json(table))["rows"].size() == 6);
}
