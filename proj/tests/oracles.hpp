// Reference computations written from the textbook definitions, kept apart
// from the library code they check.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<std::int64_t>>;

/// Weighted kappa with agreement weights, evaluated cell by cell:
/// kappa = (sum w O / N - sum w r c / N^2) / (1 - sum w r c / N^2).
inline double weighted_kappa(const Matrix& m, const std::function<double(int, int)>& agreement_weight) {
  const int k = static_cast<int>(m.size());
  double n = 0;
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      n += static_cast<double>(m[i][j]);
      rows[i] += static_cast<double>(m[i][j]);
      cols[j] += static_cast<double>(m[i][j]);
    }
  }
  double observed = 0.0;
  double expected = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      observed += agreement_weight(i, j) * static_cast<double>(m[i][j]) / n;
      expected += agreement_weight(i, j) * rows[i] * cols[j] / (n * n);
    }
  }
  return (observed - expected) / (1.0 - expected);
}

inline double cohen(const Matrix& m) {
  return weighted_kappa(m, [](int i, int j) { return i == j ? 1.0 : 0.0; });
}

inline double qwk(const Matrix& m) {
  const double km1 = static_cast<double>(m.size() - 1);
  return weighted_kappa(m, [km1](int i, int j) { return 1.0 - (i - j) * (i - j) / (km1 * km1); });
}

/// Fleiss' kappa from explicit rater labels: each item lists the label given
/// by each of its n raters. Observed agreement is the share of agreeing
/// ordered rater pairs per item; chance agreement uses pooled label shares.
inline double fleiss_from_labels(const std::vector<std::vector<int>>& items, int categories) {
  double p_bar = 0.0;
  std::vector<double> share(categories, 0.0);
  double total = 0.0;
  for (const auto& labels : items) {
    std::int64_t agree = 0, pairs = 0;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      share[labels[a]] += 1.0;
      total += 1.0;
      for (std::size_t b = 0; b < labels.size(); ++b) {
        if (a == b) continue;
        ++pairs;
        agree += labels[a] == labels[b];
      }
    }
    p_bar += static_cast<double>(agree) / static_cast<double>(pairs);
  }
  p_bar /= static_cast<double>(items.size());
  double p_e = 0.0;
  for (double s : share) {
    p_e += (s / total) * (s / total);
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

struct PairCounts {
  std::int64_t same_both = 0;
  std::int64_t apart_both = 0;
  std::int64_t disagree = 0;
};

/// O(n^2) scan over unordered pairs.
inline PairCounts pair_scan(const std::vector<int>& a, const std::vector<int>& b) {
  PairCounts c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      if (sa && sb) ++c.same_both;
      else if (!sa && !sb) ++c.apart_both;
      else ++c.disagree;
    }
  }
  return c;
}

/// Every partition of n points into at most max_blocks blocks, as restricted
/// growth strings.
inline std::vector<std::vector<int>> partitions(int n, int max_blocks) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int used) {
    if (pos == n) {
      out.push_back(cur);
      return;
    }
    for (int b = 0; b <= used && b < max_blocks; ++b) {
      cur[pos] = b;
      rec(pos + 1, std::max(used, b + 1));
    }
  };
  if (n == 0) {
    out.push_back({});
  } else {
    rec(0, 0);
  }
  return out;
}

}  // namespace oracle
