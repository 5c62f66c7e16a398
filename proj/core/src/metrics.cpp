#include "ctrlsum/metrics.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace ctrlsum::metrics {

double repeat_ratio(TokenSpan y, std::size_t n) {
  if (n == 0) throw std::invalid_argument("repeat_ratio: n must be >= 1");
  if (y.size() < n) return 0.0;
  const std::size_t total = y.size() - n + 1;
  std::set<std::vector<TokenId>> seen;
  std::size_t repeats = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (!seen.emplace(y.begin() + static_cast<std::ptrdiff_t>(i),
                      y.begin() + static_cast<std::ptrdiff_t>(i + n))
             .second) {
      ++repeats;
    }
  }
  return static_cast<double>(repeats) / static_cast<double>(total);
}

FragmentSet extractive_fragments(TokenSpan doc, TokenSpan summary) {
  FragmentSet out;
  out.summary_length = summary.size();
  std::size_t i = 0;
  while (i < summary.size()) {
    std::size_t best_len = 0;
    std::size_t best_start = 0;
    for (std::size_t j = 0; j < doc.size(); ++j) {
      std::size_t k = 0;
      while (i + k < summary.size() && j + k < doc.size() && summary[i + k] == doc[j + k]) ++k;
      if (k > best_len) {
        best_len = k;
        best_start = j;
      }
    }
    if (best_len > 0) {
      out.fragments.push_back({i, best_start, best_len});
      i += best_len;
    } else {
      ++i;
    }
  }
  return out;
}

double extractive_density(TokenSpan doc, TokenSpan summary) {
  if (summary.empty()) throw std::invalid_argument("extractive_density: empty summary");
  double sum = 0.0;
  for (const auto& f : extractive_fragments(doc, summary).fragments) {
    sum += static_cast<double>(f.length * f.length);
  }
  return sum / static_cast<double>(summary.size());
}

int abstractiveness_bin(double density) {
  if (density > 3.3) return 1;
  if (density > 1.3) return 2;
  return 3;
}

std::vector<TokenSeq> split_sentences(TokenSpan y, TokenId terminator) {
  std::vector<TokenSeq> sentences;
  TokenSeq current;
  for (const TokenId t : y) {
    current.push_back(t);
    if (t == terminator) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

double entity_repetition_fraction(TokenSpan y, std::span<const TokenId> requested, TokenId terminator) {
  const auto sentences = split_sentences(y, terminator);
  if (sentences.empty() || requested.empty()) return 0.0;
  std::size_t repeating = 0;
  for (const auto& sentence : sentences) {
    const bool repeats = std::any_of(requested.begin(), requested.end(), [&](TokenId e) {
      return std::count(sentence.begin(), sentence.end(), e) >= 2;
    });
    if (repeats) ++repeating;
  }
  return static_cast<double>(repeating) / static_cast<double>(sentences.size());
}

int conjunction_indicator(TokenSpan y, TokenSpan reference, TokenId conjunction) {
  const bool in_y = std::find(y.begin(), y.end(), conjunction) != y.end();
  const bool in_ref = std::find(reference.begin(), reference.end(), conjunction) != reference.end();
  return in_y && !in_ref ? 1 : 0;
}

double appear_fraction(TokenSpan y, std::span<const TokenId> requested) {
  if (requested.empty()) throw std::invalid_argument("appear_fraction: empty entity request");
  const auto present = std::count_if(requested.begin(), requested.end(), [&](TokenId e) {
    return std::find(y.begin(), y.end(), e) != y.end();
  });
  return static_cast<double>(present) / static_cast<double>(requested.size());
}

std::size_t lcs_length(TokenSpan a, TokenSpan b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const TokenId ta : a) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = ta == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row.back();
}

double lcs_f1(TokenSpan y, TokenSpan reference) {
  if (y.empty() || reference.empty()) return 0.0;
  const auto l = static_cast<double>(lcs_length(y, reference));
  if (l == 0.0) return 0.0;
  const double precision = l / static_cast<double>(y.size());
  const double recall = l / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

double lcs_recall(TokenSpan candidate, TokenSpan reference) {
  if (reference.empty()) return 0.0;
  return static_cast<double>(lcs_length(candidate, reference)) / static_cast<double>(reference.size());
}

int length_bin_of(std::size_t length, const BinTable& table) {
  int bin = 1;
  for (const int b : table.boundaries) {
    if (static_cast<long long>(length) > b) ++bin;
  }
  return bin;
}

}  // namespace ctrlsum::metrics
