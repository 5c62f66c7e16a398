#pragma once

// Attribute measurements over token sequences. Every function is pure; inputs
// are summaries with the end-of-sequence marker already removed.

#include <cstddef>
#include <vector>

#include "ctrlsum/bin_table.hpp"
#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum::metrics {

struct Fragment {
  std::size_t summary_start = 0;
  std::size_t doc_start = 0;
  std::size_t length = 0;

  friend bool operator==(const Fragment&, const Fragment&) = default;
};

/// Extractive fragments of a summary against its document, in summary order.
struct FragmentSet {
  std::vector<Fragment> fragments;
  std::size_t summary_length = 0;
};

/// Fraction of n-gram occurrences whose n-gram already occurred earlier in
/// the sequence. Zero for sequences shorter than n. Requires n >= 1.
double repeat_ratio(TokenSpan y, std::size_t n);

/// Greedy left-to-right scan: at each summary position take the longest
/// document match (smallest doc_start on ties) and jump past it.
FragmentSet extractive_fragments(TokenSpan doc, TokenSpan summary);

/// Sum of squared fragment lengths over summary length. Throws
/// std::invalid_argument for an empty summary.
double extractive_density(TokenSpan doc, TokenSpan summary);

/// 1 for density in (3.3, inf], 2 for (1.3, 3.3], 3 for [0, 1.3].
int abstractiveness_bin(double density);

/// Fraction of terminator-delimited sentences (a trailing unterminated run
/// counts) in which some requested entity occurs at least twice.
double entity_repetition_fraction(TokenSpan y, std::span<const TokenId> requested,
                                  TokenId terminator = Vocabulary::kTerminator);

/// 1 when y uses the conjunction and the reference does not.
int conjunction_indicator(TokenSpan y, TokenSpan reference,
                          TokenId conjunction = Vocabulary::kConjunction);

/// Fraction of requested entities present in y. Throws std::invalid_argument
/// for an empty request.
double appear_fraction(TokenSpan y, std::span<const TokenId> requested);

std::size_t lcs_length(TokenSpan a, TokenSpan b);

/// Harmonic mean of LCS precision (over y) and recall (over the reference).
double lcs_f1(TokenSpan y, TokenSpan reference);

/// LCS length over the reference length; 0 for an empty reference.
double lcs_recall(TokenSpan candidate, TokenSpan reference);

int length_bin_of(std::size_t length, const BinTable& table);

/// Splits at terminators; each sentence keeps its terminator.
std::vector<TokenSeq> split_sentences(TokenSpan y, TokenId terminator = Vocabulary::kTerminator);

}  // namespace ctrlsum::metrics
