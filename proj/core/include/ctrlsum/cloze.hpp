#pragma once

// Cloze question construction and the deterministic answer oracle behind the
// QA-F1 score.

#include <optional>
#include <vector>

#include "ctrlsum/corpus.hpp"
#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum {

/// Gold answer value for items that must not be answered.
inline constexpr TokenId kUnanswerable = -1;

struct ClozeItem {
  TokenSeq question;  // exactly one Vocabulary::kMask
  TokenSeq context;
  TokenId answer = kUnanswerable;

  friend bool operator==(const ClozeItem&, const ClozeItem&) = default;
};

/// Window-overlap answer extractor: every entity occurrence in the context is
/// a candidate, scored by the multiset overlap between the `window` tokens on
/// each side of the mask and those around the candidate.
struct AnswerOracle {
  int window = 5;
  double min_score = 1.0;

  void validate() const;
};

/// One item per entity occurrence in the reference, masking that occurrence.
std::vector<ClozeItem> make_cloze_items(const Vocabulary& vocab, TokenSpan reference,
                                        std::span<const TokenId> entities, TokenSpan context);

/// Greedily adds document sentences that most improve LCS recall against the
/// reference, stopping when recall stops improving. Returns nullopt when the
/// selection misses any reference entity (including an empty selection).
std::optional<TokenSeq> pseudo_reference(TokenSpan document, TokenSpan reference,
                                         std::span<const TokenId> entities);

/// Items whose gold answer is kUnanswerable.
struct UnanswerableItems {
  std::vector<ClozeItem> irrelevant;
  std::vector<ClozeItem> repeated_entity;
};

/// Maximum LCS recall for a document sentence to serve as an irrelevant context.
inline constexpr double kIrrelevantRecallLimit = 0.2;

/// Irrelevant items pair the reference's cloze questions (round-robin) with
/// document sentences that mention no reference entity and have LCS recall at
/// most kIrrelevantRecallLimit. Repeated-entity items take each reference
/// sentence with two distinct entities, mask the first in the question, and
/// overwrite the second with the first in the context.
UnanswerableItems make_unanswerable_items(const Vocabulary& vocab, TokenSpan document, TokenSpan reference,
                                          std::span<const TokenId> entities);

/// The full question-context-answer set for one sample. Reference-context
/// items are kept only when their pseudo-reference counterpart exists.
struct QaTrainingSet {
  std::vector<ClozeItem> reference_context;
  std::vector<ClozeItem> pseudo_context;
  UnanswerableItems unanswerable;
};
QaTrainingSet build_qa_training_set(const Vocabulary& vocab, const CorpusSample& sample);

/// Entity token or kUnanswerable.
TokenId oracle_answer(const Vocabulary& vocab, const ClozeItem& item, TokenSpan context,
                      const AnswerOracle& oracle);

/// Mean per-item answer F1 with `summary` as every item's context. Throws
/// std::invalid_argument for an empty item list.
double qa_f1(const Vocabulary& vocab, std::span<const ClozeItem> items, TokenSpan summary,
             const AnswerOracle& oracle);

}  // namespace ctrlsum
