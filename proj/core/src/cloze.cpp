#include "ctrlsum/cloze.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ctrlsum/error.hpp"
#include "ctrlsum/metrics.hpp"

namespace ctrlsum {
namespace {

bool contains(TokenSpan seq, TokenId t) { return std::find(seq.begin(), seq.end(), t) != seq.end(); }

std::map<TokenId, int> window_counts(TokenSpan seq, std::size_t center, int radius) {
  std::map<TokenId, int> counts;
  const std::size_t lo = center >= static_cast<std::size_t>(radius) ? center - static_cast<std::size_t>(radius) : 0;
  const std::size_t hi = std::min(seq.size(), center + static_cast<std::size_t>(radius) + 1);
  for (std::size_t i = lo; i < hi; ++i) {
    if (i != center) ++counts[seq[i]];
  }
  return counts;
}

int overlap(const std::map<TokenId, int>& a, const std::map<TokenId, int>& b) {
  int total = 0;
  for (const auto& [token, count] : a) {
    if (const auto it = b.find(token); it != b.end()) total += std::min(count, it->second);
  }
  return total;
}

double answer_f1(TokenId predicted, TokenId gold) {
  if (gold == kUnanswerable || predicted == kUnanswerable) return predicted == gold ? 1.0 : 0.0;
  // Entities are single tokens, so token-level F1 reduces to exact match.
  return predicted == gold ? 1.0 : 0.0;
}

}  // namespace

void AnswerOracle::validate() const {
  if (window < 1) throw ConfigError("answer oracle window must be >= 1");
  if (!(min_score >= 0.0)) throw ConfigError("answer oracle min_score must be >= 0");
}

std::vector<ClozeItem> make_cloze_items(const Vocabulary& vocab, TokenSpan reference,
                                        std::span<const TokenId> entities, TokenSpan context) {
  std::vector<ClozeItem> items;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const TokenId t = reference[i];
    if (!vocab.is_entity(t) || std::find(entities.begin(), entities.end(), t) == entities.end()) continue;
    ClozeItem item;
    item.question.assign(reference.begin(), reference.end());
    item.question[i] = Vocabulary::kMask;
    item.context.assign(context.begin(), context.end());
    item.answer = t;
    items.push_back(std::move(item));
  }
  return items;
}

std::optional<TokenSeq> pseudo_reference(TokenSpan document, TokenSpan reference,
                                         std::span<const TokenId> entities) {
  const auto sentences = metrics::split_sentences(document);
  std::vector<bool> chosen(sentences.size(), false);
  auto assemble = [&](std::size_t extra) {
    TokenSeq out;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (chosen[k] || k == extra) out.insert(out.end(), sentences[k].begin(), sentences[k].end());
    }
    return out;
  };
  double current = 0.0;
  while (true) {
    double best = current;
    std::size_t best_k = sentences.size();
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (chosen[k]) continue;
      const double recall = metrics::lcs_recall(assemble(k), reference);
      if (recall > best) {
        best = recall;
        best_k = k;
      }
    }
    if (best_k == sentences.size()) break;
    chosen[best_k] = true;
    current = best;
  }
  TokenSeq selection = assemble(sentences.size());
  if (selection.empty()) return std::nullopt;
  for (const TokenId e : entities) {
    if (!contains(selection, e)) return std::nullopt;
  }
  return selection;
}

UnanswerableItems make_unanswerable_items(const Vocabulary& vocab, TokenSpan document, TokenSpan reference,
                                          std::span<const TokenId> entities) {
  UnanswerableItems out;
  const auto questions = make_cloze_items(vocab, reference, entities, reference);

  if (!questions.empty()) {
    std::size_t next_question = 0;
    for (const auto& sentence : metrics::split_sentences(document)) {
      const bool mentions = std::any_of(entities.begin(), entities.end(),
                                        [&](TokenId e) { return contains(sentence, e); });
      if (mentions || metrics::lcs_recall(sentence, reference) > kIrrelevantRecallLimit) continue;
      ClozeItem item;
      item.question = questions[next_question++ % questions.size()].question;
      item.context = sentence;
      item.answer = kUnanswerable;
      out.irrelevant.push_back(std::move(item));
    }
  }

  for (const auto& sentence : metrics::split_sentences(reference)) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (!vocab.is_entity(sentence[i])) continue;
      if (std::none_of(positions.begin(), positions.end(), [&](std::size_t p) { return sentence[p] == sentence[i]; })) {
        positions.push_back(i);
      }
    }
    if (positions.size() < 2) continue;
    ClozeItem item;
    item.question = sentence;
    item.question[positions[0]] = Vocabulary::kMask;
    item.context = sentence;
    item.context[positions[1]] = sentence[positions[0]];
    item.answer = kUnanswerable;
    out.repeated_entity.push_back(std::move(item));
  }
  return out;
}

QaTrainingSet build_qa_training_set(const Vocabulary& vocab, const CorpusSample& sample) {
  QaTrainingSet set;
  if (const auto pseudo = pseudo_reference(sample.document, sample.reference, sample.entities)) {
    set.reference_context = make_cloze_items(vocab, sample.reference, sample.entities, sample.reference);
    set.pseudo_context = make_cloze_items(vocab, sample.reference, sample.entities, *pseudo);
  }
  set.unanswerable = make_unanswerable_items(vocab, sample.document, sample.reference, sample.entities);
  return set;
}

TokenId oracle_answer(const Vocabulary& vocab, const ClozeItem& item, TokenSpan context,
                      const AnswerOracle& oracle) {
  const auto mask = std::find(item.question.begin(), item.question.end(), Vocabulary::kMask);
  if (mask == item.question.end()) throw std::invalid_argument("cloze question has no mask");
  const auto question_window =
      window_counts(item.question, static_cast<std::size_t>(mask - item.question.begin()), oracle.window);
  TokenId best = kUnanswerable;
  int best_score = -1;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (!vocab.is_entity(context[i])) continue;
    const int score = overlap(question_window, window_counts(context, i, oracle.window));
    if (score > best_score) {
      best_score = score;
      best = context[i];
    }
  }
  if (best == kUnanswerable || static_cast<double>(best_score) < oracle.min_score) return kUnanswerable;
  return best;
}

double qa_f1(const Vocabulary& vocab, std::span<const ClozeItem> items, TokenSpan summary,
             const AnswerOracle& oracle) {
  if (items.empty()) throw std::invalid_argument("qa_f1: no cloze items");
  double total = 0.0;
  for (const auto& item : items) total += answer_f1(oracle_answer(vocab, item, summary, oracle), item.answer);
  return total / static_cast<double>(items.size());
}

}  // namespace ctrlsum
