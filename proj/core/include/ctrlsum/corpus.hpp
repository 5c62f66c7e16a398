#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctrlsum/bin_table.hpp"
#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum {

/// Reference entities must also occur within this many leading document tokens.
inline constexpr std::size_t kEntityDocumentWindow = 400;

struct CorpusSample {
  std::string id;
  TokenSeq document;
  TokenSeq reference;
  std::vector<TokenId> entities;  // reference entities, in order of first mention
  int length_bin = 0;
  int abs_bin = 0;

  friend bool operator==(const CorpusSample&, const CorpusSample&) = default;
};

struct Corpus {
  Vocabulary vocab;
  std::vector<CorpusSample> samples;
};

/// Knobs for the synthetic corpus. Documents are terminator-delimited
/// sentences instantiated from random templates; references select document
/// sentences and paraphrase content words to hit an abstractiveness bin.
struct CorpusSpec {
  int num_samples = 2000;
  int num_entities = 10;
  int num_words = 20;
  int num_paraphrases = 20;  // words with synonyms; synonyms never occur in documents
  int synonyms_per_word = 1;  // each substitution picks one uniformly
  // Bin-3 references replace words one at a time until they reach bin 3, as
  // bin 2 does, instead of replacing every paraphrasable word. Combined with
  // several synonyms per word, the original word stays the single most
  // likely token at each position, as in real abstractive references.
  bool minimal_substitution = false;
  int num_templates = 12;
  int template_min_words = 3;
  int template_max_words = 5;
  int conjunction_templates = 2;
  int entity_free_templates = 3;
  int two_entity_templates = 2;
  int doc_min_sentences = 6;
  int doc_max_sentences = 9;
  int doc_entities = 3;  // distinct entities a document draws its mentions from
  // Entity i has type i % entity_types and template entity slots cycle
  // through the types, so which sentence mentions an entity follows from its
  // type. 1 makes every slot accept any document entity.
  int entity_types = 3;
  // Documents list their sentences in template order, the way news follows a
  // house structure, so sentence order is recoverable from a bag of words.
  bool canonical_order = false;
  int ref_min_sentences = 1;
  int ref_max_sentences = 4;
  std::array<double, 3> abs_mix{1.0, 0.0, 0.0};  // target share of abstractiveness bins 1..3

  /// Throws ConfigError naming the first infeasible setting.
  void validate() const;
};

/// Deterministic in (spec, seed). Length bins are assigned from a table built
/// on the generated samples; callers splitting the corpus rebuild it on the
/// training split with assign_length_bins().
Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed);

/// Entities that occur in the reference and within the first
/// kEntityDocumentWindow document tokens, ordered by first reference mention.
std::vector<TokenId> reference_entities(const Vocabulary& vocab, TokenSpan document, TokenSpan reference);

void assign_length_bins(std::vector<CorpusSample>& samples, const BinTable& table);
BinTable build_length_bins(const std::vector<CorpusSample>& samples, std::string corpus_id = {});

/// Keeps only reference sentences that mention a reference entity. Returns
/// nullopt when the sample has no entities or no sentence survives.
/// Precomputed bins are recomputed against `table`.
std::optional<CorpusSample> filter_reference_for_entities(const CorpusSample& sample, const BinTable& table);

// One JSON record per line: id, document, reference, entities, length_bin,
// abs_bin, with token strings space-separated.
std::string sample_to_jsonl(const Vocabulary& vocab, const CorpusSample& sample);
CorpusSample sample_from_jsonl(const Vocabulary& vocab, const std::string& line);
void write_jsonl(const std::filesystem::path& path, const Vocabulary& vocab,
                 const std::vector<CorpusSample>& samples);
std::vector<CorpusSample> read_jsonl(const std::filesystem::path& path, const Vocabulary& vocab);

std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ctrlsum
