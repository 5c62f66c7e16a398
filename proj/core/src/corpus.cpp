#include "ctrlsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctrlsum/error.hpp"
#include "ctrlsum/metrics.hpp"
#include "ctrlsum/rng.hpp"

namespace ctrlsum {
namespace {

constexpr std::array kEntityNames = {
    "arsenal", "chelsea", "paris",  "london", "obama",   "merkel", "google", "apple",
    "nasa",    "unicef",  "boeing", "tokyo",  "madrid",  "fifa",   "intel",  "biden",
};
constexpr std::array kWordNames = {
    "beat",   "signed",  "visited", "announced", "opened",  "closed",  "praised",  "rejected",
    "backed", "started", "won",     "lost",      "met",     "joined",  "left",     "reported",
    "said",   "planned", "hosted",  "raised",    "tax",     "deal",    "match",    "plan",
    "talks",  "budget",  "vote",    "report",    "project", "network", "contract", "summit",
};
constexpr std::array kSynonymNames = {
    "defeated", "inked",     "toured",   "unveiled",  "launched", "shut",     "lauded",    "refused",
    "endorsed", "began",     "secured",  "forfeited", "greeted",  "entered",  "exited",    "disclosed",
    "stated",   "intended",  "staged",   "increased", "levy",     "pact",     "fixture",   "scheme",
    "meeting",  "finances",  "ballot",   "study",     "venture",  "grid",     "agreement", "forum",
};

std::vector<std::string> pool_names(std::span<const char* const> pool, int count, const std::string& prefix) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(static_cast<std::size_t>(i) < pool.size() ? std::string(pool[static_cast<std::size_t>(i)])
                                                            : prefix + std::to_string(i));
  }
  return out;
}

constexpr int kEntitySlot = -1;
constexpr int kConjunctionSlot = -2;

struct Template {
  std::vector<int> slots;  // word index, kEntitySlot, or kConjunctionSlot
  std::vector<int> slot_types;  // entity type of each entity slot, in order
  int entity_slots = 0;
};

struct Sentence {
  TokenSeq tokens;  // includes the terminator
};

class Generator {
 public:
  Generator(const CorpusSpec& spec, std::uint64_t seed)
      : spec_(spec),
        rng_(seed),
        entity_names_(pool_names(kEntityNames, spec.num_entities, "entity")),
        word_names_(pool_names(kWordNames, spec.num_words, "word")) {
    auto synonyms = pool_names(kSynonymNames, spec.num_paraphrases * spec.synonyms_per_word, "para");
    std::vector<std::string> words = word_names_;
    words.insert(words.end(), synonyms.begin(), synonyms.end());
    vocab_ = Vocabulary(entity_names_, words);
    first_entity_ = Vocabulary::kReserved;
    first_word_ = first_entity_ + spec.num_entities;
    first_synonym_ = first_word_ + spec.num_words;
    build_templates();
  }

  Corpus run() {
    Corpus corpus;
    corpus.vocab = vocab_;
    const auto bins = bin_quota();
    for (int i = 0; i < spec_.num_samples; ++i) {
      corpus.samples.push_back(make_sample(i, bins[static_cast<std::size_t>(i)]));
    }
    const auto table = build_length_bins(corpus.samples, "synthetic");
    assign_length_bins(corpus.samples, table);
    return corpus;
  }

 private:
  void build_templates() {
    std::set<std::pair<int, int>> used_bigrams;
    int next_type = 0;
    for (int t = 0; t < spec_.num_templates; ++t) {
      int entity_slots = 1;
      if (t < spec_.entity_free_templates) {
        entity_slots = 0;
      } else if (t < spec_.entity_free_templates + spec_.two_entity_templates) {
        entity_slots = 2;
      }
      const bool conjunction = t >= spec_.num_templates - spec_.conjunction_templates;
      templates_.push_back(make_template(entity_slots, conjunction, used_bigrams));
      for (int e = 0; e < entity_slots; ++e) {
        templates_.back().slot_types.push_back(next_type);
        next_type = (next_type + 1) % spec_.entity_types;
      }
    }
  }

  Template make_template(int entity_slots, bool conjunction, std::set<std::pair<int, int>>& used) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const int n = rng_.between(spec_.template_min_words, spec_.template_max_words);
      std::vector<int> pool(static_cast<std::size_t>(spec_.num_words));
      std::iota(pool.begin(), pool.end(), 0);
      shuffle(pool, rng_);
      std::vector<int> words(pool.begin(), pool.begin() + n);
      bool clash = false;
      for (std::size_t k = 1; k < words.size(); ++k) clash |= used.contains({words[k - 1], words[k]});
      if (clash) continue;
      for (std::size_t k = 1; k < words.size(); ++k) used.insert({words[k - 1], words[k]});

      Template tpl;
      tpl.slots = words;
      if (conjunction) {
        const auto pos = static_cast<std::ptrdiff_t>(rng_.between(1, n - 1));
        tpl.slots.insert(tpl.slots.begin() + pos, kConjunctionSlot);
      }
      for (int e = 0; e < entity_slots; ++e) {
        const auto pos = static_cast<std::ptrdiff_t>(rng_.index(tpl.slots.size() + 1));
        tpl.slots.insert(tpl.slots.begin() + pos, kEntitySlot);
      }
      tpl.entity_slots = entity_slots;
      return tpl;
    }
    throw ConfigError("corpus spec: cannot build templates without shared word bigrams; "
                      "increase num_words or reduce num_templates");
  }

  std::vector<int> bin_quota() {
    std::vector<int> bins;
    const auto n = static_cast<std::size_t>(spec_.num_samples);
    std::array<std::size_t, 3> counts{};
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < 3; ++b) {
      counts[b] = static_cast<std::size_t>(std::floor(spec_.abs_mix[b] * static_cast<double>(n)));
      assigned += counts[b];
    }
    // Largest remainders take the leftover samples.
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ra = spec_.abs_mix[a] * static_cast<double>(n) - static_cast<double>(counts[a]);
      const double rb = spec_.abs_mix[b] * static_cast<double>(n) - static_cast<double>(counts[b]);
      return ra > rb;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
    for (std::size_t b = 0; b < 3; ++b) bins.insert(bins.end(), counts[b], static_cast<int>(b) + 1);
    shuffle(bins, rng_);
    return bins;
  }

  int entity_type(TokenId e) const { return (e - first_entity_) % spec_.entity_types; }

  // An entity slot takes a document entity of the slot's type, falling back
  // to any unused document entity when the type is exhausted.
  Sentence instantiate(const Template& tpl, const std::vector<TokenId>& doc_entities) {
    Sentence s;
    std::vector<TokenId> chosen;
    std::size_t entity_slot = 0;
    for (const int slot : tpl.slots) {
      if (slot == kEntitySlot) {
        const int type = tpl.slot_types[entity_slot++];
        std::vector<TokenId> typed;
        std::vector<TokenId> unused;
        for (const TokenId e : doc_entities) {
          if (std::find(chosen.begin(), chosen.end(), e) != chosen.end()) continue;
          unused.push_back(e);
          if (entity_type(e) == type) typed.push_back(e);
        }
        const auto& pool = typed.empty() ? unused : typed;
        const TokenId e = pool[rng_.index(pool.size())];
        chosen.push_back(e);
        s.tokens.push_back(e);
      } else if (slot == kConjunctionSlot) {
        s.tokens.push_back(Vocabulary::kConjunction);
      } else {
        s.tokens.push_back(first_word_ + slot);
      }
    }
    s.tokens.push_back(Vocabulary::kTerminator);
    return s;
  }

  bool paraphrasable(TokenId t) const { return t >= first_word_ && t < first_word_ + spec_.num_paraphrases; }
  TokenId synonym(TokenId t) {
    const int k = spec_.synonyms_per_word;
    const auto pick = k > 1 ? static_cast<TokenId>(rng_.index(static_cast<std::uint64_t>(k))) : 0;
    return first_synonym_ + (t - first_word_) * k + pick;
  }

  std::optional<TokenSeq> realize(const TokenSeq& document, TokenSeq reference, int bin) {
    if (bin == 1) {
      if (metrics::abstractiveness_bin(metrics::extractive_density(document, reference)) == 1) return reference;
      return std::nullopt;
    }
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (paraphrasable(reference[i])) positions.push_back(i);
    }
    if (bin == 3 && !spec_.minimal_substitution) {
      for (const auto i : positions) reference[i] = synonym(reference[i]);
      if (metrics::abstractiveness_bin(metrics::extractive_density(document, reference)) == 3) return reference;
      return std::nullopt;
    }
    shuffle(positions, rng_);
    for (const auto i : positions) {
      reference[i] = synonym(reference[i]);
      const int got = metrics::abstractiveness_bin(metrics::extractive_density(document, reference));
      if (got == bin) return reference;
      if (got > bin) return std::nullopt;
    }
    return std::nullopt;
  }

  // One entity of every type first, then the rest uniformly.
  std::vector<TokenId> draw_document_entities() {
    std::vector<TokenId> pool = vocab_.entities();
    shuffle(pool, rng_);
    std::vector<TokenId> out;
    for (int type = 0; type < spec_.entity_types; ++type) {
      const auto it = std::find_if(pool.begin(), pool.end(), [&](TokenId e) { return entity_type(e) == type; });
      out.push_back(*it);
      pool.erase(it);
    }
    out.insert(out.end(), pool.begin(), pool.begin() + (spec_.doc_entities - spec_.entity_types));
    return out;
  }

  CorpusSample make_sample(int index, int bin) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const auto entities = draw_document_entities();

      const int n_sent = rng_.between(spec_.doc_min_sentences, spec_.doc_max_sentences);
      std::vector<std::size_t> tpl_ids(templates_.size());
      std::iota(tpl_ids.begin(), tpl_ids.end(), 0);
      shuffle(tpl_ids, rng_);
      if (spec_.canonical_order) std::sort(tpl_ids.begin(), tpl_ids.begin() + n_sent);
      std::vector<Sentence> sentences;
      TokenSeq document;
      for (int s = 0; s < n_sent; ++s) {
        sentences.push_back(instantiate(templates_[tpl_ids[static_cast<std::size_t>(s)]], entities));
        document.insert(document.end(), sentences.back().tokens.begin(), sentences.back().tokens.end());
      }

      const int n_ref = rng_.between(spec_.ref_min_sentences, std::min(spec_.ref_max_sentences, n_sent));
      std::vector<std::size_t> picks(static_cast<std::size_t>(n_sent));
      std::iota(picks.begin(), picks.end(), 0);
      shuffle(picks, rng_);
      picks.resize(static_cast<std::size_t>(n_ref));
      std::sort(picks.begin(), picks.end());
      TokenSeq reference;
      for (const auto p : picks) {
        reference.insert(reference.end(), sentences[p].tokens.begin(), sentences[p].tokens.end());
      }

      auto realized = realize(document, reference, bin);
      if (!realized) continue;

      CorpusSample sample;
      sample.id = "s" + std::to_string(index);
      sample.document = std::move(document);
      sample.reference = std::move(*realized);
      sample.entities = reference_entities(vocab_, sample.document, sample.reference);
      sample.abs_bin = bin;
      return sample;
    }
    throw ConfigError("corpus spec: could not realize abstractiveness bin " + std::to_string(bin) +
                      " after 200 attempts; check num_paraphrases and template lengths");
  }

  const CorpusSpec& spec_;
  Rng rng_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> word_names_;
  Vocabulary vocab_;
  TokenId first_entity_ = 0;
  TokenId first_word_ = 0;
  TokenId first_synonym_ = 0;
  std::vector<Template> templates_;
};

}  // namespace

void CorpusSpec::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("corpus spec: " + what); };
  if (num_samples < 10) fail("num_samples must be >= 10 to build length bins");
  if (num_entities < 1) fail("num_entities must be >= 1");
  if (num_words < template_max_words) fail("num_words must be >= template_max_words");
  if (num_paraphrases < 0 || num_paraphrases > num_words) fail("num_paraphrases must be in [0, num_words]");
  if (synonyms_per_word < 1) fail("synonyms_per_word must be >= 1");
  if (template_min_words < 2 || template_max_words < template_min_words) {
    fail("template word range must satisfy 2 <= min <= max");
  }
  if (entity_free_templates + two_entity_templates > num_templates) {
    fail("entity_free_templates + two_entity_templates exceeds num_templates");
  }
  if (conjunction_templates < 0 || conjunction_templates > num_templates) fail("bad conjunction_templates");
  if (doc_min_sentences < 1 || doc_max_sentences < doc_min_sentences) fail("bad document sentence range");
  if (doc_max_sentences > num_templates) fail("doc_max_sentences exceeds num_templates (sentences use distinct templates)");
  if (doc_entities < 1 || doc_entities > num_entities) fail("doc_entities must be in [1, num_entities]");
  if (two_entity_templates > 0 && doc_entities < 2) fail("two-entity templates need doc_entities >= 2");
  if (entity_types < 1 || entity_types > doc_entities) fail("entity_types must be in [1, doc_entities]");
  if (ref_min_sentences < 1 || ref_max_sentences < ref_min_sentences) fail("bad reference sentence range");
  if (ref_min_sentences > doc_min_sentences) fail("ref_min_sentences exceeds doc_min_sentences");
  double total = 0.0;
  for (const double m : abs_mix) {
    if (!(m >= 0.0)) fail("abs_mix entries must be non-negative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("abs_mix must sum to 1");
  if ((abs_mix[1] > 0.0 || abs_mix[2] > 0.0) && num_paraphrases == 0) {
    fail("abstractiveness bins 2 and 3 need a non-empty paraphrase map (num_paraphrases > 0)");
  }
}

Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  spec.validate();
  return Generator(spec, seed).run();
}

std::vector<TokenId> reference_entities(const Vocabulary& vocab, TokenSpan document, TokenSpan reference) {
  const auto window = document.first(std::min(document.size(), kEntityDocumentWindow));
  std::vector<TokenId> out;
  for (const TokenId t : reference) {
    if (!vocab.is_entity(t) || std::find(out.begin(), out.end(), t) != out.end()) continue;
    if (std::find(window.begin(), window.end(), t) != window.end()) out.push_back(t);
  }
  return out;
}

BinTable build_length_bins(const std::vector<CorpusSample>& samples, std::string corpus_id) {
  std::vector<int> lengths;
  lengths.reserve(samples.size());
  for (const auto& s : samples) lengths.push_back(static_cast<int>(s.reference.size()));
  return build_length_bins(std::span<const int>(lengths), std::move(corpus_id));
}

void assign_length_bins(std::vector<CorpusSample>& samples, const BinTable& table) {
  for (auto& s : samples) s.length_bin = metrics::length_bin_of(s.reference.size(), table);
}

std::optional<CorpusSample> filter_reference_for_entities(const CorpusSample& sample, const BinTable& table) {
  if (sample.entities.empty()) return std::nullopt;
  TokenSeq kept;
  for (const auto& sentence : metrics::split_sentences(sample.reference)) {
    const bool mentions = std::any_of(sample.entities.begin(), sample.entities.end(), [&](TokenId e) {
      return std::find(sentence.begin(), sentence.end(), e) != sentence.end();
    });
    if (mentions) kept.insert(kept.end(), sentence.begin(), sentence.end());
  }
  if (kept.empty()) return std::nullopt;
  CorpusSample out = sample;
  out.reference = std::move(kept);
  out.length_bin = metrics::length_bin_of(out.reference.size(), table);
  out.abs_bin = metrics::abstractiveness_bin(metrics::extractive_density(out.document, out.reference));
  return out;
}

std::string sample_to_jsonl(const Vocabulary& vocab, const CorpusSample& sample) {
  nlohmann::json j;
  j["id"] = sample.id;
  j["document"] = vocab.decode(sample.document);
  j["reference"] = vocab.decode(sample.reference);
  std::vector<std::string> entities;
  for (const TokenId e : sample.entities) entities.push_back(vocab.token(e));
  j["entities"] = entities;
  j["length_bin"] = sample.length_bin;
  j["abs_bin"] = sample.abs_bin;
  return j.dump();
}

CorpusSample sample_from_jsonl(const Vocabulary& vocab, const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CorpusSample s;
    s.id = j.at("id").get<std::string>();
    s.document = vocab.encode(j.at("document").get<std::string>());
    s.reference = vocab.encode(j.at("reference").get<std::string>());
    for (const auto& e : j.at("entities")) {
      const TokenId id = vocab.id(e.get<std::string>());
      if (!vocab.is_entity(id)) throw DataError("'" + e.get<std::string>() + "' is not an entity token");
      s.entities.push_back(id);
    }
    s.length_bin = j.at("length_bin").get<int>();
    s.abs_bin = j.at("abs_bin").get<int>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed corpus record: ") + e.what());
  }
}

void write_jsonl(const std::filesystem::path& path, const Vocabulary& vocab,
                 const std::vector<CorpusSample>& samples) {
  std::string text;
  for (const auto& s : samples) {
    text += sample_to_jsonl(vocab, s);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<CorpusSample> read_jsonl(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  std::vector<CorpusSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_jsonl(vocab, line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::json j;
  j["format_version"] = 1;
  const auto strings = vocab.strings();
  std::vector<std::string> ents;
  std::vector<std::string> words;
  for (TokenId id = Vocabulary::kReserved; static_cast<std::size_t>(id) < strings.size(); ++id) {
    (vocab.is_entity(id) ? ents : words).push_back(strings[static_cast<std::size_t>(id)]);
  }
  j["entities"] = ents;
  j["words"] = words;
  return j.dump(2);
}

Vocabulary vocabulary_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw DataError("unsupported vocabulary format version");
    const auto ents = j.at("entities").get<std::vector<std::string>>();
    const auto words = j.at("words").get<std::vector<std::string>>();
    return Vocabulary(ents, words);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed vocabulary: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace ctrlsum
