#include "ctrlsum/vocabulary.hpp"

#include <sstream>

#include "ctrlsum/error.hpp"

namespace ctrlsum {

Vocabulary::Vocabulary() {
  add("<eos>");
  add(".");
  add("but");
  add("<mask>");
  add("<ent>");
  for (int bin = 1; bin <= kLengthBins; ++bin) add("<len_" + std::to_string(bin) + ">");
  for (int bin = 1; bin <= kAbstractivenessBins; ++bin) add("<abs_" + std::to_string(bin) + ">");
}

Vocabulary::Vocabulary(std::span<const std::string> entities, std::span<const std::string> words)
    : Vocabulary() {
  first_entity_ = static_cast<TokenId>(tokens_.size());
  for (const auto& e : entities) add(e);
  entity_count_ = static_cast<TokenId>(entities.size());
  for (const auto& w : words) add(w);
}

void Vocabulary::add(std::string token) {
  if (token.empty() || token.find_first_of(" \t\n") != std::string::npos) {
    throw ConfigError("vocabulary token must be non-empty and whitespace-free: '" + token + "'");
  }
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!index_.emplace(token, id).second) throw ConfigError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (!valid(id)) throw DataError("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) throw DataError("unknown token '" + std::string(token) + "'");
  return it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

TokenId Vocabulary::length_control(int bin) {
  if (bin < 1 || bin > kLengthBins) throw ConfigError("length bin out of range: " + std::to_string(bin));
  return kFirstLengthControl + bin - 1;
}

TokenId Vocabulary::abs_control(int bin) {
  if (bin < 1 || bin > kAbstractivenessBins) {
    throw ConfigError("abstractiveness bin out of range: " + std::to_string(bin));
  }
  return kFirstAbsControl + bin - 1;
}

std::vector<TokenId> Vocabulary::entities() const {
  std::vector<TokenId> out;
  out.reserve(static_cast<std::size_t>(entity_count_));
  for (TokenId i = 0; i < entity_count_; ++i) out.push_back(first_entity_ + i);
  return out;
}

TokenSeq Vocabulary::encode(std::string_view text) const {
  TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(id(word));
  return out;
}

std::string Vocabulary::decode(TokenSpan seq) const {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += token(seq[i]);
  }
  return out;
}

}  // namespace ctrlsum
