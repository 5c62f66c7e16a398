#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctrlsum {

using TokenId = std::int32_t;

/// A document, reference, or generated summary. Metric functions expect the
/// end-of-sequence marker to be stripped already (see Rollout::summary()).
using TokenSeq = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

inline constexpr int kLengthBins = 10;
inline constexpr int kAbstractivenessBins = 3;
inline constexpr int kControlTokens = kLengthBins + kAbstractivenessBins;

/// Token strings indexed by contiguous ids, with designated subsets.
///
/// The first ids are reserved and laid out identically in every vocabulary:
///
///   0        <eos>       end of sequence (also the decoder's start input)
///   1        .           sentence terminator
///   2        but         the conjunction watched by the conjunction cost
///   3        <mask>      cloze question mask
///   4        <ent>       separator between requested entities
///   5..14    <len_1>..<len_10>
///   15..17   <abs_1>..<abs_3>
///
/// Entity tokens and ordinary words follow.
class Vocabulary {
 public:
  static constexpr TokenId kEos = 0;
  static constexpr TokenId kTerminator = 1;
  static constexpr TokenId kConjunction = 2;
  static constexpr TokenId kMask = 3;
  static constexpr TokenId kEntitySeparator = 4;
  static constexpr TokenId kFirstLengthControl = 5;
  static constexpr TokenId kFirstAbsControl = kFirstLengthControl + kLengthBins;
  static constexpr TokenId kReserved = kFirstAbsControl + kAbstractivenessBins;

  /// Reserved tokens only.
  Vocabulary();

  /// Reserved tokens, then `entities`, then `words`. Throws ConfigError on
  /// duplicate strings or collisions with reserved tokens.
  Vocabulary(std::span<const std::string> entities, std::span<const std::string> words);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  bool valid(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < tokens_.size(); }

  static TokenId length_control(int bin);
  static TokenId abs_control(int bin);
  static bool is_control(TokenId id) { return id >= kFirstLengthControl && id < kReserved; }

  bool is_entity(TokenId id) const { return id >= first_entity_ && id < first_entity_ + entity_count_; }
  std::vector<TokenId> entities() const;
  std::span<const std::string> strings() const { return tokens_; }

  /// Space-separated token strings to ids. Throws DataError on unknown tokens.
  TokenSeq encode(std::string_view text) const;
  std::string decode(TokenSpan seq) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.entity_count_ == b.entity_count_;
  }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId first_entity_ = kReserved;
  TokenId entity_count_ = 0;
};

}  // namespace ctrlsum
