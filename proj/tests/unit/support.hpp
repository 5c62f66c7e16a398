#pragma once

#include <string>
#include <vector>

#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum::test {

// Entities E, F, G, H, arsenal, chelsea; words a..h, q, r, s, x, z, v, w,
// beat, 3, 1.
inline const Vocabulary& small_vocab() {
  static const Vocabulary vocab = [] {
    const std::vector<std::string> entities{"E", "F", "G", "H", "arsenal", "chelsea"};
    const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g", "h", "q", "r",
                                         "s", "x", "z", "v", "w", "beat", "3", "1"};
    return Vocabulary(entities, words);
  }();
  return vocab;
}

inline TokenSeq toks(const std::string& text) { return small_vocab().encode(text); }
inline TokenId tok(const std::string& text) { return small_vocab().id(text); }

}  // namespace ctrlsum::test
