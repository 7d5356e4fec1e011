#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/vocabulary.hpp"

namespace lap::caption {

/// Word-level token table. Ids 0..3 are reserved for PAD, BOS, EOS, UNK;
/// words follow in sorted order so the table depends only on the word set.
class TokenVocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecial = 4;

  TokenVocabulary() = default;
  explicit TokenVocabulary(const std::vector<core::Tokens>& sentences);
  static TokenVocabulary from_words(const std::vector<std::string>& words);

  int size() const { return static_cast<int>(words_.size()); }
  int id(const std::string& word) const;
  const std::string& word(int id) const;

  std::vector<int> encode(const core::Tokens& tokens) const;
  /// Drops specials; stops at the first EOS.
  core::Tokens decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> index_;
};

}  // namespace lap::caption
