#include "caption/tokens.hpp"

#include <set>

#include "common/error.hpp"

namespace lap::caption {

TokenVocabulary::TokenVocabulary(const std::vector<core::Tokens>& sentences) {
  std::set<std::string> unique;
  for (const auto& s : sentences) unique.insert(s.begin(), s.end());
  *this = from_words(std::vector<std::string>(unique.begin(), unique.end()));
}

TokenVocabulary TokenVocabulary::from_words(const std::vector<std::string>& words) {
  TokenVocabulary v;
  v.words_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (const auto& w : words) {
    if (v.index_.count(w) || (w.size() > 1 && w.front() == '<' && w.back() == '>')) continue;
    v.index_.emplace(w, static_cast<int>(v.words_.size()));
    v.words_.push_back(w);
  }
  return v;
}

int TokenVocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& TokenVocabulary::word(int id) const {
  require(id >= 0 && id < size(), ErrorCode::InvalidArgument, "token id out of range: " + std::to_string(id));
  return words_[static_cast<std::size_t>(id)];
}

std::vector<int> TokenVocabulary::encode(const core::Tokens& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

core::Tokens TokenVocabulary::decode(const std::vector<int>& ids) const {
  core::Tokens out;
  for (int i : ids) {
    if (i == kEos) break;
    if (i < kNumSpecial) continue;
    out.push_back(word(i));
  }
  return out;
}

}  // namespace lap::caption
