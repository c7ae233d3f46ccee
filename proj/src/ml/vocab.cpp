#include "sentinel/ml/vocab.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sentinel/common/keccak.hpp"
#include "sentinel/pscft/pscft.hpp"

namespace sentinel::ml {

TokenVocabulary::TokenVocabulary() {
  add("[PAD]");
  add("[UNK]");
  add("[CLS]");
}

void TokenVocabulary::add(const std::string& token) {
  ids_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(token);
}

TokenVocabulary TokenVocabulary::build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_frequency) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : corpus)
    for (const auto& t : doc) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  TokenVocabulary v;
  v.min_frequency_ = std::max<std::size_t>(min_frequency, 1);
  for (const auto& [tok, n] : items)
    if (n >= v.min_frequency_ && !v.contains(tok)) v.add(tok);
  return v;
}

TokenVocabulary TokenVocabulary::build_from_text(const std::vector<std::string>& documents, std::size_t min_frequency) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(documents.size());
  for (const auto& d : documents) corpus.push_back(pscft::tokenize(d));
  return build(corpus, min_frequency);
}

TokenId TokenVocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<TokenId> TokenVocabulary::encode(std::span<const std::string> tokens, std::size_t max_length) const {
  std::vector<TokenId> out;
  if (max_length == 0) return out;
  out.push_back(kCls);
  for (const auto& t : tokens) {
    if (out.size() >= max_length) break;
    out.push_back(id(t));
  }
  return out;
}

std::vector<TokenId> TokenVocabulary::encode_text(const std::string& document, std::size_t max_length) const {
  const auto toks = pscft::tokenize(document);
  return encode(toks, max_length);
}

std::string TokenVocabulary::serialize() const {
  std::ostringstream os;
  os << "min_frequency " << min_frequency_ << "\n";
  for (const auto& t : tokens_) os << t << "\n";
  return os.str();
}

TokenVocabulary TokenVocabulary::deserialize(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("min_frequency ", 0) != 0)
    throw std::runtime_error("vocabulary: missing min_frequency header");
  TokenVocabulary v;
  v.min_frequency_ = std::stoul(line.substr(14));
  std::vector<std::string> toks;
  while (std::getline(is, line)) toks.push_back(line);
  if (toks.size() < 3 || toks[0] != "[PAD]" || toks[1] != "[UNK]" || toks[2] != "[CLS]")
    throw std::runtime_error("vocabulary: reserved tokens missing");
  for (std::size_t i = 3; i < toks.size(); ++i) {
    if (v.contains(toks[i])) throw std::runtime_error("vocabulary: duplicate token " + toks[i]);
    v.add(toks[i]);
  }
  return v;
}

Hash32 TokenVocabulary::hash() const { return keccak256(serialize()); }

}  // namespace sentinel::ml
