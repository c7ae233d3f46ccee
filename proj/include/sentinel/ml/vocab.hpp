#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sentinel/common/bytes.hpp"

namespace sentinel::ml {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kCls = 2;

class TokenVocabulary {
 public:
  TokenVocabulary();

  /// Ids after the reserved three follow (frequency desc, token asc); tokens
  /// seen fewer than min_frequency times are left out and encode as UNK.
  /// Throws std::invalid_argument on an empty corpus.
  static TokenVocabulary build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_frequency = 1);
  /// Tokenizes each document with the PSCFT tokenizer first.
  static TokenVocabulary build_from_text(const std::vector<std::string>& documents, std::size_t min_frequency = 1);

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_frequency() const { return min_frequency_; }
  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  bool contains(const std::string& token) const { return ids_.count(token) != 0; }

  /// CLS followed by token ids, cut to max_length entries in total.
  std::vector<TokenId> encode(std::span<const std::string> tokens, std::size_t max_length) const;
  std::vector<TokenId> encode_text(const std::string& document, std::size_t max_length) const;

  /// One token per line, in id order, after a "min_frequency <n>" line.
  std::string serialize() const;
  static TokenVocabulary deserialize(const std::string& text);
  Hash32 hash() const;

  bool operator==(const TokenVocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId> ids_;
  std::size_t min_frequency_ = 1;
};

}  // namespace sentinel::ml
