#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>

#include "sentinel/fundsource/labels.hpp"
#include "sentinel/pscft/call_flow.hpp"

namespace sentinel::pscft {

/// Maps a 4-byte selector to a canonical signature such as
/// "transfer(address,uint256)". Implementations must not throw.
class SignatureResolver {
 public:
  virtual ~SignatureResolver() = default;
  virtual std::optional<std::string> resolve(const Selector& selector) = 0;
};

/// Lines `<4-byte hex>,<canonical signature>`; entries whose hash does not
/// match their selector are rejected at load.
class LocalSignatureDB : public SignatureResolver {
 public:
  static LocalSignatureDB parse(std::string_view text);
  static LocalSignatureDB load(const std::string& path);

  /// Throws std::invalid_argument when keccak4(signature) != selector.
  void add(const Selector& selector, std::string signature);
  /// Adds under the signature's own selector.
  void add(std::string signature);
  std::optional<std::string> resolve(const Selector& selector) override;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<Selector, std::string> entries_;
};

/// Semantic label for a call target: label database first, then the
/// verified source name, else nothing (rendered as UnknownTarget).
class LabelProvider {
 public:
  virtual ~LabelProvider() = default;
  virtual std::optional<std::string> label(const Address& address) = 0;
};

class DbLabelProvider : public LabelProvider {
 public:
  using VerifiedName = std::function<std::optional<std::string>(const Address&)>;

  explicit DbLabelProvider(const fundsource::AddressLabelDB& db, VerifiedName verified_name = {})
      : db_(db), verified_name_(std::move(verified_name)) {}
  std::optional<std::string> label(const Address& address) override;

 private:
  const fundsource::AddressLabelDB& db_;
  VerifiedName verified_name_;
};

/// Name part of a canonical signature ("flash(address,...)" -> "flash").
std::string signature_name(std::string_view signature);

/// Label text usable as a PSCFT identifier (characters outside
/// [A-Za-z0-9_$] are dropped; empty becomes UnknownTarget).
std::string sanitize_label(std::string_view label);

/// Resolves external-call selectors and targets and names public
/// functions. Either resolver may be null. A resolved signature is kept
/// only if its keccak-4 matches the selector.
void recover_semantics(CallFlowIR& ir, SignatureResolver* signatures, LabelProvider* labels);

}  // namespace sentinel::pscft
