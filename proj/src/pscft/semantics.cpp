#include "sentinel/pscft/semantics.hpp"

#include <cctype>

#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"

namespace sentinel::pscft {

LocalSignatureDB LocalSignatureDB::parse(std::string_view text) {
  LocalSignatureDB db;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw std::invalid_argument("signature db line " + std::to_string(line_no) + ": expected <selector>,<signature>");
    try {
      db.add(Selector::from_hex(trim(line.substr(0, comma))), std::string(trim(line.substr(comma + 1))));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("signature db line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return db;
}

LocalSignatureDB LocalSignatureDB::load(const std::string& path) { return parse(read_file(path)); }

void LocalSignatureDB::add(const Selector& selector, std::string signature) {
  if (selector_of(signature) != selector)
    throw std::invalid_argument("signature '" + signature + "' does not hash to " + selector.hex());
  entries_.emplace(selector, std::move(signature));
}

void LocalSignatureDB::add(std::string signature) {
  const auto sel = selector_of(signature);
  add(sel, std::move(signature));
}

std::optional<std::string> LocalSignatureDB::resolve(const Selector& selector) {
  auto it = entries_.find(selector);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> DbLabelProvider::label(const Address& address) {
  if (auto hit = db_.lookup(address)) return hit->label;
  if (verified_name_) return verified_name_(address);
  return std::nullopt;
}

std::string signature_name(std::string_view signature) {
  const auto paren = signature.find('(');
  return std::string(trim(signature.substr(0, paren)));
}

std::string sanitize_label(std::string_view label) {
  std::string out;
  for (char c : label)
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') out.push_back(c);
  return out.empty() ? std::string(kUnknownTarget) : out;
}

namespace {

std::optional<std::string> verified_signature(SignatureResolver* signatures, const Selector& selector) {
  if (!signatures) return std::nullopt;
  auto sig = signatures->resolve(selector);
  if (!sig || selector_of(*sig) != selector) return std::nullopt;
  return sig;
}

}  // namespace

void recover_semantics(CallFlowIR& ir, SignatureResolver* signatures, LabelProvider* labels) {
  for (auto& f : ir.functions) {
    if (f.visibility == Visibility::Public && f.selector) {
      if (auto sig = verified_signature(signatures, *f.selector)) {
        f.name = signature_name(*sig);
      } else if (f.name.empty()) {
        f.name = std::string(kUnknownFunc) + "_" + f.selector->hex(false);
      }
    } else if (f.visibility == Visibility::Fallback) {
      f.name = "fallback";
    }
    for (auto& [id, b] : f.blocks) {
      for (auto& s : b.statements) {
        if (s.kind != CallKind::External) continue;
        s.target_label = kUnknownTarget;
        if (s.target && labels) {
          if (auto l = labels->label(*s.target)) s.target_label = sanitize_label(*l);
        }
        s.resolved_signature.reset();
        if (s.selector) s.resolved_signature = verified_signature(signatures, *s.selector);
      }
    }
  }
}

}  // namespace sentinel::pscft
