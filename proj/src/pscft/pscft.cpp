#include "sentinel/pscft/pscft.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "sentinel/common/text.hpp"
#include "sentinel/evm/disassembler.hpp"
#include "sentinel/evm/opcodes.hpp"

namespace sentinel::pscft {

namespace {

int sort_group(const CallFunction& f) {
  switch (f.visibility) {
    case Visibility::Public:
      return f.name.empty() || starts_with(f.name, kUnknownFunc) ? 1 : 0;
    case Visibility::Fallback:
      return 2;
    case Visibility::Private:
      return 3;
  }
  return 3;
}

bool canonical_less(const CallFunction& a, const CallFunction& b) {
  const int ga = sort_group(a), gb = sort_group(b);
  if (ga != gb) return ga < gb;
  switch (ga) {
    case 0:
      if (a.name != b.name) return a.name < b.name;
      if (a.selector != b.selector) return a.selector < b.selector;
      break;
    case 1:
      if (a.selector != b.selector) return a.selector < b.selector;
      break;
    case 3:
      if (natural_less(a.name, b.name)) return true;
      if (natural_less(b.name, a.name)) return false;
      break;
    default:
      break;
  }
  return a.entry < b.entry;
}

std::vector<BlockId> preorder(const CallFunction& f) {
  std::vector<BlockId> order;
  std::set<BlockId> seen;
  auto visit_from = [&](BlockId root) {
    std::vector<BlockId> stack{root};
    while (!stack.empty()) {
      const BlockId id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      order.push_back(id);
      const auto& succ = f.blocks.at(id).successors;
      for (auto it = succ.rbegin(); it != succ.rend(); ++it)
        if (!seen.contains(*it) && f.blocks.contains(*it)) stack.push_back(*it);
    }
  };
  if (f.blocks.contains(f.entry)) visit_from(f.entry);
  for (const auto& [id, b] : f.blocks)
    if (!seen.contains(id)) visit_from(id);
  return order;
}

const std::vector<std::uint8_t>& erc1967_slot() {
  static const auto slot = from_hex("0x360894a13ba1a3210667c828492db98dca3e2076cc3735a920a3ca505d382bbc");
  return slot;
}

}  // namespace

void canonical_rename(CallFlowIR& ir) {
  std::stable_sort(ir.functions.begin(), ir.functions.end(), canonical_less);
  std::size_t private_index = 0;
  std::map<BlockId, std::string> names;
  for (std::size_t i = 0; i < ir.functions.size(); ++i) {
    auto& f = ir.functions[i];
    if (f.visibility == Visibility::Private) f.name = "InternalFunction_" + std::to_string(private_index++);
    names[f.entry] = f.name;
    std::size_t j = 0;
    for (BlockId id : preorder(f)) f.blocks.at(id).name = "BB_" + std::to_string(i) + "_" + std::to_string(j++);
  }
  for (auto& f : ir.functions)
    for (auto& [id, b] : f.blocks)
      for (auto& s : b.statements)
        if (s.kind == CallKind::Private && s.callee) {
          auto it = names.find(*s.callee);
          s.callee_name = it == names.end() ? std::string() : it->second;
        }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  auto is_name = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_name(c)) {
      std::size_t j = i;
      while (j < text.size() && is_name(text[j])) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.emplace_back("->");
      i += 2;
    } else if (c == '.' || c == '(' || c == ')' || c == ':' || c == ';' || c == ',') {
      out.emplace_back(1, c);
      ++i;
    } else {
      ++i;  // whitespace and anything outside the grammar
    }
  }
  return out;
}

PscftGraph to_graph(const CallFlowIR& ir) {
  PscftGraph g;
  for (const auto& f : ir.functions) {
    PscftGraph::Function gf;
    gf.name = f.name;
    if (f.call_count() > 0) {
      std::vector<const CallBlock*> blocks;
      for (const auto& [id, b] : f.blocks) blocks.push_back(&b);
      std::sort(blocks.begin(), blocks.end(),
                [](const CallBlock* a, const CallBlock* b) { return natural_less(a->name, b->name); });
      for (const CallBlock* b : blocks) {
        PscftGraph::Block gb;
        gb.name = b->name;
        for (const auto& s : b->statements) gb.statements.push_back(s.render());
        gf.blocks.push_back(std::move(gb));
      }
      for (const CallBlock* b : blocks) {
        std::vector<const std::string*> targets;
        for (BlockId s : b->successors) targets.push_back(&f.blocks.at(s).name);
        std::sort(targets.begin(), targets.end(),
                  [](const std::string* x, const std::string* y) { return natural_less(*x, *y); });
        for (const auto* t : targets) gf.flows.emplace_back(b->name, *t);
      }
    }
    g.functions.push_back(std::move(gf));
  }
  return g;
}

std::string write_pscft(const PscftGraph& graph) {
  std::string out;
  for (const auto& f : graph.functions) {
    out += "function " + f.name + "\n";
    for (const auto& b : f.blocks) {
      out += b.name + ":";
      for (std::size_t k = 0; k < b.statements.size(); ++k) out += (k == 0 ? " " : "; ") + b.statements[k];
      out += "\n";
    }
    for (const auto& [from, to] : f.flows) out += from + " -> " + to + "\n";
  }
  return out;
}

PscftGraph read_pscft(std::string_view text) {
  PscftGraph g;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    if (raw.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("pscft line " + std::to_string(line_no) + ": " + msg);
    };
    if (starts_with(raw, "function ")) {
      g.functions.push_back({std::string(raw.substr(9)), {}, {}});
      continue;
    }
    if (g.functions.empty()) fail("content before the first function header");
    auto& f = g.functions.back();
    if (auto arrow = raw.find(" -> "); arrow != std::string_view::npos) {
      f.flows.emplace_back(std::string(raw.substr(0, arrow)), std::string(raw.substr(arrow + 4)));
      continue;
    }
    const auto colon = raw.find(':');
    if (colon == std::string_view::npos) fail("expected 'BB_i_j: ...' or 'BB_i_j -> BB_i_k'");
    PscftGraph::Block b;
    b.name = std::string(raw.substr(0, colon));
    auto rest = raw.substr(colon + 1);
    if (!rest.empty()) {
      if (rest.front() != ' ') fail("expected a space after ':'");
      rest.remove_prefix(1);
      std::size_t start = 0;
      while (true) {
        const auto sep = rest.find("; ", start);
        b.statements.emplace_back(rest.substr(start, sep == std::string_view::npos ? sep : sep - start));
        if (sep == std::string_view::npos) break;
        start = sep + 2;
      }
    }
    f.blocks.push_back(std::move(b));
  }
  return g;
}

PSCFTDocument serialize_pscft(const CallFlowIR& ir) {
  PSCFTDocument doc;
  doc.contract_id = ir.address ? ir.address->hex() : std::string();
  doc.text = write_pscft(to_graph(ir));
  doc.tokens = tokenize(doc.text);
  return doc;
}

PSCFTDocument build_pscft(const evm::ContractIR& ir, SignatureResolver* signatures, LabelProvider* labels) {
  auto flow = filter_call_statements(ir);
  prune_cfg(flow);
  recover_semantics(flow, signatures, labels);
  canonical_rename(flow);
  return serialize_pscft(flow);
}

std::string_view standard_kind_name(StandardKind k) {
  switch (k) {
    case StandardKind::TokenERC20: return "token-ERC20";
    case StandardKind::TokenERC721: return "token-ERC721";
    case StandardKind::ProxyERC1967: return "proxy-ERC1967";
    case StandardKind::Other: return "other";
  }
  return "other";
}

StandardKind detect_standard_contract(const evm::ContractIR& ir) {
  std::set<Selector> selectors;
  for (const auto& f : ir.functions)
    if (f.visibility == Visibility::Public && f.selector) selectors.insert(*f.selector);
  auto has_all = [&](std::initializer_list<const char*> hex) {
    return std::all_of(hex.begin(), hex.end(), [&](const char* h) { return selectors.contains(Selector::from_hex(h)); });
  };
  if (has_all({"70a08231", "6352211e", "b88d4fde", "42842e0e", "23b872dd", "095ea7b3", "a22cb465", "081812fc",
               "e985e9c5"}))
    return StandardKind::TokenERC721;
  if (has_all({"18160ddd", "70a08231", "a9059cbb", "23b872dd", "095ea7b3", "dd62ed3e"})) return StandardKind::TokenERC20;

  bool slot = false;
  bool delegates = ir.opcode_counts[evm::op::DELEGATECALL] > 0;
  for (const auto& ins : evm::disassemble(ir.runtime_bytecode))
    if (ins.opcode == evm::op::PUSH32 && ins.push_operand == erc1967_slot()) slot = true;
  for (const auto& f : ir.functions)
    for (const auto& [id, b] : f.blocks)
      for (const auto& s : b.statements) {
        if (s.op == evm::op::PUSH32 && s.operand == erc1967_slot()) slot = true;
        if (s.op == evm::op::DELEGATECALL) delegates = true;
      }
  if (slot || (selectors.empty() && delegates)) return StandardKind::ProxyERC1967;
  return StandardKind::Other;
}

}  // namespace sentinel::pscft
