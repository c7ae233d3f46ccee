#include "sentinel/evm/external_ir.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "sentinel/common/text.hpp"

namespace sentinel::evm {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokens_of(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

std::string hex_id(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

struct PendingBlock {
  Block block;
  std::size_t line = 0;
  std::size_t preds_column = 0;
  std::size_t succs_column = 0;
};

struct PendingFunction {
  FunctionIR fn;
  std::vector<PendingBlock> blocks;
  std::size_t line = 0;
};

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  ContractIR run() {
    const auto lines = split(text_, '\n');
    for (std::size_t n = 0; n < lines.size(); ++n) {
      line_no_ = n + 1;
      std::string_view line = lines[n];
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      const auto toks = tokens_of(line);
      if (toks.empty()) continue;
      const auto head = to_lower(toks[0].text);
      if (head == "contract") {
        read_contract(toks);
      } else if (head == "function") {
        read_function(toks);
      } else if (head == "block") {
        read_block(toks);
      } else {
        read_statement(toks);
      }
    }
    return finish();
  }

 private:
  [[noreturn]] void fail(std::size_t column, const std::string& msg) const { throw ParseError(line_no_, column, msg); }

  std::uint64_t parse_id(const Token& t, std::string_view text) const {
    std::string_view s = text;
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
    if (s.empty() || s.size() > 16 || !std::all_of(s.begin(), s.end(), is_hex_digit))
      fail(t.column, "expected a hex id, got '" + std::string(text) + "'");
    return std::stoull(std::string(s), nullptr, 16);
  }

  std::set<BlockId> parse_id_list(const Token& t, std::string_view value) const {
    std::set<BlockId> out;
    if (value.empty() || value == "-") return out;
    for (auto part : split(value, ',')) {
      if (part.empty()) continue;
      out.insert(parse_id(t, part));
    }
    return out;
  }

  template <std::size_t N>
  FixedBytes<N> parse_fixed(const Token& t, std::string_view value, const char* what) const {
    try {
      std::string_view s = value;
      if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
      if (s.size() != 2 * N) throw std::invalid_argument("width");
      return FixedBytes<N>::from_hex(value);
    } catch (const std::invalid_argument&) {
      fail(t.column, std::string("malformed ") + what + " '" + std::string(value) + "'");
    }
  }

  void read_contract(const std::vector<Token>& toks) {
    if (toks.size() != 2) fail(toks[0].column, "expected 'contract <address>'");
    if (!functions_.empty()) fail(toks[0].column, "contract header must precede functions");
    address_ = parse_fixed<20>(toks[1], toks[1].text, "address");
  }

  void read_function(const std::vector<Token>& toks) {
    if (toks.size() < 3) fail(toks[0].column, "expected 'function <name> <public|private|fallback>'");
    PendingFunction pf;
    pf.line = line_no_;
    pf.fn.name = toks[1].text == "-" ? std::string() : std::string(toks[1].text);
    const auto vis = to_lower(toks[2].text);
    if (vis == "public") {
      pf.fn.visibility = Visibility::Public;
    } else if (vis == "private") {
      pf.fn.visibility = Visibility::Private;
    } else if (vis == "fallback") {
      pf.fn.visibility = Visibility::Fallback;
    } else {
      fail(toks[2].column, "unknown visibility '" + std::string(toks[2].text) + "'");
    }
    for (std::size_t i = 3; i < toks.size(); ++i) {
      auto [key, value] = key_value(toks[i]);
      if (key == "selector") {
        pf.fn.selector = parse_fixed<4>(toks[i], value, "selector");
      } else {
        fail(toks[i].column, "unknown function attribute '" + std::string(key) + "'");
      }
    }
    if (pf.fn.visibility == Visibility::Public && !pf.fn.selector)
      fail(toks[0].column, "public function requires selector=");
    if (pf.fn.visibility != Visibility::Public && pf.fn.selector)
      fail(toks[0].column, "only public functions carry a selector");
    functions_.push_back(std::move(pf));
  }

  std::pair<std::string_view, std::string_view> key_value(const Token& t) const {
    const auto eq = t.text.find('=');
    if (eq == std::string_view::npos) fail(t.column, "expected key=value, got '" + std::string(t.text) + "'");
    return {t.text.substr(0, eq), t.text.substr(eq + 1)};
  }

  void read_block(const std::vector<Token>& toks) {
    if (functions_.empty()) fail(toks[0].column, "block outside of a function");
    if (toks.size() < 2) fail(toks[0].column, "expected 'block <id> preds=... succs=...'");
    PendingBlock pb;
    pb.line = line_no_;
    pb.block.id = parse_id(toks[1], toks[1].text);
    bool has_preds = false, has_succs = false;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      auto [key, value] = key_value(toks[i]);
      if (key == "preds") {
        pb.block.predecessors = parse_id_list(toks[i], value);
        pb.preds_column = toks[i].column;
        has_preds = true;
      } else if (key == "succs") {
        pb.block.successors = parse_id_list(toks[i], value);
        pb.succs_column = toks[i].column;
        has_succs = true;
      } else {
        fail(toks[i].column, "unknown block attribute '" + std::string(key) + "'");
      }
    }
    if (!has_preds || !has_succs) fail(toks[0].column, "block header requires preds= and succs=");
    if (!block_lines_.emplace(pb.block.id, line_no_).second)
      fail(toks[1].column, "block " + hex_id(pb.block.id) + " declared twice (first on line " +
                               std::to_string(block_lines_.at(pb.block.id)) + ")");
    functions_.back().blocks.push_back(std::move(pb));
  }

  void read_statement(const std::vector<Token>& toks) {
    if (functions_.empty() || functions_.back().blocks.empty()) fail(toks[0].column, "statement outside of a block");
    Statement st;
    std::string_view id_text = toks[0].text;
    if (id_text.empty() || id_text.back() != ':') fail(toks[0].column, "expected '<id>:' to start a statement");
    id_text.remove_suffix(1);
    st.id = parse_id(toks[0], id_text);
    if (toks.size() < 2) fail(toks[0].column + toks[0].text.size(), "missing opcode");
    std::string upper(toks[1].text);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const auto code = statement_op_by_name(upper);
    if (!code) fail(toks[1].column, "unknown opcode '" + std::string(toks[1].text) + "'");
    st.op = *code;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      const auto eq = toks[i].text.find('=');
      if (eq == std::string_view::npos) {
        if (!st.operand.empty()) fail(toks[i].column, "duplicate operand");
        try {
          st.operand = from_hex(toks[i].text);
        } catch (const std::invalid_argument&) {
          fail(toks[i].column, "malformed operand '" + std::string(toks[i].text) + "'");
        }
        continue;
      }
      auto [key, value] = key_value(toks[i]);
      if (key == "target") {
        st.target = parse_fixed<20>(toks[i], value, "target");
      } else if (key == "selector") {
        st.selector = parse_fixed<4>(toks[i], value, "selector");
      } else if (key == "callee") {
        st.callee = parse_id(toks[i], value);
      } else {
        fail(toks[i].column, "unknown statement attribute '" + std::string(key) + "'");
      }
    }
    functions_.back().blocks.back().block.statements.push_back(std::move(st));
  }

  ContractIR finish() {
    ContractIR ir;
    ir.address = address_;
    for (auto& pf : functions_) {
      if (pf.blocks.empty()) throw ParseError(pf.line, 1, "function without blocks");
      pf.fn.entry = pf.blocks.front().block.id;
      for (const auto& pb : pf.blocks) {
        for (BlockId s : pb.block.successors) {
          auto it = std::find_if(pf.blocks.begin(), pf.blocks.end(), [&](const PendingBlock& o) { return o.block.id == s; });
          if (it == pf.blocks.end())
            throw ParseError(pb.line, pb.succs_column, "successor " + hex_id(s) + " is not a block of this function");
          if (!it->block.predecessors.contains(pb.block.id))
            throw ParseError(pb.line, pb.succs_column,
                             "successor " + hex_id(s) + " does not list " + hex_id(pb.block.id) + " among its preds");
        }
        for (BlockId p : pb.block.predecessors) {
          auto it = std::find_if(pf.blocks.begin(), pf.blocks.end(), [&](const PendingBlock& o) { return o.block.id == p; });
          if (it == pf.blocks.end())
            throw ParseError(pb.line, pb.preds_column, "predecessor " + hex_id(p) + " is not a block of this function");
          if (!it->block.successors.contains(pb.block.id))
            throw ParseError(pb.line, pb.preds_column,
                             "predecessor " + hex_id(p) + " does not list " + hex_id(pb.block.id) + " among its succs");
        }
      }
      for (auto& pb : pf.blocks) {
        for (const auto& st : pb.block.statements)
          if (st.op <= 0xff) ++ir.opcode_counts[st.op];
        const BlockId id = pb.block.id;
        pf.fn.blocks.emplace(id, std::move(pb.block));
      }
      ir.functions.push_back(std::move(pf.fn));
    }
    std::sort(ir.functions.begin(), ir.functions.end(),
              [](const FunctionIR& a, const FunctionIR& b) { return a.entry < b.entry; });
    return ir;
  }

  std::string_view text_;
  std::size_t line_no_ = 0;
  std::optional<Address> address_;
  std::vector<PendingFunction> functions_;
  std::map<BlockId, std::size_t> block_lines_;
};

void write_ids(std::ostream& os, const std::set<BlockId>& ids) {
  bool first = true;
  for (BlockId id : ids) {
    if (!first) os << ',';
    os << hex_id(id);
    first = false;
  }
}

void write_block(std::ostream& os, const Block& b) {
  os << "block " << hex_id(b.id) << " preds=";
  write_ids(os, b.predecessors);
  os << " succs=";
  write_ids(os, b.successors);
  os << '\n';
  for (const auto& st : b.statements) {
    os << "  " << hex_id(st.id) << ": " << statement_op_name(st.op);
    if (!st.operand.empty()) os << ' ' << to_hex(st.operand);
    if (st.target) os << " target=" << st.target->hex();
    if (st.selector) os << " selector=" << st.selector->hex();
    if (st.callee) os << " callee=" << hex_id(*st.callee);
    os << '\n';
  }
}

}  // namespace

ContractIR ingest_external_ir(std::string_view text) { return Reader(text).run(); }

std::string serialize_external_ir(const ContractIR& ir) {
  std::ostringstream os;
  if (ir.address) os << "contract " << ir.address->hex() << '\n';
  std::vector<const FunctionIR*> order;
  for (const auto& f : ir.functions) order.push_back(&f);
  std::sort(order.begin(), order.end(), [](const FunctionIR* a, const FunctionIR* b) { return a->entry < b->entry; });
  for (const FunctionIR* f : order) {
    os << "function " << (f->name.empty() ? std::string("-") : f->name) << ' ' << visibility_name(f->visibility);
    if (f->selector) os << " selector=" << f->selector->hex();
    os << '\n';
    if (auto it = f->blocks.find(f->entry); it != f->blocks.end()) write_block(os, it->second);
    for (const auto& [id, b] : f->blocks)
      if (id != f->entry) write_block(os, b);
  }
  return os.str();
}

}  // namespace sentinel::evm
