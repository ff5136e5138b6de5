#include <cctype>
#include <sstream>

#include "bwc/codegen.hpp"
#include "bwc/sim.hpp"

namespace bwc::sim {

namespace {

using cg::CgirOp;
using cg::Cond;
using cg::MemRef;
using cg::Reg;
using cg::RegClass;
using cg::Where;
using mdesc::OpClass;

struct Cursor {
  std::string text;
  size_t pos = 0;
  int line = 0;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }
  bool consume(const std::string& s) {
    if (text.compare(pos, s.size(), s) == 0) {
      pos += s.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& detail) const {
    throw AsmSyntaxError(line, detail + " at '" + text.substr(pos) + "'");
  }
  int64_t integer() {
    size_t start = pos;
    if (peek() == '-') pos++;
    while (std::isdigit(static_cast<unsigned char>(peek()))) pos++;
    if (pos == start || (pos == start + 1 && text[start] == '-'))
      fail("expected an integer");
    return std::stoll(text.substr(start, pos - start));
  }
  std::string ident() {
    size_t start = pos;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') pos++;
    if (pos == start) fail("expected an identifier");
    return text.substr(start, pos - start);
  }
};

class OpParser {
public:
  OpParser(const mdesc::MachineDesc& desc) : desc_(desc) {}

  CgirOp parse(const std::string& text, int line) {
    cur_ = {text, 0, line};
    CgirOp op;
    if (cur_.consume("If ")) {
      parse_branch(op);
    } else if (cur_.peek() == '[') {
      parse_store(op);
    } else {
      parse_assignment(op);
    }
    if (!cur_.eof()) cur_.fail("trailing text");
    return op;
  }

private:
  // Optional cluster prefix before a register token. Only the broadcast
  // prefix and the first (scalar) cluster are meaningful in this model.
  Where parse_prefix() {
    std::string bc = desc_.broadcast_prefix();
    if (desc_.cluster_count() > 1 && cur_.consume(bc)) return Where::All;
    for (int k = 0; k < desc_.cluster_count(); ++k) {
      const std::string& name = desc_.cluster_names[static_cast<size_t>(k)];
      if (cur_.text.compare(cur_.pos, name.size(), name) == 0) {
        char after = cur_.pos + name.size() < cur_.text.size()
                         ? cur_.text[cur_.pos + name.size()]
                         : '\0';
        if (after == 'r' || (after == 'M' && cur_.text.compare(cur_.pos + 1, 4, "MACC") == 0)) {
          cur_.pos += name.size();
          if (k != 0) cur_.fail("only the first cluster carries scalar ops");
          return Where::Scalar;
        }
      }
    }
    return Where::Unassigned;
  }

  Reg parse_reg_body() {
    Reg r;
    r.is_phys = true;
    if (cur_.consume("MACC")) {
      r.cls = RegClass::Macc;
      r.id = static_cast<int>(cur_.integer());
      if (r.id < 0 || r.id >= desc_.macc_regs_per_cluster)
        cur_.fail("MACC register out of range");
      return r;
    }
    if (cur_.consume("u")) {
      r.cls = RegClass::Addr;
      r.id = static_cast<int>(cur_.integer());
      if (r.id < 0 || r.id >= desc_.address_regs) cur_.fail("address register out of range");
      return r;
    }
    if (!cur_.consume("r")) cur_.fail("expected a register");
    r.cls = RegClass::General;
    int first = static_cast<int>(cur_.integer());
    if (cur_.peek() == ':') {
      cur_.pos++;
      int second = static_cast<int>(cur_.integer());
      if (first != second + 1 || second % 2 != 0)
        cur_.fail("register pairs are written hi:lo with an even low register");
      r.pair = true;
      r.id = second;
    } else {
      r.id = first;
    }
    int top = r.id + (r.pair ? 1 : 0);
    if (r.id < 0 || top >= desc_.general_regs_per_cluster)
      cur_.fail("general register out of range");
    return r;
  }

  std::pair<Where, Reg> parse_reg() {
    Where w = parse_prefix();
    return {w, parse_reg_body()};
  }

  MemRef parse_mem() {
    MemRef m;
    if (!cur_.consume("[u")) cur_.fail("expected a memory reference");
    m.ureg = static_cast<int>(cur_.integer());
    if (m.ureg < 0 || m.ureg >= desc_.address_regs) cur_.fail("address register out of range");
    if (cur_.consume("+=")) {
      m.postinc = true;
    } else if (cur_.consume("+")) {
      m.postinc = false;
    } else {
      cur_.fail("expected '+=' or '+' in memory reference");
    }
    m.amount = static_cast<int32_t>(cur_.integer());
    if (!cur_.consume(",")) cur_.fail("expected ',' in memory reference");
    m.distributed = cur_.integer() != 0;
    if (!cur_.consume("]")) cur_.fail("expected ']'");
    return m;
  }

  void parse_branch(CgirOp& op) {
    op.cls = OpClass::BranchCond;
    op.where = Where::Scalar;
    auto [w, lhs] = parse_reg();
    (void)w;
    op.src1 = lhs;
    if (cur_.consume("!=")) op.cond = Cond::Ne;
    else if (cur_.consume(">=")) op.cond = Cond::Ge;
    else if (cur_.consume("<")) op.cond = Cond::Lt;
    else cur_.fail("expected a branch comparison");
    op.src2 = parse_reg().second;
    if (!cur_.consume(" B ")) cur_.fail("expected ' B '");
    op.target = cur_.ident();
  }

  void parse_store(CgirOp& op) {
    op.cls = OpClass::StoreWord;
    op.mem = parse_mem();
    if (op.mem.distributed) cur_.fail("distributed stores are not supported");
    if (!cur_.consume("=")) cur_.fail("expected '='");
    op.src1 = parse_reg().second;
    op.where = Where::Scalar;
  }

  void parse_assignment(CgirOp& op) {
    auto [w, lhs] = parse_reg();
    if (lhs.cls == RegClass::Addr) {
      // u6=__sum, u0=__a+r12, u0=__a+4
      op.cls = OpClass::AddrMove;
      op.where = Where::None;
      op.addr_dst = lhs.id;
      if (!cur_.consume("=")) cur_.fail("expected '='");
      if (!std::isalpha(static_cast<unsigned char>(cur_.peek())) && cur_.peek() != '_')
        cur_.fail("expected a symbol");
      op.addr.sym = cur_.ident();
      if (cur_.consume("+")) {
        if (std::isdigit(static_cast<unsigned char>(cur_.peek()))) {
          op.addr.offset = static_cast<int32_t>(cur_.integer());
        } else {
          op.addr.reg = parse_reg().second;
          if (op.addr.reg.cls != RegClass::General || op.addr.reg.pair)
            cur_.fail("address arithmetic uses a single general register");
        }
      }
      return;
    }

    if (lhs.cls == RegClass::Macc) {
      op.dst = lhs;
      op.where = w == Where::Unassigned ? Where::Scalar : w;
      if (cur_.consume("+=")) {
        op.cls = OpClass::Macc;
        op.src1 = parse_reg().second;
        if (!cur_.consume("*")) cur_.fail("expected '*'");
        op.src2 = parse_reg().second;
      } else if (cur_.consume("=")) {
        op.cls = OpClass::MaccInit;
        op.src1 = parse_reg().second;
      } else {
        cur_.fail("expected '=' or '+='");
      }
      return;
    }

    op.dst = lhs;
    op.where = w == Where::Unassigned ? Where::Scalar : w;
    if (!cur_.consume("=")) cur_.fail("expected '='");

    if (cur_.peek() == '[') {
      op.mem = parse_mem();
      op.cls = lhs.pair ? OpClass::LoadDual : OpClass::LoadWord;
      return;
    }
    if (lhs.pair) cur_.fail("pair registers only load from memory");
    if (cur_.consume("sigma")) {
      op.cls = OpClass::Sigma;
      op.where = Where::Scalar;
      op.src1 = parse_reg().second;
      return;
    }
    if (cur_.peek() == '-' || std::isdigit(static_cast<unsigned char>(cur_.peek()))) {
      op.cls = OpClass::MoveImm;
      op.imm = static_cast<int32_t>(cur_.integer());
      return;
    }
    Reg src = parse_reg().second;
    if (src.cls == RegClass::Macc) {
      op.cls = OpClass::MaccRead;
      op.src1 = src;
      return;
    }
    if (cur_.consume("+")) op.cls = OpClass::Add;
    else if (cur_.consume("-")) op.cls = OpClass::Sub;
    else if (cur_.consume("*")) op.cls = OpClass::Mul;
    else {
      op.cls = OpClass::MoveReg;
      op.src1 = src;
      return;
    }
    op.src1 = src;
    op.src2 = parse_reg().second;
  }

  const mdesc::MachineDesc& desc_;
  Cursor cur_;
};

std::string strip(const std::string& raw) {
  std::string line = raw;
  for (const char* c : {"//", "#"}) {
    if (auto p = line.find(c); p != std::string::npos) line.resize(p);
  }
  size_t a = line.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = line.find_last_not_of(" \t\r");
  return line.substr(a, b - a + 1);
}

// Ops keep internal spaces only inside `If ... B ...`; elsewhere the dialect
// is whitespace-free, so stray blanks are dropped for lenient parsing.
std::string squeeze(const std::string& s) {
  if (s.rfind("If ", 0) == 0) return s;
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t') out += c;
  return out;
}

}  // namespace

AsmProgram parse_assembly(const std::string& text, const mdesc::MachineDesc& desc) {
  AsmProgram p;
  OpParser ops(desc);
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    lineno++;
    std::string line = strip(raw);
    if (line.empty()) continue;

    if (line.rfind(".sym", 0) == 0) {
      std::istringstream ls(line);
      std::string dot, name;
      int64_t addr = 0, words = 0;
      if (!(ls >> dot >> name >> addr >> words))
        throw AsmSyntaxError(lineno, "expected '.sym <name> <addr> <words>'");
      if (p.symbols.count(name))
        throw AsmSyntaxError(lineno, "symbol '" + name + "' defined twice");
      p.symbols[name] = addr;
      p.symbol_words[name] = words;
      continue;
    }
    if (line.rfind(".code_align", 0) == 0) continue;
    if (line.back() == ':' && line.find('=') == std::string::npos) {
      std::string label = line.substr(0, line.size() - 1);
      if (p.label_to_bundle.count(label))
        throw AsmSyntaxError(lineno, "label '" + label + "' defined twice");
      p.labels.push_back(label);
      p.label_to_bundle[label] = p.bundles.size();
      continue;
    }

    bool continuation = false;
    if (line.rfind("||", 0) == 0) {
      continuation = true;
      line = strip(line.substr(2));
    }
    cg::CgirOp op = ops.parse(squeeze(line), lineno);
    if (continuation) {
      if (p.bundles.empty()) throw AsmSyntaxError(lineno, "'||' with no open bundle");
      p.bundles.back().ops.push_back(std::move(op));
    } else {
      ProgBundle b;
      b.ops.push_back(std::move(op));
      p.bundles.push_back(std::move(b));
    }
    if (p.bundles.back().ops.back().is_branch()) p.bundles.back().terminal = true;
  }

  // Region assignment for per-label cycle attribution.
  for (size_t i = 0; i < p.bundles.size(); ++i) {
    int region = -1;
    for (size_t li = 0; li < p.labels.size(); ++li)
      if (p.label_to_bundle.at(p.labels[li]) <= i) region = static_cast<int>(li);
    p.bundles[i].label_index = region;
  }

  for (const auto& b : p.bundles) {
    for (const auto& op : b.ops) {
      if (op.is_branch() && !p.label_to_bundle.count(op.target))
        throw UndefinedLabel(op.target);
      if (op.cls == OpClass::AddrMove && !p.symbols.count(op.addr.sym))
        throw UndefinedSymbol(op.addr.sym);
    }
  }

  for (size_t i = 0; i < p.bundles.size(); ++i) {
    std::vector<const cg::CgirOp*> view;
    for (const auto& op : p.bundles[i].ops) view.push_back(&op);
    auto violations = cg::verify_bundle_ops(view, desc);
    if (!violations.empty())
      throw DivergentSlotUse("bundle " + std::to_string(i) + ": " + violations[0].what);
  }
  return p;
}

AsmProgram program_from_function(const cg::CgirFunction& f) {
  AsmProgram p;
  for (const auto& s : f.layout) {
    p.symbols[s.sym] = s.addr;
    p.symbol_words[s.sym] = s.words;
  }
  for (const auto& b : f.blocks) {
    p.labels.push_back(b.label);
    p.label_to_bundle[b.label] = p.bundles.size();
    for (const auto& bundle : b.bundles) {
      ProgBundle pb;
      pb.terminal = bundle.terminal;
      pb.label_index = static_cast<int>(p.labels.size()) - 1;
      for (size_t oi : bundle.ops) pb.ops.push_back(b.ops[oi]);
      p.bundles.push_back(std::move(pb));
    }
  }
  return p;
}

}  // namespace bwc::sim
