#include <sstream>

#include "bwc/codegen.hpp"

namespace bwc::cg {

namespace {

std::string reg_text(const Reg& r) {
  switch (r.cls) {
    case RegClass::Addr:
      return "u" + std::to_string(r.id);
    case RegClass::Macc:
      return "MACC" + std::to_string(r.id);
    case RegClass::General:
      if (r.pair)
        return "r" + std::to_string(r.id + 1) + ":" + std::to_string(r.id);
      return "r" + std::to_string(r.id);
  }
  return "?";
}

std::string mem_text(const MemRef& m) {
  std::ostringstream os;
  os << "[u" << m.ureg << (m.postinc ? "+=" : "+") << m.amount << ","
     << (m.distributed ? 1 : 0) << "]";
  return os.str();
}

std::string addr_text(const AddrExpr& a) {
  std::string out = a.sym;
  if (a.reg.valid()) {
    out += "+" + reg_text(a.reg);
  } else if (a.offset != 0) {
    out += "+" + std::to_string(a.offset);
  }
  return out;
}

// Canonical operand order used by print formats; see docs/mdesc.md.
std::string operand_text(const CgirOp& op, int k) {
  switch (op.cls) {
    case OpClass::LoadWord:
    case OpClass::LoadDual:
      return k == 0 ? reg_text(op.dst) : mem_text(op.mem);
    case OpClass::StoreWord:
      return k == 0 ? reg_text(op.src1) : mem_text(op.mem);
    case OpClass::MoveImm:
      return k == 0 ? reg_text(op.dst) : std::to_string(op.imm);
    case OpClass::MoveReg:
    case OpClass::MaccInit:
    case OpClass::MaccRead:
    case OpClass::Sigma:
      return k == 0 ? reg_text(op.dst) : reg_text(op.src1);
    case OpClass::Add:
    case OpClass::Sub:
    case OpClass::Mul:
    case OpClass::Macc:
      return k == 0 ? reg_text(op.dst) : k == 1 ? reg_text(op.src1) : reg_text(op.src2);
    case OpClass::BranchCond:
      return k == 0 ? reg_text(op.src1) : k == 1 ? reg_text(op.src2) : op.target;
    case OpClass::AddrMove:
      return k == 0 ? "u" + std::to_string(op.addr_dst) : addr_text(op.addr);
  }
  return "?";
}

// Cluster prefix of a %P placeholder. sigma's source is read on every
// cluster even though the op itself issues on x.
std::string prefix_text(const CgirOp& op, int k, const mdesc::MachineDesc& desc) {
  if (op.cls == OpClass::Sigma && k == 1) return desc.broadcast_prefix();
  switch (op.where) {
    case Where::All:
      return desc.broadcast_prefix();
    case Where::Scalar:
      return desc.cluster_names.front();
    default:
      return "";
  }
}

}  // namespace

std::string print_op(const CgirOp& op, const mdesc::MachineDesc& desc) {
  const auto& info = mdesc::lookup_opcode(desc, op.cls);
  const std::string& fmt = info.print_format;
  std::string out;
  for (size_t i = 0; i < fmt.size(); ++i) {
    if (fmt[i] != '%' || i + 1 >= fmt.size()) {
      out += fmt[i];
      continue;
    }
    char c = fmt[++i];
    if (c == 'c') {
      out += cond_text(op.cond);
    } else if (c == 'P') {
      int k = fmt[++i] - '0';
      out += prefix_text(op, k, desc) + operand_text(op, k);
    } else {
      out += operand_text(op, c - '0');
    }
  }
  return out;
}

std::string emit_assembly(const CgirFunction& f, const mdesc::MachineDesc& desc) {
  std::ostringstream os;
  for (const auto& s : f.layout)
    os << ".sym " << s.sym << " " << s.addr << " " << s.words << "\n";
  for (const auto& b : f.blocks) {
    os << b.label << ":\n";
    for (const auto& bundle : b.bundles) {
      if (bundle.terminal) os << ".code_align 4\n";
      // The branch prints first, the way the published listings read.
      std::vector<size_t> order;
      for (size_t oi : bundle.ops)
        if (b.ops[oi].is_branch()) order.push_back(oi);
      for (size_t oi : bundle.ops)
        if (!b.ops[oi].is_branch()) order.push_back(oi);
      for (size_t n = 0; n < order.size(); ++n) {
        if (n > 0) os << "||";
        os << print_op(b.ops[order[n]], desc) << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace bwc::cg
