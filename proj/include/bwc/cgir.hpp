#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwc/machine.hpp"

namespace bwc::cg {

using mdesc::OpClass;

enum class RegClass { General, Macc, Addr };

// Where an operation executes. Scalar means cluster 0 (x); All is the
// broadcast form running on every cluster; None is the shared address unit.
enum class Where { Unassigned, None, Scalar, All };

struct Reg {
  RegClass cls = RegClass::General;
  int id = -1;          // virtual id, or physical index once is_phys
  bool is_phys = false;
  bool pair = false;    // even/odd register pair (dual load destination)
  int half = -1;        // 0/1 = low/high register of a pair vreg, -1 = whole
  bool valid() const { return id >= 0; }
  bool operator==(const Reg&) const = default;
};

// Memory reference through an address register:
//   postinc  [u5+=8,1]  address u, then u += amount
//   offset   [u6+0,0]   address u + amount, no writeback
// flag (second field) 0 = scalar single word, 1 = SIMD distributed.
struct MemRef {
  int ureg = 0;
  int32_t amount = 0;
  bool postinc = false;
  bool distributed = false;
  bool operator==(const MemRef&) const = default;
};

// Address-unit source: symbol, symbol+imm or symbol+reg.
struct AddrExpr {
  std::string sym;
  int32_t offset = 0;
  Reg reg;  // optional cluster-0 general register added to the symbol address
  bool operator==(const AddrExpr&) const = default;
};

enum class Cond { Ne, Ge, Lt };
const char* cond_text(Cond c);

struct CgirOp {
  OpClass cls = OpClass::MoveImm;
  Where where = Where::Unassigned;

  Reg dst;              // loads, moves, arithmetic, macc*, sigma
  Reg src1, src2;       // sources (macc_init/macc_read/move_reg use src1)
  int32_t imm = 0;      // move_imm
  MemRef mem;           // loads / stores (store data register in src1)
  int addr_dst = -1;    // addr_move destination u register
  AddrExpr addr;        // addr_move source
  Cond cond = Cond::Ne; // branch_cond
  std::string target;   // branch_cond label

  bool is_branch() const { return cls == OpClass::BranchCond; }
};

// Register reads/writes of one op, for dependence and liveness analysis.
// Address registers are reported as Reg{Addr, index, is_phys=true}.
struct RegAccess {
  std::vector<Reg> defs;
  std::vector<Reg> uses;
};
RegAccess reg_access(const CgirOp& op);

struct Bundle {
  std::vector<size_t> ops;  // indices into Block::ops, issue order
  bool terminal = false;    // contains the block's branch
};

struct VRegInfo {
  RegClass cls = RegClass::General;
  bool pair = false;
  bool broadcast = false;  // lives on every cluster
};

struct SymbolInfo {
  std::string sym;      // assembly-level name, e.g. "__sum"
  std::string var;      // source variable name
  int64_t addr = 0;     // word address
  int64_t words = 1;
  bool is_array = false;
};

struct Block {
  int id = 0;
  std::string label;
  std::string role;  // entry|loop|vec_loop|remainder|cont|exit
  int loop_depth = 0;
  std::vector<CgirOp> ops;
  std::vector<Bundle> bundles;  // filled by schedule_bundles
};

struct PhysAssignment {
  RegClass cls = RegClass::General;
  int index = -1;
};

struct CgirFunction {
  std::vector<Block> blocks;
  std::vector<VRegInfo> vregs;
  std::vector<SymbolInfo> layout;           // data segment, declaration order
  std::vector<std::optional<PhysAssignment>> assignment;  // by vreg id
  // Register file sizes copied from the machine description at lowering time.
  int general_regs = 64;
  int macc_regs = 4;
  int addr_regs = 16;

  int new_vreg(RegClass cls, bool pair = false, bool broadcast = false) {
    vregs.push_back({cls, pair, broadcast});
    return static_cast<int>(vregs.size()) - 1;
  }
  const SymbolInfo* find_symbol(const std::string& sym) const;
  int64_t memory_words() const;
};

}  // namespace bwc::cg
