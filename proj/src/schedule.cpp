#include <algorithm>
#include <cassert>

#include "bwc/codegen.hpp"

namespace bwc::cg {

const char* cond_text(Cond c) {
  switch (c) {
    case Cond::Ne: return "!=";
    case Cond::Ge: return ">=";
    case Cond::Lt: return "<";
  }
  return "?";
}

RegAccess reg_access(const CgirOp& op) {
  RegAccess a;
  auto ureg = [](int idx) {
    Reg r;
    r.cls = RegClass::Addr;
    r.id = idx;
    r.is_phys = true;
    return r;
  };
  switch (op.cls) {
    case OpClass::LoadWord:
    case OpClass::LoadDual:
      a.defs.push_back(op.dst);
      a.uses.push_back(ureg(op.mem.ureg));
      if (op.mem.postinc) a.defs.push_back(ureg(op.mem.ureg));
      break;
    case OpClass::StoreWord:
      a.uses.push_back(op.src1);
      a.uses.push_back(ureg(op.mem.ureg));
      if (op.mem.postinc) a.defs.push_back(ureg(op.mem.ureg));
      break;
    case OpClass::MoveImm:
      a.defs.push_back(op.dst);
      break;
    case OpClass::MoveReg:
    case OpClass::MaccInit:
    case OpClass::MaccRead:
    case OpClass::Sigma:
      a.defs.push_back(op.dst);
      a.uses.push_back(op.src1);
      break;
    case OpClass::Add:
    case OpClass::Sub:
    case OpClass::Mul:
      a.defs.push_back(op.dst);
      a.uses.push_back(op.src1);
      a.uses.push_back(op.src2);
      break;
    case OpClass::Macc:
      a.defs.push_back(op.dst);
      a.uses.push_back(op.dst);  // accumulates
      a.uses.push_back(op.src1);
      a.uses.push_back(op.src2);
      break;
    case OpClass::BranchCond:
      a.uses.push_back(op.src1);
      a.uses.push_back(op.src2);
      break;
    case OpClass::AddrMove:
      a.defs.push_back(ureg(op.addr_dst));
      if (op.addr.reg.valid()) a.uses.push_back(op.addr.reg);
      break;
  }
  return a;
}

void assign_clusters(CgirFunction& f) {
  for (auto& b : f.blocks) {
    for (auto& op : b.ops) {
      switch (op.cls) {
        case OpClass::AddrMove:
          op.where = Where::None;
          break;
        case OpClass::Sigma:       // reads every cluster, writes x
        case OpClass::BranchCond:  // compares x-cluster registers
        case OpClass::StoreWord:   // stores are scalar, data from x
          op.where = Where::Scalar;
          break;
        default: {
          bool broadcast = op.dst.valid() && !op.dst.is_phys &&
                           f.vregs[static_cast<size_t>(op.dst.id)].broadcast;
          op.where = broadcast ? Where::All : Where::Scalar;
          break;
        }
      }
    }
  }
}

namespace {

// Register identity for conflicts. Virtual ids are abstract (pair halves
// carry the pair's id); physical pairs span two adjacent indices.
bool same_reg(const Reg& a, const Reg& b) {
  if (a.cls != b.cls || a.is_phys != b.is_phys) return false;
  if (!a.is_phys) return a.id == b.id;
  int ae = a.id + (a.pair ? 1 : 0);
  int be = b.id + (b.pair ? 1 : 0);
  return a.id <= be && b.id <= ae;
}

bool sets_conflict(const RegAccess& a, const RegAccess& b) {
  for (const Reg& d : a.defs) {
    for (const Reg& u : b.uses)
      if (same_reg(d, u)) return true;
    for (const Reg& d2 : b.defs)
      if (same_reg(d, d2)) return true;
  }
  for (const Reg& u : a.uses)
    for (const Reg& d : b.defs)
      if (same_reg(u, d)) return true;
  return false;
}

bool is_memory(const CgirOp& op) {
  return op.cls == OpClass::LoadWord || op.cls == OpClass::LoadDual ||
         op.cls == OpClass::StoreWord;
}

class BlockScheduler {
public:
  BlockScheduler(Block& block, const mdesc::MachineDesc& desc)
      : block_(block), desc_(desc), clusters_(desc.cluster_count()) {}

  void run() {
    size_t n = block_.ops.size();
    access_.reserve(n);
    for (const auto& op : block_.ops) access_.push_back(reg_access(op));
    build_edges();

    std::vector<int> bundle_of(n, -1);
    int branch = -1;
    for (size_t i = 0; i < n; ++i)
      if (block_.ops[i].is_branch()) branch = static_cast<int>(i);
    assert(branch < 0 || branch == static_cast<int>(n) - 1);

    size_t scheduled = 0;
    size_t to_schedule = n - (branch >= 0 ? 1 : 0);
    while (scheduled < to_schedule) {
      Bundle bundle;
      reset_slots();
      int current = static_cast<int>(block_.bundles.size());
      for (size_t i = 0; i < n; ++i) {
        if (bundle_of[i] >= 0 || static_cast<int>(i) == branch) continue;
        bool ready = true;
        for (size_t p : preds_[i]) {
          if (bundle_of[p] < 0 || bundle_of[p] == current) {
            ready = false;
            break;
          }
        }
        if (!ready || !slots_fit(block_.ops[i])) continue;
        take_slots(block_.ops[i]);
        bundle.ops.push_back(i);
        bundle_of[i] = current;
        scheduled++;
      }
      assert(!bundle.ops.empty());
      block_.bundles.push_back(std::move(bundle));
    }

    if (branch >= 0) {
      // The branch belongs in the block's final bundle when nothing in that
      // bundle feeds it and a branch slot is free.
      size_t bi = static_cast<size_t>(branch);
      bool joined = false;
      if (!block_.bundles.empty()) {
        int last = static_cast<int>(block_.bundles.size()) - 1;
        bool ok = true;
        for (size_t p : preds_[bi])
          if (bundle_of[p] == last) ok = false;
        if (ok) {
          reset_slots();
          for (size_t i : block_.bundles.back().ops) take_slots(block_.ops[i]);
          if (slots_fit(block_.ops[bi])) {
            block_.bundles.back().ops.push_back(bi);
            block_.bundles.back().terminal = true;
            joined = true;
          }
        }
      }
      if (!joined) {
        Bundle bundle;
        bundle.ops.push_back(bi);
        bundle.terminal = true;
        block_.bundles.push_back(std::move(bundle));
      }
    }
  }

private:
  void build_edges() {
    size_t n = block_.ops.size();
    preds_.assign(n, {});
    for (size_t j = 0; j < n; ++j) {
      for (size_t i = 0; i < j; ++i) {
        bool edge = sets_conflict(access_[i], access_[j]);
        // Stores keep their order against every other memory operation.
        if (!edge && is_memory(block_.ops[i]) && is_memory(block_.ops[j]) &&
            (block_.ops[i].cls == OpClass::StoreWord ||
             block_.ops[j].cls == OpClass::StoreWord))
          edge = true;
        if (edge) preds_[j].push_back(i);
      }
    }
  }

  void reset_slots() { usage_.clear(); }

  // Slot occupancy is tracked per (unit, cluster); the shared address unit
  // uses cluster -1.
  std::vector<int> op_clusters(const CgirOp& op) const {
    switch (op.where) {
      case Where::None:
        return {-1};
      case Where::All: {
        std::vector<int> all;
        for (int k = 0; k < clusters_; ++k) all.push_back(k);
        return all;
      }
      default:
        return {0};
    }
  }

  bool slots_fit(const CgirOp& op) {
    const auto& info = mdesc::lookup_opcode(desc_, op.cls);
    int cap = desc_.slots.at(info.slot);
    for (int k : op_clusters(op)) {
      auto key = std::make_pair(info.slot, k);
      auto it = usage_.find(key);
      if (it != usage_.end() && it->second + 1 > cap) return false;
    }
    return true;
  }

  void take_slots(const CgirOp& op) {
    const auto& info = mdesc::lookup_opcode(desc_, op.cls);
    for (int k : op_clusters(op)) usage_[std::make_pair(info.slot, k)]++;
  }

  Block& block_;
  const mdesc::MachineDesc& desc_;
  int clusters_;
  std::vector<RegAccess> access_;
  std::vector<std::vector<size_t>> preds_;
  std::map<std::pair<std::string, int>, int> usage_;
};

}  // namespace

void schedule_bundles(CgirFunction& f, const mdesc::MachineDesc& desc) {
  for (auto& b : f.blocks) {
    b.bundles.clear();
    if (!b.ops.empty()) BlockScheduler(b, desc).run();
  }
}

}  // namespace bwc::cg
