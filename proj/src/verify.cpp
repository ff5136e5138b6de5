#include <algorithm>
#include <map>
#include <set>

#include "bwc/codegen.hpp"

namespace bwc::cg {

namespace {

// Conflict test mirroring the scheduler's rule: virtual ids are abstract,
// physical pairs cover two adjacent indices.
bool regs_clash(const Reg& a, const Reg& b) {
  if (a.cls != b.cls || a.is_phys != b.is_phys) return false;
  if (!a.is_phys) return a.id == b.id;
  int ae = a.id + (a.pair ? 1 : 0);
  int be = b.id + (b.pair ? 1 : 0);
  return a.id <= be && b.id <= ae;
}

}  // namespace

std::vector<Violation> verify_bundle_ops(const std::vector<const CgirOp*>& ops,
                                         const mdesc::MachineDesc& desc) {
  std::vector<Violation> out;
  // Register hazards: a register written by one op must not be read or
  // written by any other op of the same bundle.
  for (size_t i = 0; i < ops.size(); ++i) {
    RegAccess ai = reg_access(*ops[i]);
    for (size_t j = 0; j < ops.size(); ++j) {
      if (i == j) continue;
      RegAccess aj = reg_access(*ops[j]);
      for (const Reg& d : ai.defs) {
        for (const Reg& u : aj.uses)
          if (regs_clash(d, u))
            out.push_back({"bundle op reads a register written by a parallel op"});
        if (j > i)
          for (const Reg& d2 : aj.defs)
            if (regs_clash(d, d2))
              out.push_back({"bundle writes one register twice"});
      }
    }
  }
  // Slot capacities per cluster; the shared address unit counts separately.
  std::map<std::pair<std::string, int>, int> usage;
  for (const CgirOp* op : ops) {
    const auto& info = mdesc::lookup_opcode(desc, op->cls);
    std::vector<int> clusters;
    if (op->where == Where::None) {
      clusters = {-1};
    } else if (op->where == Where::All) {
      for (int k = 0; k < desc.cluster_count(); ++k) clusters.push_back(k);
    } else {
      clusters = {0};
    }
    for (int k : clusters) {
      int cap = desc.slots.count(info.slot) ? desc.slots.at(info.slot) : 1;
      if (++usage[{info.slot, k}] > cap)
        out.push_back({"slot '" + info.slot + "' oversubscribed"});
    }
  }
  return out;
}

std::vector<Violation> verify_bundles(const CgirFunction& f,
                                      const mdesc::MachineDesc& desc) {
  std::vector<Violation> out;
  for (const auto& b : f.blocks) {
    std::set<size_t> bundled;
    for (size_t bi = 0; bi < b.bundles.size(); ++bi) {
      const Bundle& bundle = b.bundles[bi];
      std::vector<const CgirOp*> ops;
      for (size_t oi : bundle.ops) {
        ops.push_back(&b.ops[oi]);
        bundled.insert(oi);
      }
      for (auto& v : verify_bundle_ops(ops, desc))
        out.push_back({b.label + " bundle " + std::to_string(bi) + ": " + v.what});
      for (size_t oi : bundle.ops)
        if (b.ops[oi].is_branch() && bi + 1 != b.bundles.size())
          out.push_back({b.label + ": branch not in the final bundle"});
    }
    if (bundled.size() != b.ops.size())
      out.push_back({b.label + ": ops missing from bundles"});
  }
  return out;
}

namespace {

// Self-contained liveness recheck at bundle granularity; intentionally a
// fresh implementation rather than the allocator's.
struct Ranges {
  // vreg -> block -> [start, end] closed bundle interval
  std::map<int, std::map<int, std::pair<int, int>>> by_vreg;
  std::set<int> occurring;
};

int vreg_id(const Reg& r) {
  if (!r.valid() || r.is_phys || r.cls == RegClass::Addr) return -1;
  return r.id;
}

Ranges recompute_ranges(const CgirFunction& f) {
  size_t nb = f.blocks.size();
  std::map<std::string, int> label_block;
  for (const auto& b : f.blocks) label_block[b.label] = b.id;
  std::vector<std::vector<int>> succ(nb);
  for (const auto& b : f.blocks) {
    if (static_cast<size_t>(b.id) + 1 < nb) succ[static_cast<size_t>(b.id)].push_back(b.id + 1);
    for (const auto& op : b.ops)
      if (op.is_branch()) succ[static_cast<size_t>(b.id)].push_back(label_block.at(op.target));
  }

  std::vector<std::set<int>> use(nb), def(nb), lin(nb), lout(nb);
  Ranges rg;
  for (size_t b = 0; b < nb; ++b) {
    std::set<int> seen_def;
    for (const auto& bundle : f.blocks[b].bundles) {
      for (size_t oi : bundle.ops) {
        RegAccess a = reg_access(f.blocks[b].ops[oi]);
        for (const Reg& r : a.uses) {
          int v = vreg_id(r);
          if (v < 0) continue;
          rg.occurring.insert(v);
          if (!seen_def.count(v)) use[b].insert(v);
        }
      }
      for (size_t oi : bundle.ops) {
        RegAccess a = reg_access(f.blocks[b].ops[oi]);
        for (const Reg& r : a.defs) {
          int v = vreg_id(r);
          if (v < 0) continue;
          rg.occurring.insert(v);
          seen_def.insert(v);
          def[b].insert(v);
        }
      }
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t b = nb; b-- > 0;) {
      std::set<int> out;
      for (int s : succ[b]) out.insert(lin[static_cast<size_t>(s)].begin(), lin[static_cast<size_t>(s)].end());
      std::set<int> in = use[b];
      for (int v : out)
        if (!def[b].count(v)) in.insert(v);
      if (out != lout[b] || in != lin[b]) {
        lout[b] = std::move(out);
        lin[b] = std::move(in);
        changed = true;
      }
    }
  }
  for (size_t b = 0; b < nb; ++b) {
    const Block& blk = f.blocks[b];
    int nbundles = static_cast<int>(blk.bundles.size());
    if (nbundles == 0) continue;
    std::map<int, std::pair<int, int>> local;  // vreg -> (first def, last touch)
    for (int bi = 0; bi < nbundles; ++bi) {
      for (size_t oi : blk.bundles[static_cast<size_t>(bi)].ops) {
        RegAccess a = reg_access(blk.ops[oi]);
        for (const Reg& r : a.uses) {
          int v = vreg_id(r);
          if (v < 0) continue;
          auto it = local.find(v);
          if (it == local.end()) local[v] = {-1, bi};
          else it->second.second = bi;
        }
        for (const Reg& r : a.defs) {
          int v = vreg_id(r);
          if (v < 0) continue;
          auto it = local.find(v);
          if (it == local.end()) local[v] = {bi, bi};
          else {
            if (it->second.first < 0) it->second.first = bi;
            it->second.second = bi;
          }
        }
      }
    }
    for (int v : lin[b])
      if (!local.count(v)) local[v] = {-1, nbundles - 1};
    for (const auto& [v, fl] : local) {
      int start = lin[b].count(v) ? 0 : std::max(fl.first, 0);
      int end = lout[b].count(v) ? nbundles - 1 : fl.second;
      rg.by_vreg[v][static_cast<int>(b)] = {start, end};
    }
  }
  return rg;
}

bool ranges_overlap(const Ranges& rg, int a, int b) {
  auto ia = rg.by_vreg.find(a);
  auto ib = rg.by_vreg.find(b);
  if (ia == rg.by_vreg.end() || ib == rg.by_vreg.end()) return false;
  for (const auto& [blk, ra] : ia->second) {
    auto it = ib->second.find(blk);
    if (it == ib->second.end()) continue;
    if (ra.first <= it->second.second && it->second.first <= ra.second) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> verify_allocation(const CgirFunction& f) {
  std::vector<Violation> out;
  Ranges rg = recompute_ranges(f);

  for (int v : rg.occurring) {
    if (static_cast<size_t>(v) >= f.assignment.size() ||
        !f.assignment[static_cast<size_t>(v)]) {
      out.push_back({"virtual register v" + std::to_string(v) + " has no assignment"});
      continue;
    }
    const auto& a = *f.assignment[static_cast<size_t>(v)];
    const VRegInfo& info = f.vregs[static_cast<size_t>(v)];
    int width = info.pair ? 2 : 1;
    int file = a.cls == RegClass::Macc ? f.macc_regs : f.general_regs;
    if (info.pair && (a.index % 2) != 0)
      out.push_back({"pair register v" + std::to_string(v) + " not even-aligned"});
    if (a.index < 0 || a.index + width - 1 >= file)
      out.push_back({"v" + std::to_string(v) + " assigned outside the register file"});
    if (info.cls != a.cls)
      out.push_back({"v" + std::to_string(v) + " assigned to the wrong register file"});
  }

  std::vector<int> assigned;
  for (int v : rg.occurring)
    if (static_cast<size_t>(v) < f.assignment.size() && f.assignment[static_cast<size_t>(v)])
      assigned.push_back(v);
  for (size_t i = 0; i < assigned.size(); ++i) {
    for (size_t j = i + 1; j < assigned.size(); ++j) {
      int v = assigned[i], w = assigned[j];
      const auto& av = *f.assignment[static_cast<size_t>(v)];
      const auto& aw = *f.assignment[static_cast<size_t>(w)];
      if (av.cls != aw.cls) continue;
      int ve = av.index + (f.vregs[static_cast<size_t>(v)].pair ? 1 : 0);
      int we = aw.index + (f.vregs[static_cast<size_t>(w)].pair ? 1 : 0);
      if (av.index > we || aw.index > ve) continue;
      if (ranges_overlap(rg, v, w))
        out.push_back({"v" + std::to_string(v) + " and v" + std::to_string(w) +
                       " overlap on the same physical register"});
    }
  }

  // Accumulate ops must target the accumulator file.
  for (const auto& b : f.blocks) {
    for (const auto& op : b.ops) {
      if (op.cls != OpClass::Macc && op.cls != OpClass::MaccInit) continue;
      bool ok = false;
      if (op.dst.is_phys) {
        ok = op.dst.cls == RegClass::Macc && op.dst.id >= 0 && op.dst.id < f.macc_regs;
      } else if (static_cast<size_t>(op.dst.id) < f.assignment.size()) {
        const auto& a = f.assignment[static_cast<size_t>(op.dst.id)];
        ok = a && a->cls == RegClass::Macc && a->index < f.macc_regs;
      }
      if (!ok)
        out.push_back({b.label + ": accumulate op does not target a MACC register"});
    }
  }
  return out;
}

}  // namespace bwc::cg
