#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <set>

#include "bwc/codegen.hpp"

namespace bwc::cg {

namespace {

int tracked_vreg(const Reg& r) {
  if (!r.valid() || r.is_phys || r.cls == RegClass::Addr) return -1;
  return r.id;
}

struct Interval {
  int start = 0;  // bundle index, closed
  int end = 0;
};

struct Liveness {
  // per block: vreg -> interval
  std::vector<std::map<int, Interval>> intervals;
  std::set<int> global;            // live across a block boundary
  std::map<int, std::pair<int, int>> first_def;  // vreg -> (block, bundle)
  std::map<int, double> frequency;
};

std::vector<std::vector<int>> successors(const CgirFunction& f) {
  std::map<std::string, int> label_block;
  for (const auto& b : f.blocks) label_block[b.label] = b.id;
  std::vector<std::vector<int>> succ(f.blocks.size());
  for (const auto& b : f.blocks) {
    size_t id = static_cast<size_t>(b.id);
    if (id + 1 < f.blocks.size()) succ[id].push_back(b.id + 1);
    for (const auto& op : b.ops)
      if (op.is_branch()) succ[id].push_back(label_block.at(op.target));
  }
  return succ;
}

Liveness compute_liveness(const CgirFunction& f) {
  size_t nb = f.blocks.size();
  std::vector<std::set<int>> use(nb), def(nb), live_in(nb), live_out(nb);
  Liveness lv;
  lv.intervals.resize(nb);

  for (size_t b = 0; b < nb; ++b) {
    const Block& blk = f.blocks[b];
    std::set<int> defined;
    for (size_t bi = 0; bi < blk.bundles.size(); ++bi) {
      // Parallel semantics: every use in a bundle reads pre-bundle state.
      for (size_t oi : blk.bundles[bi].ops) {
        RegAccess a = reg_access(blk.ops[oi]);
        for (const Reg& r : a.uses) {
          int v = tracked_vreg(r);
          if (v >= 0 && !defined.count(v)) use[b].insert(v);
        }
      }
      for (size_t oi : blk.bundles[bi].ops) {
        RegAccess a = reg_access(blk.ops[oi]);
        for (const Reg& r : a.defs) {
          int v = tracked_vreg(r);
          if (v < 0) continue;
          defined.insert(v);
          def[b].insert(v);
          if (!lv.first_def.count(v))
            lv.first_def[v] = {static_cast<int>(b), static_cast<int>(bi)};
        }
      }
    }
  }

  auto succ = successors(f);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t b = nb; b-- > 0;) {
      std::set<int> out;
      for (int s : succ[b])
        out.insert(live_in[static_cast<size_t>(s)].begin(),
                   live_in[static_cast<size_t>(s)].end());
      std::set<int> in = use[b];
      for (int v : out)
        if (!def[b].count(v)) in.insert(v);
      if (out != live_out[b] || in != live_in[b]) {
        live_out[b] = std::move(out);
        live_in[b] = std::move(in);
        changed = true;
      }
    }
  }

  for (size_t b = 0; b < nb; ++b) {
    lv.global.insert(live_in[b].begin(), live_in[b].end());
    lv.global.insert(live_out[b].begin(), live_out[b].end());
  }

  for (size_t b = 0; b < nb; ++b) {
    const Block& blk = f.blocks[b];
    int nbundles = static_cast<int>(blk.bundles.size());
    std::map<int, std::pair<int, int>> seen;  // vreg -> (first def, last touch)
    for (int bi = 0; bi < nbundles; ++bi) {
      for (size_t oi : blk.bundles[static_cast<size_t>(bi)].ops) {
        RegAccess a = reg_access(blk.ops[oi]);
        auto touch = [&](const Reg& r, bool is_def) {
          int v = tracked_vreg(r);
          if (v < 0) return;
          auto it = seen.find(v);
          if (it == seen.end()) {
            seen[v] = {is_def ? bi : -1, bi};
          } else {
            if (it->second.first < 0 && is_def) it->second.first = bi;
            it->second.second = bi;
          }
          lv.frequency[v] +=
              std::pow(10.0, std::min(blk.loop_depth, 6));
        };
        for (const Reg& r : a.uses) touch(r, false);
        for (const Reg& r : a.defs) touch(r, true);
      }
    }
    for (const auto& [v, fl] : seen) {
      Interval iv;
      iv.start = live_in[b].count(v) ? 0 : std::max(fl.first, 0);
      iv.end = live_out[b].count(v) ? nbundles - 1 : fl.second;
      lv.intervals[b][v] = iv;
    }
    for (int v : live_in[b]) {
      if (!seen.count(v)) {
        // Live through with no occurrence.
        if (nbundles > 0) lv.intervals[b][v] = {0, nbundles - 1};
      }
    }
  }
  return lv;
}

bool intervals_overlap(const Liveness& lv, int a, int b) {
  for (size_t blk = 0; blk < lv.intervals.size(); ++blk) {
    auto ia = lv.intervals[blk].find(a);
    if (ia == lv.intervals[blk].end()) continue;
    auto ib = lv.intervals[blk].find(b);
    if (ib == lv.intervals[blk].end()) continue;
    if (ia->second.start <= ib->second.end && ib->second.start <= ia->second.end)
      return true;
  }
  return false;
}

// Physical indices covered by a vreg's assignment (two for pairs).
std::pair<int, int> index_span(const CgirFunction& f, int vreg) {
  const auto& a = f.assignment[static_cast<size_t>(vreg)];
  int base = a->index;
  int width = f.vregs[static_cast<size_t>(vreg)].pair ? 2 : 1;
  return {base, base + width - 1};
}

bool spans_clash(std::pair<int, int> a, std::pair<int, int> b) {
  return a.first <= b.second && b.first <= a.second;
}

std::vector<int> order_by_first_def(const Liveness& lv, const std::vector<int>& vregs) {
  std::vector<int> out = vregs;
  std::sort(out.begin(), out.end(), [&](int a, int b) {
    auto pa = lv.first_def.count(a) ? lv.first_def.at(a) : std::make_pair(1 << 30, 0);
    auto pb = lv.first_def.count(b) ? lv.first_def.at(b) : std::make_pair(1 << 30, 0);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  return out;
}

int pick_color(const CgirFunction& f, const Liveness& lv, int vreg,
               const std::vector<int>& colored, int file_size) {
  bool pair = f.vregs[static_cast<size_t>(vreg)].pair;
  int step = pair ? 2 : 1;
  int width = pair ? 2 : 1;
  for (int base = 0; base + width - 1 < file_size; base += step) {
    std::pair<int, int> span{base, base + width - 1};
    bool free = true;
    for (int other : colored) {
      if (!spans_clash(span, index_span(f, other))) continue;
      if (intervals_overlap(lv, vreg, other)) {
        free = false;
        break;
      }
    }
    if (free) return base;
  }
  return -1;
}

}  // namespace

void allocate_global(CgirFunction& f, const mdesc::MachineDesc& desc) {
  (void)desc;
  Liveness lv = compute_liveness(f);
  f.assignment.assign(f.vregs.size(), std::nullopt);

  // Accumulator registers first, in definition order, onto the dedicated file.
  std::vector<int> macc_vregs;
  for (size_t v = 0; v < f.vregs.size(); ++v)
    if (f.vregs[v].cls == RegClass::Macc && lv.first_def.count(static_cast<int>(v)))
      macc_vregs.push_back(static_cast<int>(v));
  macc_vregs = order_by_first_def(lv, macc_vregs);
  std::vector<int> macc_colored;
  for (int v : macc_vregs) {
    int c = pick_color(f, lv, v, macc_colored, f.macc_regs);
    if (c < 0)
      throw AllocationOverflow("accumulator registers exhausted (" +
                               std::to_string(f.macc_regs) + " per cluster)");
    f.assignment[static_cast<size_t>(v)] = PhysAssignment{RegClass::Macc, c};
    macc_colored.push_back(v);
  }

  // Cross-block general registers, colored by estimated use frequency.
  std::vector<int> globals;
  for (int v : lv.global)
    if (f.vregs[static_cast<size_t>(v)].cls == RegClass::General) globals.push_back(v);
  std::sort(globals.begin(), globals.end(), [&](int a, int b) {
    double fa = lv.frequency.count(a) ? lv.frequency.at(a) : 0.0;
    double fb = lv.frequency.count(b) ? lv.frequency.at(b) : 0.0;
    if (fa != fb) return fa > fb;
    return a < b;
  });
  std::vector<int> colored;
  for (int v : globals) {
    int c = pick_color(f, lv, v, colored, f.general_regs);
    if (c < 0)
      throw AllocationOverflow("general registers exhausted during global allocation");
    f.assignment[static_cast<size_t>(v)] = PhysAssignment{RegClass::General, c};
    colored.push_back(v);
  }
}

void allocate_local(CgirFunction& f, const mdesc::MachineDesc& desc) {
  (void)desc;
  Liveness lv = compute_liveness(f);
  if (f.assignment.size() != f.vregs.size())
    f.assignment.assign(f.vregs.size(), std::nullopt);

  for (size_t b = 0; b < f.blocks.size(); ++b) {
    // Locals of this block in definition order; already-assigned vregs
    // (globals and accumulators) participate only as occupancy.
    std::vector<int> locals;
    std::vector<int> assigned_here;
    for (const auto& [v, iv] : lv.intervals[b]) {
      (void)iv;
      if (f.assignment[static_cast<size_t>(v)]) {
        assigned_here.push_back(v);
      } else if (!lv.global.count(v) &&
                 f.vregs[static_cast<size_t>(v)].cls == RegClass::General) {
        locals.push_back(v);
      } else if (!lv.global.count(v)) {
        locals.push_back(v);  // block-local accumulator vreg
      }
    }
    locals = order_by_first_def(lv, locals);

    for (int v : locals) {
      bool is_macc = f.vregs[static_cast<size_t>(v)].cls == RegClass::Macc;
      int file_size = is_macc ? f.macc_regs : f.general_regs;
      bool pair = f.vregs[static_cast<size_t>(v)].pair;
      const Interval& iv = lv.intervals[b].at(v);
      int step = pair ? 2 : 1;
      int width = pair ? 2 : 1;
      int chosen = -1;
      for (int base = 0; base + width - 1 < file_size && chosen < 0; base += step) {
        std::pair<int, int> span{base, base + width - 1};
        bool free = true;
        for (int other : assigned_here) {
          if (f.vregs[static_cast<size_t>(other)].cls !=
              f.vregs[static_cast<size_t>(v)].cls)
            continue;
          if (!spans_clash(span, index_span(f, other))) continue;
          const Interval& io = lv.intervals[b].at(other);
          if (iv.start <= io.end && io.start <= iv.end) {
            free = false;
            break;
          }
        }
        if (free) chosen = base;
      }
      if (chosen < 0)
        throw AllocationOverflow("registers exhausted in block " +
                                 f.blocks[b].label);
      f.assignment[static_cast<size_t>(v)] =
          PhysAssignment{f.vregs[static_cast<size_t>(v)].cls, chosen};
      assigned_here.push_back(v);
    }
  }
}

void apply_assignment(CgirFunction& f) {
  auto rewrite = [&](Reg& r) {
    if (!r.valid() || r.is_phys || r.cls == RegClass::Addr) return;
    const auto& a = f.assignment[static_cast<size_t>(r.id)];
    assert(a.has_value());
    int idx = a->index + (r.half >= 0 ? r.half : 0);
    r.id = idx;
    r.is_phys = true;
    r.half = -1;
  };
  for (auto& b : f.blocks) {
    for (auto& op : b.ops) {
      rewrite(op.dst);
      rewrite(op.src1);
      rewrite(op.src2);
      rewrite(op.addr.reg);
    }
  }
}

}  // namespace bwc::cg
