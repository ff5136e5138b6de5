#include <algorithm>
#include <sstream>

#include "bwc/sim.hpp"

#include "json.hpp"

namespace bwc::sim {

namespace {

using cg::CgirOp;
using cg::RegClass;
using cg::Where;
using mdesc::OpClass;

struct RegWrite {
  int cluster;
  bool is_macc;
  int index;
  int32_t value;
};

struct Effects {
  std::vector<RegWrite> regs;
  std::vector<std::pair<int, int64_t>> addr;     // u register, new value
  std::vector<std::pair<int64_t, int32_t>> mem;  // word address, value
  bool branch_taken = false;
  size_t branch_target = 0;
};

class Machine {
public:
  Machine(const AsmProgram& p, std::vector<int32_t> memory,
          const mdesc::MachineDesc& desc, const RunOptions& opts)
      : p_(p), desc_(desc), opts_(opts) {
    int c = desc.cluster_count();
    st_.regs.assign(static_cast<size_t>(c),
                    std::vector<int32_t>(static_cast<size_t>(desc.general_regs_per_cluster), 0));
    st_.macc.assign(static_cast<size_t>(c),
                    std::vector<int32_t>(static_cast<size_t>(desc.macc_regs_per_cluster), 0));
    st_.addr_regs.assign(static_cast<size_t>(desc.address_regs), 0);
    st_.memory = std::move(memory);
  }

  RunResult run() {
    CycleReport report;
    std::vector<uint64_t> label_cycles(p_.labels.size() + 1, 0);
    while (st_.pc < p_.bundles.size()) {
      if (report.bundle_count >= opts_.fuel) throw OutOfFuel(opts_.fuel);
      const ProgBundle& b = p_.bundles[st_.pc];
      Effects fx;
      uint32_t cost = 1;
      for (const CgirOp& op : b.ops) {
        exec(op, fx);
        cost = std::max(cost,
                        static_cast<uint32_t>(mdesc::lookup_opcode(desc_, op.cls).latency));
      }
      if (b.terminal)
        cost = std::max(cost, static_cast<uint32_t>(desc_.branch_taken_penalty));
      apply(fx);
      st_.cycles += cost;
      report.bundle_count++;
      report.instruction_count += b.ops.size();
      label_cycles[static_cast<size_t>(b.label_index + 1)] += cost;
      if (opts_.trace) opts_.trace->push_back({st_.pc, cost});
      st_.pc = fx.branch_taken ? fx.branch_target : st_.pc + 1;
    }
    report.total_cycles = st_.cycles;
    if (label_cycles[0] > 0) report.per_label.push_back({"(entry)", label_cycles[0]});
    for (size_t i = 0; i < p_.labels.size(); ++i)
      report.per_label.push_back({p_.labels[i], label_cycles[i + 1]});
    return {std::move(st_), std::move(report)};
  }

private:
  int clusters() const { return desc_.cluster_count(); }

  std::vector<int> lanes(const CgirOp& op) const {
    if (op.where == Where::All) {
      std::vector<int> all;
      for (int k = 0; k < clusters(); ++k) all.push_back(k);
      return all;
    }
    return {0};
  }

  int32_t rreg(int cluster, const cg::Reg& r) const {
    if (r.cls == RegClass::Macc)
      return st_.macc[static_cast<size_t>(cluster)][static_cast<size_t>(r.id)];
    return st_.regs[static_cast<size_t>(cluster)][static_cast<size_t>(r.id)];
  }

  int32_t load(int64_t addr) const {
    if (addr < 0 || addr >= static_cast<int64_t>(st_.memory.size()))
      throw MemoryOutOfRange(addr, static_cast<int64_t>(st_.memory.size()));
    return st_.memory[static_cast<size_t>(addr)];
  }

  void exec(const CgirOp& op, Effects& fx) {
    switch (op.cls) {
      case OpClass::LoadWord: {
        int64_t u = st_.addr_regs[static_cast<size_t>(op.mem.ureg)];
        int64_t base = op.mem.postinc ? u : u + op.mem.amount;
        if (op.mem.distributed && op.where == Where::All) {
          // Cluster k receives the word at base + k.
          for (int k = 0; k < clusters(); ++k)
            fx.regs.push_back({k, false, op.dst.id, load(base + k)});
        } else {
          for (int k : lanes(op)) fx.regs.push_back({k, false, op.dst.id, load(base)});
        }
        if (op.mem.postinc)
          fx.addr.push_back({op.mem.ureg, u + op.mem.amount});
        return;
      }
      case OpClass::LoadDual: {
        int64_t u = st_.addr_regs[static_cast<size_t>(op.mem.ureg)];
        int64_t base = op.mem.postinc ? u : u + op.mem.amount;
        if (op.mem.distributed && op.where == Where::All) {
          // Cluster k receives words base+2k (low) and base+2k+1 (high).
          for (int k = 0; k < clusters(); ++k) {
            fx.regs.push_back({k, false, op.dst.id, load(base + 2 * k)});
            fx.regs.push_back({k, false, op.dst.id + 1, load(base + 2 * k + 1)});
          }
        } else {
          for (int k : lanes(op)) {
            fx.regs.push_back({k, false, op.dst.id, load(base)});
            fx.regs.push_back({k, false, op.dst.id + 1, load(base + 1)});
          }
        }
        if (op.mem.postinc)
          fx.addr.push_back({op.mem.ureg, u + op.mem.amount});
        return;
      }
      case OpClass::StoreWord: {
        int64_t u = st_.addr_regs[static_cast<size_t>(op.mem.ureg)];
        int64_t addr = op.mem.postinc ? u : u + op.mem.amount;
        if (addr < 0 || addr >= static_cast<int64_t>(st_.memory.size()))
          throw MemoryOutOfRange(addr, static_cast<int64_t>(st_.memory.size()));
        fx.mem.push_back({addr, rreg(0, op.src1)});
        if (op.mem.postinc)
          fx.addr.push_back({op.mem.ureg, u + op.mem.amount});
        return;
      }
      case OpClass::MoveImm:
        for (int k : lanes(op)) fx.regs.push_back({k, false, op.dst.id, op.imm});
        return;
      case OpClass::MoveReg:
        for (int k : lanes(op)) fx.regs.push_back({k, false, op.dst.id, rreg(k, op.src1)});
        return;
      case OpClass::Add:
      case OpClass::Sub:
      case OpClass::Mul:
        for (int k : lanes(op)) {
          int32_t a = rreg(k, op.src1);
          int32_t b = rreg(k, op.src2);
          int32_t v = op.cls == OpClass::Add ? wadd(a, b)
                      : op.cls == OpClass::Sub ? wsub(a, b)
                                               : wmul(a, b);
          fx.regs.push_back({k, false, op.dst.id, v});
        }
        return;
      case OpClass::Macc:
        for (int k : lanes(op)) {
          int32_t acc = st_.macc[static_cast<size_t>(k)][static_cast<size_t>(op.dst.id)];
          fx.regs.push_back(
              {k, true, op.dst.id, wadd(acc, wmul(rreg(k, op.src1), rreg(k, op.src2)))});
        }
        return;
      case OpClass::MaccInit:
        for (int k : lanes(op)) fx.regs.push_back({k, true, op.dst.id, rreg(k, op.src1)});
        return;
      case OpClass::MaccRead:
        for (int k : lanes(op))
          fx.regs.push_back(
              {k, false, op.dst.id,
               st_.macc[static_cast<size_t>(k)][static_cast<size_t>(op.src1.id)]});
        return;
      case OpClass::Sigma: {
        // Wrapping sum of the source register across every cluster, into
        // the first cluster.
        int32_t sum = 0;
        for (int k = 0; k < clusters(); ++k) sum = wadd(sum, rreg(k, op.src1));
        fx.regs.push_back({0, false, op.dst.id, sum});
        return;
      }
      case OpClass::AddrMove: {
        int64_t v = p_.symbols.at(op.addr.sym) + op.addr.offset;
        if (op.addr.reg.valid()) v += rreg(0, op.addr.reg);
        fx.addr.push_back({op.addr_dst, v});
        return;
      }
      case OpClass::BranchCond: {
        int32_t l = rreg(0, op.src1);
        int32_t r = rreg(0, op.src2);
        bool taken = op.cond == cg::Cond::Ne   ? l != r
                     : op.cond == cg::Cond::Ge ? l >= r
                                               : l < r;
        if (taken) {
          fx.branch_taken = true;
          fx.branch_target = p_.label_to_bundle.at(op.target);
        }
        return;
      }
    }
  }

  void apply(const Effects& fx) {
    for (const RegWrite& w : fx.regs) {
      auto& file = w.is_macc ? st_.macc[static_cast<size_t>(w.cluster)]
                             : st_.regs[static_cast<size_t>(w.cluster)];
      file[static_cast<size_t>(w.index)] = w.value;
    }
    for (const auto& [u, v] : fx.addr) st_.addr_regs[static_cast<size_t>(u)] = v;
    for (const auto& [a, v] : fx.mem) st_.memory[static_cast<size_t>(a)] = v;
  }

  const AsmProgram& p_;
  const mdesc::MachineDesc& desc_;
  const RunOptions& opts_;
  SimState st_;
};

}  // namespace

RunResult run(const AsmProgram& p, std::vector<int32_t> memory,
              const mdesc::MachineDesc& desc, const RunOptions& opts) {
  return Machine(p, std::move(memory), desc, opts).run();
}

uint64_t CycleReport::cycles_for(const std::string& label) const {
  for (const auto& lc : per_label)
    if (lc.label == label) return lc.cycles;
  return 0;
}

std::string CycleReport::to_json() const {
  nlohmann::ordered_json j;
  j["total_cycles"] = total_cycles;
  j["bundle_count"] = bundle_count;
  j["instruction_count"] = instruction_count;
  j["per_label"] = nlohmann::ordered_json::array();
  for (const auto& lc : per_label)
    j["per_label"].push_back({{"label", lc.label}, {"cycles", lc.cycles}});
  return j.dump(2);
}

std::string CycleReport::to_text() const {
  std::ostringstream os;
  os << "total cycles:       " << total_cycles << "\n";
  os << "bundles executed:   " << bundle_count << "\n";
  os << "ops executed:       " << instruction_count << "\n";
  os << "cycles by label:\n";
  for (const auto& lc : per_label)
    os << "  " << lc.label << ": " << lc.cycles << "\n";
  return os.str();
}

std::vector<int32_t> build_memory(const AsmProgram& p,
                                  const std::map<std::string, std::vector<int32_t>>& contents) {
  int64_t size = 0;
  for (const auto& [name, addr] : p.symbols) {
    auto words = p.symbol_words.count(name) ? p.symbol_words.at(name) : 1;
    size = std::max(size, addr + words);
  }
  std::vector<int32_t> memory(static_cast<size_t>(size), 0);
  for (const auto& [name, values] : contents) {
    auto it = p.symbols.find(name);
    if (it == p.symbols.end()) throw UndefinedSymbol(name);
    int64_t base = it->second;
    if (base + static_cast<int64_t>(values.size()) > size)
      throw MemoryOutOfRange(base + static_cast<int64_t>(values.size()) - 1, size);
    std::copy(values.begin(), values.end(),
              memory.begin() + static_cast<long>(base));
  }
  return memory;
}

std::vector<int32_t> load_data_image(const std::string& text, const AsmProgram& p) {
  std::map<std::string, std::vector<int32_t>> by_symbol;
  std::vector<std::pair<int64_t, std::vector<int32_t>>> by_addr;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    std::vector<int32_t> vals;
    long long v;
    while (ls >> v) vals.push_back(static_cast<int32_t>(v));
    if (head[0] == '@') {
      by_addr.push_back({std::stoll(head.substr(1)), std::move(vals)});
    } else {
      by_symbol[head] = std::move(vals);
    }
  }
  std::vector<int32_t> memory = build_memory(p, by_symbol);
  for (const auto& [addr, vals] : by_addr) {
    if (addr < 0 || addr + static_cast<int64_t>(vals.size()) >
                        static_cast<int64_t>(memory.size()))
      throw MemoryOutOfRange(addr, static_cast<int64_t>(memory.size()));
    std::copy(vals.begin(), vals.end(), memory.begin() + static_cast<long>(addr));
  }
  return memory;
}

}  // namespace bwc::sim
