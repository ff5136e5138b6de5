#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwc/cgir.hpp"
#include "bwc/machine.hpp"

namespace bwc::sim {

class AsmSyntaxError : public Error {
public:
  AsmSyntaxError(int line, const std::string& detail)
      : Error("AsmSyntaxError", "asm line " + std::to_string(line) + ": " + detail),
        line(line) {}
  int line;
};

class UndefinedLabel : public Error {
public:
  explicit UndefinedLabel(const std::string& label)
      : Error("UndefinedLabel", "branch to undefined label '" + label + "'") {}
};

class UndefinedSymbol : public Error {
public:
  explicit UndefinedSymbol(const std::string& sym)
      : Error("UndefinedSymbol", "reference to undefined symbol '" + sym + "'") {}
};

class OutOfFuel : public Error {
public:
  explicit OutOfFuel(uint64_t fuel)
      : Error("OutOfFuel", "execution exceeded fuel of " + std::to_string(fuel) + " bundles") {}
};

class MemoryOutOfRange : public Error {
public:
  MemoryOutOfRange(int64_t addr, int64_t size)
      : Error("MemoryOutOfRange", "word address " + std::to_string(addr) +
                                      " outside memory of " + std::to_string(size) + " words") {}
};

class DivergentSlotUse : public Error {
public:
  explicit DivergentSlotUse(const std::string& detail)
      : Error("DivergentSlotUse", detail) {}
};

struct ProgBundle {
  std::vector<cg::CgirOp> ops;
  bool terminal = false;
  int label_index = -1;  // region for cycle attribution
};

struct AsmProgram {
  std::vector<ProgBundle> bundles;
  std::vector<std::string> labels;             // in order of appearance
  std::map<std::string, size_t> label_to_bundle;
  std::map<std::string, int64_t> symbols;      // word addresses
  std::map<std::string, int64_t> symbol_words; // sizes where known
};

// Parses the assembly dialect (docs/asm-dialect.md): `||` continuation
// lines form bundles, `.code_align` is consumed, `.sym` directives populate
// the symbol table. Bundle legality is checked against the description.
AsmProgram parse_assembly(const std::string& text, const mdesc::MachineDesc& desc);

// Builds the same program directly from allocated CGIR, bypassing the text
// round trip; the emit/parse path must execute identically to this one.
AsmProgram program_from_function(const cg::CgirFunction& f);

struct SimState {
  // regs[cluster][index]; macc[cluster][index]
  std::vector<std::vector<int32_t>> regs;
  std::vector<std::vector<int32_t>> macc;
  std::vector<int64_t> addr_regs;
  std::vector<int32_t> memory;
  size_t pc = 0;
  uint64_t cycles = 0;
};

struct LabelCycles {
  std::string label;
  uint64_t cycles = 0;
};

struct CycleReport {
  uint64_t total_cycles = 0;
  std::vector<LabelCycles> per_label;
  uint64_t bundle_count = 0;       // dynamic bundles executed
  uint64_t instruction_count = 0;  // dynamic ops executed
  uint64_t cycles_for(const std::string& label) const;
  std::string to_json() const;
  std::string to_text() const;
};

struct RunOptions {
  uint64_t fuel = 100'000'000;  // max bundles
  // When set, receives one (bundle index, cost) entry per executed bundle.
  std::vector<std::pair<size_t, uint32_t>>* trace = nullptr;
};

struct RunResult {
  SimState state;
  CycleReport report;
};

// Executes the program on the cycle model: parallel intra-bundle semantics,
// distributed SIMD loads, cross-cluster sigma reduction, bundle cost = max
// member latency (branch-terminated bundles at least the branch penalty).
RunResult run(const AsmProgram& p, std::vector<int32_t> memory,
              const mdesc::MachineDesc& desc, const RunOptions& opts = {});

// Builds the memory image for a program: zeroed layout-sized memory with
// the given per-symbol contents written at their addresses.
std::vector<int32_t> build_memory(const AsmProgram& p,
                                  const std::map<std::string, std::vector<int32_t>>& contents);

// Data image text format: `<symbol> v0 v1 ...` or `@<addr> v0 v1 ...` lines.
std::vector<int32_t> load_data_image(const std::string& text, const AsmProgram& p);

}  // namespace bwc::sim
