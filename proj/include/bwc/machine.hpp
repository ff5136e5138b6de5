#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwc/common.hpp"

namespace bwc::mdesc {

class DescriptionSyntaxError : public Error {
public:
  DescriptionSyntaxError(int line, const std::string& detail)
      : Error("DescriptionSyntaxError",
              "machine description line " + std::to_string(line) + ": " + detail),
        line(line) {}
  int line;
};

class UnknownOpcodeClass : public Error {
public:
  explicit UnknownOpcodeClass(const std::string& name)
      : Error("UnknownOpcodeClass", "unknown opcode class '" + name + "'") {}
};

class DuplicateEntry : public Error {
public:
  explicit DuplicateEntry(const std::string& what)
      : Error("DuplicateEntry", "duplicate machine description entry: " + what) {}
};

enum class OpClass {
  LoadWord,
  LoadDual,
  StoreWord,
  MoveImm,
  MoveReg,
  Add,
  Sub,
  Mul,
  Macc,
  MaccInit,
  MaccRead,
  Sigma,
  BranchCond,
  AddrMove,
};

constexpr int kNumOpClasses = 14;
const char* op_class_name(OpClass c);
std::optional<OpClass> op_class_from_name(const std::string& name);
// Operand count of each class as used by print format validation.
int op_class_arity(OpClass c);

struct OpcodeInfo {
  OpClass cls;
  int latency = 1;
  std::string slot;          // functional unit name, see MachineDesc::slots
  std::string print_format;  // %0..%n bare operand, %Pk cluster-prefixed, %c condition
  bool operator==(const OpcodeInfo&) const = default;
};

struct MachineDesc {
  std::vector<std::string> cluster_names;      // default x y z t
  int general_regs_per_cluster = 64;           // r0..r63
  int address_regs = 16;                       // u0..u15, shared scalar file
  int macc_regs_per_cluster = 4;
  int simd_width_per_cluster = 2;              // words per cluster in double-word mode
  std::map<std::string, int> slots;            // unit name -> issue capacity per cluster
  std::map<OpClass, OpcodeInfo> opcode_table;
  int branch_taken_penalty = 5;

  int cluster_count() const { return static_cast<int>(cluster_names.size()); }
  // Cluster prefix used by broadcast operations, e.g. "xyzt".
  std::string broadcast_prefix() const;
  bool operator==(const MachineDesc&) const = default;
};

struct Violation {
  std::string what;
};

// Parses the line-oriented description format (docs/mdesc.md). Unspecified
// fields take the documented defaults. Also runs validate_description and
// throws on any violation.
MachineDesc load_machine_description(const std::string& text);

// All invariant checks; returns the complete violation list instead of
// failing on the first problem.
std::vector<Violation> validate_description(const MachineDesc& desc);

const OpcodeInfo& lookup_opcode(const MachineDesc& desc, OpClass cls);

// Inverse of load_machine_description, byte-stable for round trips.
std::string serialize_description(const MachineDesc& desc);

// The shipped default description (machines/bw.mdesc carries the same text).
const std::string& default_description_text();
const MachineDesc& default_machine();

}  // namespace bwc::mdesc
