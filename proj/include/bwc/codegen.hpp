#pragma once

#include <string>
#include <vector>

#include "bwc/ast.hpp"
#include "bwc/cgir.hpp"
#include "bwc/loop_ir.hpp"
#include "bwc/machine.hpp"

namespace bwc::cg {

class UnsupportedNode : public Error {
public:
  explicit UnsupportedNode(const std::string& detail) : Error("UnsupportedNode", detail) {}
};

class AllocationOverflow : public Error {
public:
  explicit AllocationOverflow(const std::string& detail)
      : Error("AllocationOverflow", detail) {}
};

struct Violation {
  std::string what;
};

// Lowers the loop IR to unbundled CGIR ops on virtual registers: memory
// streams through post-increment address registers, register-resident
// scalars with entry initialization and exit write-back, rotated counted
// loops, and the SIMD accumulate forms. Declarations come from the Ast.
CgirFunction annotate(const front::Ast& ast, const ir::LoopIr& ir,
                      const mdesc::MachineDesc& desc);

// Tags every op: broadcast ops on all clusters, scalar ops on cluster x,
// address-unit ops on no cluster. sigma reads all clusters, writes x.
void assign_clusters(CgirFunction& f);

// Greedy in-order list scheduling into parallel issue bundles, subject to
// slot capacities and intra-bundle hazard rules. The block's branch lands in
// its final bundle with independent ops allowed alongside.
void schedule_bundles(CgirFunction& f, const mdesc::MachineDesc& desc);

// Graph-coloring assignment of virtual registers that are live across block
// boundaries. Accumulator vregs go first, onto MACC0..MACC3; the rest are
// colored by estimated use frequency. No spilling: overflow is an error.
void allocate_global(CgirFunction& f, const mdesc::MachineDesc& desc);

// Per-block linear scan for the remaining block-local vregs; registers are
// freed past their last use. Leaves zero virtual registers behind.
void allocate_local(CgirFunction& f, const mdesc::MachineDesc& desc);

// Post-allocation checks: every vreg assigned, interfering live ranges on
// distinct physical registers, pair alignment, macc ops on MACC registers.
std::vector<Violation> verify_allocation(const CgirFunction& f);

// Bundle legality: slot capacities per cluster and no intra-bundle register
// hazards (read-of-written, double write). Works on virtual or physical regs.
std::vector<Violation> verify_bundles(const CgirFunction& f, const mdesc::MachineDesc& desc);

// Same checks for one bundle's ops; shared with the assembler-side verifier.
std::vector<Violation> verify_bundle_ops(const std::vector<const CgirOp*>& ops,
                                         const mdesc::MachineDesc& desc);

// Rewrites all register operands to their physical assignment in place.
void apply_assignment(CgirFunction& f);

// Deterministic assembly text in the documented dialect. Requires zero
// virtual registers (apply_assignment) and a clean verify_allocation.
std::string emit_assembly(const CgirFunction& f, const mdesc::MachineDesc& desc);

// Renders one op through its machine-description print format.
std::string print_op(const CgirOp& op, const mdesc::MachineDesc& desc);

}  // namespace bwc::cg
