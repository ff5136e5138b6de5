#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bwc/loop_ir.hpp"
#include "bwc/machine.hpp"

namespace bwc::macc {

class RewriteUnsupported : public Error {
public:
  explicit RewriteUnsupported(const std::string& detail)
      : Error("RewriteUnsupported", detail) {}
};

// One recognized accumulate pattern: STORE(acc, ADD(LOAD acc, MUL(a, b)))
// after ADD commutativity canonicalization.
struct MaccMatch {
  int store_id = 0;            // identity of the matched store
  ir::LValue accumulator;      // opnd0; SIMD rewrite accepts scalars only
  const ir::Expr* mul_lhs = nullptr;  // opnd1
  const ir::Expr* mul_rhs = nullptr;  // opnd2
};

enum class Mode { None, ScalarMacc, SimdSingleWord, SimdDoubleWord };
const char* mode_name(Mode m);

struct ModeDecision {
  Mode mode = Mode::None;
  int vector_factor = 1;
  int macc_regs_used = 0;
  std::vector<size_t> matches_accepted;  // indices into the match list
};

struct RewrittenLoop {
  std::vector<ir::StmtPtr> prologue;   // lane accumulator zero-init
  ir::StmtPtr main_loop;               // strides by vector_factor; null when 0 iterations
  ir::StmtPtr remainder_loop;          // scalar tail; null when none
  std::vector<ir::StmtPtr> epilogue;   // lane reduction + original value add
};

// Every store in the loop body satisfying the four pattern conditions.
std::vector<MaccMatch> find_macc_patterns(const ir::LoopRef& loop, const ir::LoopIr& ir);

// Picks the SIMD mode under the per-cluster accumulator register budget.
// Degradation (single-word, or abandoning synthesis) is expressed in the
// returned decision, never as an error.
ModeDecision check_macc_resources(const std::vector<MaccMatch>& matches,
                                  const mdesc::MachineDesc& desc);

// Rewrites the loop into prologue / vector main loop / scalar remainder /
// reduction epilogue. Requires decision.mode to be a SIMD mode and constant
// trip count. Throws RewriteUnsupported for array-element accumulators and
// accumulator-aliasing operands.
RewrittenLoop rewrite_macc(const ir::LoopRef& loop, const ModeDecision& decision,
                           const ir::LoopIr& ir);

// Pass driver: applies the recognition / resource check / rewrite sequence
// to every innermost loop and returns the transformed tree. Loops where
// synthesis is abandoned are left untouched. `decisions` (optional) receives
// one entry per innermost loop in source order.
ir::LoopIr run_macc_pass(const ir::LoopIr& ir, const mdesc::MachineDesc& desc,
                         std::vector<ModeDecision>* decisions = nullptr);

}  // namespace bwc::macc
