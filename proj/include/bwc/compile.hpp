#pragma once

#include <string>
#include <vector>

#include "bwc/ast.hpp"
#include "bwc/codegen.hpp"
#include "bwc/maccpass.hpp"
#include "bwc/sim.hpp"

namespace bwc {

struct CompileOptions {
  bool enable_macc = true;  // false = --no-macc baseline build
  bool dump_ir = false;
};

struct CompileResult {
  std::string assembly;
  cg::CgirFunction function;            // allocated, bundled, physical regs
  front::Ast ast;                       // typechecked
  std::vector<macc::ModeDecision> decisions;  // one per innermost loop
  std::string ir_before, ir_after;      // when dump_ir
};

// Full pipeline: parse, typecheck, loop IR, accumulate synthesis, lowering,
// cluster assignment, bundling, register allocation, verification.
CompileResult compile(const std::string& source, const mdesc::MachineDesc& desc,
                      const CompileOptions& opts = {});

}  // namespace bwc
