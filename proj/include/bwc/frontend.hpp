#pragma once

#include <string>
#include <vector>

#include "bwc/ast.hpp"
#include "bwc/loop_ir.hpp"

namespace bwc::front {

// Parses the documented C-like loop subset. Throws SyntaxError / EmptyProgram.
Ast parse_program(const std::string& source);

// Validates identifiers, array bounds declarations and affine indices, and
// desugars `+=`. Returns the annotated Ast. Throws UndeclaredIdentifier,
// NonAffineIndex, TypeMismatch.
Ast typecheck(Ast ast);

// Structural translation to the loop-nest IR. Requires a typechecked Ast.
// Throws UnsupportedLoopForm.
ir::LoopIr build_loop_ir(const Ast& ast);

// Loops whose bodies contain no loop, in source order.
std::vector<ir::LoopRef> innermost_loops(const ir::LoopIr& ir);

}  // namespace bwc::front
