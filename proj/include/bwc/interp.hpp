#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bwc/ast.hpp"
#include "bwc/loop_ir.hpp"

namespace bwc::front {

// Final variable/array state of a directly evaluated program. Uninitialized
// scalars are zero; arrays start from whatever the caller provides (missing
// arrays are zero-filled to their declared size).
struct EvalState {
  std::map<std::string, int32_t> scalars;
  std::map<std::string, std::vector<int32_t>> arrays;
  bool operator==(const EvalState&) const = default;
};

class EvalError : public Error {
public:
  explicit EvalError(const std::string& detail) : Error("EvalError", detail) {}
};

// Direct evaluation of a typechecked Ast with 32-bit wrapping arithmetic.
EvalState evaluate_ast(const Ast& ast, EvalState initial = {});

// Direct evaluation of a LoopIr (including SIMD accumulate statements).
// Declarations still come from the Ast since the IR carries only statements.
// clusters/simd_width describe the lane geometry of SIMD accumulate nodes.
EvalState evaluate_loop_ir(const Ast& ast, const ir::LoopIr& ir, EvalState initial = {},
                           int clusters = 4, int simd_width = 2);

}  // namespace bwc::front
