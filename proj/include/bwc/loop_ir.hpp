#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bwc/common.hpp"

namespace bwc::ir {

// Index expression in canonical affine form: constant + sum of
// coefficient * induction-variable terms. Variables are source names.
struct Affine {
  int32_t constant = 0;
  std::vector<std::pair<std::string, int32_t>> terms;  // sorted by name, coeff != 0

  int32_t coeff_of(const std::string& var) const;
  // Affine form with the given variable's term removed.
  Affine without(const std::string& var) const;
  bool is_constant() const { return terms.empty(); }
  bool operator==(const Affine&) const = default;
  std::string to_string() const;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { Const, LoadScalar, LoadArray, Add, Sub, Mul };
  Kind kind;

  int32_t cval = 0;       // Const
  std::string var;        // LoadScalar
  std::string array;      // LoadArray
  Affine index;           // LoadArray
  ExprPtr lhs, rhs;       // Add/Sub/Mul

  static ExprPtr make_const(int32_t v);
  static ExprPtr load_scalar(std::string v);
  static ExprPtr load_array(std::string a, Affine idx);
  static ExprPtr binary(Kind k, ExprPtr l, ExprPtr r);
  ExprPtr clone() const;
  bool equals(const Expr& other) const;
  // True if the expression reads the named scalar anywhere.
  bool reads_scalar(const std::string& name) const;
};

// Either a scalar variable or one array element; the target of a store.
struct LValue {
  bool is_array = false;
  std::string name;
  Affine index;  // arrays only
  bool operator==(const LValue&) const = default;
};

// Loop bound after normalization: a compile-time constant or the value of a
// scalar variable read once on loop entry.
struct Bound {
  bool is_const = true;
  int32_t cval = 0;
  std::string var;      // when !is_const
  int32_t addend = 0;   // applied to the variable value (from `<=` rewrites)
  std::optional<int64_t> const_value() const {
    if (is_const) return cval;
    return std::nullopt;
  }
  bool operator==(const Bound&) const = default;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

// SIMD accumulate statements produced by the MACC rewrite. They are not
// expressible in source; the interpreter and the code generator both
// understand them.
enum class SimdWidth { Single, Double };

struct VecOperand {
  enum class Kind { Array, Const };
  Kind kind = Kind::Array;
  std::string array;
  Affine index;   // affine in the loop variable, unit stride
  int32_t cval = 0;
  bool operator==(const VecOperand&) const = default;
};

struct Stmt {
  enum class Kind { Store, Loop, MaccInit, MaccUpdate, MaccReduce };
  Kind kind;
  int id = 0;  // stable identity for match reporting

  // Store
  LValue target;
  ExprPtr value;

  // Loop
  std::string var;
  Bound lower, upper;  // normalized `var = lower; var < upper; var += step`
  int32_t step = 1;
  std::vector<StmtPtr> body;
  int depth = 0;          // nesting depth, 1 = outermost
  bool is_remainder = false;  // scalar tail emitted by the SIMD rewrite

  // MaccInit: zero one per-cluster accumulator register set.
  int macc_index = 0;

  // MaccUpdate: one vectorized accumulate step. Double width uses
  // macc_index (high lane) and macc_index + 1 (low lane).
  SimdWidth width = SimdWidth::Double;
  VecOperand op_a, op_b;

  // MaccReduce: fold lanes of macc_index (+1 when double) across clusters
  // and add the result into the named scalar accumulator.
  std::string acc_var;

  StmtPtr clone() const;
};

struct LoopIr {
  std::vector<StmtPtr> stmts;
  LoopIr clone() const;
};

// Path from the root statement list to one LOOP node.
struct LoopRef {
  std::vector<size_t> path;      // child indices through Stmt::body lists
  const Stmt* loop = nullptr;
  int depth = 0;
  bool innermost = false;
  std::optional<int64_t> trip_count;  // when bounds are compile-time constants
};

const Stmt& resolve(const LoopIr& ir, const std::vector<size_t>& path);

// Deterministic tree dump used by --dump-ir and by tests asserting that a
// rejected loop is left byte-identical.
std::string print_loop_ir(const LoopIr& ir);

}  // namespace bwc::ir
