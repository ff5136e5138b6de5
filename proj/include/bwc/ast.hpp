#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bwc/common.hpp"

namespace bwc::front {

// Errors raised by the source frontend.
class SyntaxError : public Error {
public:
  SyntaxError(SrcLoc loc, const std::string& expected, const std::string& got)
      : Error("SyntaxError", "line " + std::to_string(loc.line) + ", col " +
                                 std::to_string(loc.col) + ": expected " + expected +
                                 ", got '" + got + "'"),
        loc(loc), expected(expected) {}
  SrcLoc loc;
  std::string expected;
};

class EmptyProgram : public Error {
public:
  EmptyProgram() : Error("EmptyProgram", "program has no declarations and no statements") {}
};

class UndeclaredIdentifier : public Error {
public:
  explicit UndeclaredIdentifier(const std::string& name, SrcLoc loc = {})
      : Error("UndeclaredIdentifier", "undeclared identifier '" + name + "'"),
        name(name), loc(loc) {}
  std::string name;
  SrcLoc loc;
};

class NonAffineIndex : public Error {
public:
  explicit NonAffineIndex(const std::string& detail, SrcLoc loc = {})
      : Error("NonAffineIndex", "array index is not affine: " + detail), loc(loc) {}
  SrcLoc loc;
};

class TypeMismatch : public Error {
public:
  explicit TypeMismatch(const std::string& detail, SrcLoc loc = {})
      : Error("TypeMismatch", detail), loc(loc) {}
  SrcLoc loc;
};

class UnsupportedLoopForm : public Error {
public:
  explicit UnsupportedLoopForm(const std::string& detail, SrcLoc loc = {})
      : Error("UnsupportedLoopForm", detail), loc(loc) {}
  SrcLoc loc;
};

enum class BinOp { Add, Sub, Mul };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, Var, ArrayRef, Binary };
  Kind kind;
  SrcLoc loc;

  int32_t value = 0;   // IntLit
  std::string name;    // Var, ArrayRef
  ExprPtr index;       // ArrayRef
  BinOp op = BinOp::Add;
  ExprPtr lhs, rhs;    // Binary

  static ExprPtr int_lit(int32_t v, SrcLoc loc = {});
  static ExprPtr var(std::string name, SrcLoc loc = {});
  static ExprPtr array_ref(std::string name, ExprPtr idx, SrcLoc loc = {});
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r, SrcLoc loc = {});
  ExprPtr clone() const;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

// Loop header: `for (var = init; var < bound; var += step)`. `<=` bounds are
// normalized to `<` during loop IR construction.
struct ForHeader {
  std::string var;
  ExprPtr init;
  ExprPtr bound;
  bool bound_inclusive = false;  // true for `<=` in the source
  int32_t step = 1;
};

struct Stmt {
  enum class Kind { Assign, For };
  Kind kind;
  SrcLoc loc;

  // Assign: lhs_name[lhs_index] (op)= rhs. compound means `+=` in the source;
  // typecheck() desugars it to `x = x + rhs`.
  std::string lhs_name;
  ExprPtr lhs_index;  // null for scalar targets
  bool compound = false;
  ExprPtr rhs;

  // For
  ForHeader header;
  std::vector<StmtPtr> body;

  StmtPtr clone() const;
};

struct Decl {
  std::string name;
  std::optional<int64_t> array_size;  // nullopt => scalar
  int32_t init = 0;
  bool has_init = false;
  SrcLoc loc;
};

struct Ast {
  std::vector<Decl> decls;
  std::vector<StmtPtr> stmts;

  // Filled in by typecheck(): declared scalars that are never assigned
  // anywhere; their uses fold to constants during loop IR construction.
  std::vector<std::string> constant_scalars;
  bool typechecked = false;
};

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Ast& a, const Ast& b);

// Renders an Ast back to source text in the documented grammar.
std::string print_program(const Ast& ast);

}  // namespace bwc::front
