#include <sstream>

#include "bwc/ast.hpp"

namespace bwc::front {

ExprPtr Expr::int_lit(int32_t v, SrcLoc loc) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::IntLit;
  e->value = v;
  e->loc = loc;
  return e;
}

ExprPtr Expr::var(std::string name, SrcLoc loc) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Var;
  e->name = std::move(name);
  e->loc = loc;
  return e;
}

ExprPtr Expr::array_ref(std::string name, ExprPtr idx, SrcLoc loc) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::ArrayRef;
  e->name = std::move(name);
  e->index = std::move(idx);
  e->loc = loc;
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r, SrcLoc loc) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  e->loc = loc;
  return e;
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->loc = loc;
  e->value = value;
  e->name = name;
  e->op = op;
  if (index) e->index = index->clone();
  if (lhs) e->lhs = lhs->clone();
  if (rhs) e->rhs = rhs->clone();
  return e;
}

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->loc = loc;
  s->lhs_name = lhs_name;
  if (lhs_index) s->lhs_index = lhs_index->clone();
  s->compound = compound;
  if (rhs) s->rhs = rhs->clone();
  s->header.var = header.var;
  if (header.init) s->header.init = header.init->clone();
  if (header.bound) s->header.bound = header.bound->clone();
  s->header.bound_inclusive = header.bound_inclusive;
  s->header.step = header.step;
  for (const auto& b : body) s->body.push_back(b->clone());
  return s;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::IntLit: return a.value == b.value;
    case Expr::Kind::Var: return a.name == b.name;
    case Expr::Kind::ArrayRef:
      return a.name == b.name && structurally_equal(*a.index, *b.index);
    case Expr::Kind::Binary:
      return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

namespace {

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Stmt::Kind::Assign) {
    if (a.lhs_name != b.lhs_name || a.compound != b.compound) return false;
    if (static_cast<bool>(a.lhs_index) != static_cast<bool>(b.lhs_index)) return false;
    if (a.lhs_index && !structurally_equal(*a.lhs_index, *b.lhs_index)) return false;
    return structurally_equal(*a.rhs, *b.rhs);
  }
  if (a.header.var != b.header.var || a.header.step != b.header.step ||
      a.header.bound_inclusive != b.header.bound_inclusive)
    return false;
  if (!structurally_equal(*a.header.init, *b.header.init)) return false;
  if (!structurally_equal(*a.header.bound, *b.header.bound)) return false;
  if (a.body.size() != b.body.size()) return false;
  for (size_t i = 0; i < a.body.size(); ++i)
    if (!stmt_equal(*a.body[i], *b.body[i])) return false;
  return true;
}

int precedence(BinOp op) { return op == BinOp::Mul ? 2 : 1; }

void print_expr(std::ostream& os, const Expr& e, int parent_prec) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      os << e.value;
      return;
    case Expr::Kind::Var:
      os << e.name;
      return;
    case Expr::Kind::ArrayRef:
      os << e.name << "[";
      print_expr(os, *e.index, 0);
      os << "]";
      return;
    case Expr::Kind::Binary: {
      int prec = precedence(e.op);
      bool parens = prec < parent_prec;
      if (parens) os << "(";
      print_expr(os, *e.lhs, prec);
      os << (e.op == BinOp::Add ? " + " : e.op == BinOp::Sub ? " - " : " * ");
      // Right child needs parens at equal precedence: a - (b + c).
      print_expr(os, *e.rhs, prec + 1);
      if (parens) os << ")";
      return;
    }
  }
}

void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  if (s.kind == Stmt::Kind::Assign) {
    os << pad << s.lhs_name;
    if (s.lhs_index) {
      os << "[";
      print_expr(os, *s.lhs_index, 0);
      os << "]";
    }
    os << (s.compound ? " += " : " = ");
    print_expr(os, *s.rhs, 0);
    os << ";\n";
    return;
  }
  os << pad << "for (" << s.header.var << " = ";
  print_expr(os, *s.header.init, 0);
  os << "; " << s.header.var << (s.header.bound_inclusive ? " <= " : " < ");
  print_expr(os, *s.header.bound, 0);
  os << "; " << s.header.var;
  if (s.header.step == 1) {
    os << "++";
  } else {
    os << " += " << s.header.step;
  }
  os << ") {\n";
  for (const auto& b : s.body) print_stmt(os, *b, indent + 1);
  os << pad << "}\n";
}

}  // namespace

bool structurally_equal(const Ast& a, const Ast& b) {
  if (a.decls.size() != b.decls.size() || a.stmts.size() != b.stmts.size()) return false;
  for (size_t i = 0; i < a.decls.size(); ++i) {
    const Decl& x = a.decls[i];
    const Decl& y = b.decls[i];
    if (x.name != y.name || x.array_size != y.array_size || x.init != y.init ||
        x.has_init != y.has_init)
      return false;
  }
  for (size_t i = 0; i < a.stmts.size(); ++i)
    if (!stmt_equal(*a.stmts[i], *b.stmts[i])) return false;
  return true;
}

std::string print_program(const Ast& ast) {
  std::ostringstream os;
  for (const Decl& d : ast.decls) {
    os << "int " << d.name;
    if (d.array_size) os << "[" << *d.array_size << "]";
    if (d.has_init) os << " = " << d.init;
    os << ";\n";
  }
  for (const auto& s : ast.stmts) print_stmt(os, *s, 0);
  return os.str();
}

}  // namespace bwc::front
