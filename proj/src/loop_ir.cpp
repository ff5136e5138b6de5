#include <sstream>

#include "bwc/loop_ir.hpp"

namespace bwc::ir {

int32_t Affine::coeff_of(const std::string& var) const {
  for (const auto& [v, c] : terms)
    if (v == var) return c;
  return 0;
}

Affine Affine::without(const std::string& var) const {
  Affine out;
  out.constant = constant;
  for (const auto& t : terms)
    if (t.first != var) out.terms.push_back(t);
  return out;
}

std::string Affine::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : terms) {
    if (!first) os << "+";
    if (c != 1) os << c << "*";
    os << v;
    first = false;
  }
  if (constant != 0 || first) {
    if (!first) os << "+";
    os << constant;
  }
  return os.str();
}

ExprPtr Expr::make_const(int32_t v) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Const;
  e->cval = v;
  return e;
}

ExprPtr Expr::load_scalar(std::string v) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::LoadScalar;
  e->var = std::move(v);
  return e;
}

ExprPtr Expr::load_array(std::string a, Affine idx) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::LoadArray;
  e->array = std::move(a);
  e->index = std::move(idx);
  return e;
}

ExprPtr Expr::binary(Kind k, ExprPtr l, ExprPtr r) {
  auto e = std::make_unique<Expr>();
  e->kind = k;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->cval = cval;
  e->var = var;
  e->array = array;
  e->index = index;
  if (lhs) e->lhs = lhs->clone();
  if (rhs) e->rhs = rhs->clone();
  return e;
}

bool Expr::equals(const Expr& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Const: return cval == other.cval;
    case Kind::LoadScalar: return var == other.var;
    case Kind::LoadArray: return array == other.array && index == other.index;
    default: return lhs->equals(*other.lhs) && rhs->equals(*other.rhs);
  }
}

bool Expr::reads_scalar(const std::string& name) const {
  switch (kind) {
    case Kind::Const: return false;
    case Kind::LoadScalar: return var == name;
    case Kind::LoadArray: return false;
    default: return lhs->reads_scalar(name) || rhs->reads_scalar(name);
  }
}

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->id = id;
  s->target = target;
  if (value) s->value = value->clone();
  s->var = var;
  s->lower = lower;
  s->upper = upper;
  s->step = step;
  for (const auto& b : body) s->body.push_back(b->clone());
  s->depth = depth;
  s->is_remainder = is_remainder;
  s->macc_index = macc_index;
  s->width = width;
  s->op_a = op_a;
  s->op_b = op_b;
  s->acc_var = acc_var;
  return s;
}

LoopIr LoopIr::clone() const {
  LoopIr out;
  for (const auto& s : stmts) out.stmts.push_back(s->clone());
  return out;
}

const Stmt& resolve(const LoopIr& ir, const std::vector<size_t>& path) {
  const std::vector<StmtPtr>* list = &ir.stmts;
  const Stmt* node = nullptr;
  for (size_t idx : path) {
    node = (*list)[idx].get();
    list = &node->body;
  }
  return *node;
}

namespace {

void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Const: os << e.cval; return;
    case Expr::Kind::LoadScalar: os << e.var; return;
    case Expr::Kind::LoadArray: os << e.array << "[" << e.index.to_string() << "]"; return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul: {
      const char* name = e.kind == Expr::Kind::Add ? "ADD"
                         : e.kind == Expr::Kind::Sub ? "SUB" : "MUL";
      os << name << "(";
      print_expr(os, *e.lhs);
      os << ", ";
      print_expr(os, *e.rhs);
      os << ")";
      return;
    }
  }
}

void print_bound(std::ostream& os, const Bound& b) {
  if (b.is_const) {
    os << b.cval;
    return;
  }
  os << b.var;
  if (b.addend) os << "+" << b.addend;
}

void print_operand(std::ostream& os, const VecOperand& v) {
  if (v.kind == VecOperand::Kind::Const) {
    os << v.cval;
  } else {
    os << v.array << "[" << v.index.to_string() << "]";
  }
}

void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Store:
      os << pad << "STORE(";
      if (s.target.is_array) {
        os << s.target.name << "[" << s.target.index.to_string() << "]";
      } else {
        os << s.target.name;
      }
      os << ", ";
      print_expr(os, *s.value);
      os << ")\n";
      return;
    case Stmt::Kind::Loop:
      os << pad << "LOOP(" << s.var << ", ";
      print_bound(os, s.lower);
      os << ", ";
      print_bound(os, s.upper);
      os << ", " << s.step << ") depth=" << s.depth << "\n";
      for (const auto& b : s.body) print_stmt(os, *b, indent + 1);
      return;
    case Stmt::Kind::MaccInit:
      os << pad << "MACC_INIT(" << s.macc_index << ")\n";
      return;
    case Stmt::Kind::MaccUpdate:
      os << pad << "MACC_UPDATE(" << s.macc_index << ", "
         << (s.width == SimdWidth::Double ? "double" : "single") << ", ";
      print_operand(os, s.op_a);
      os << ", ";
      print_operand(os, s.op_b);
      os << ")\n";
      return;
    case Stmt::Kind::MaccReduce:
      os << pad << "MACC_REDUCE(" << s.macc_index << ", "
         << (s.width == SimdWidth::Double ? "double" : "single") << ", " << s.acc_var
         << ")\n";
      return;
  }
}

}  // namespace

std::string print_loop_ir(const LoopIr& ir) {
  std::ostringstream os;
  for (const auto& s : ir.stmts) print_stmt(os, *s, 0);
  return os.str();
}

}  // namespace bwc::ir
