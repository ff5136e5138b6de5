#include <map>
#include <set>

#include "bwc/frontend.hpp"

namespace bwc::front {

namespace {

class Builder {
public:
  explicit Builder(const Ast& ast) : ast_(ast) {
    for (const std::string& n : ast.constant_scalars) {
      for (const Decl& d : ast.decls)
        if (d.name == n) constants_[n] = d.init;
    }
  }

  ir::LoopIr run() {
    ir::LoopIr out;
    for (const auto& s : ast_.stmts) out.stmts.push_back(build_stmt(*s, 0));
    return out;
  }

private:
  ir::Affine affine_of(const Expr& e) {
    // Typecheck already validated the shape; this re-derives the canonical form.
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return {e.value, {}};
      case Expr::Kind::Var: {
        auto c = constants_.find(e.name);
        if (c != constants_.end()) return {c->second, {}};
        ir::Affine a;
        a.terms.push_back({e.name, 1});
        return a;
      }
      case Expr::Kind::Binary: {
        ir::Affine l = affine_of(*e.lhs);
        ir::Affine r = affine_of(*e.rhs);
        std::map<std::string, int64_t> coeffs;
        int64_t constant = 0;
        auto acc = [&](const ir::Affine& a, int64_t sign) {
          constant += sign * a.constant;
          for (const auto& [v, c] : a.terms) coeffs[v] += sign * c;
        };
        if (e.op == BinOp::Add) {
          acc(l, 1);
          acc(r, 1);
        } else if (e.op == BinOp::Sub) {
          acc(l, 1);
          acc(r, -1);
        } else {
          const ir::Affine& vars = l.terms.empty() ? r : l;
          int64_t k = l.terms.empty() ? l.constant : r.constant;
          constant = vars.constant * k;
          for (const auto& [v, c] : vars.terms) coeffs[v] = c * k;
        }
        ir::Affine out;
        out.constant = static_cast<int32_t>(constant);
        for (const auto& [v, c] : coeffs)
          if (c != 0) out.terms.push_back({v, static_cast<int32_t>(c)});
        return out;
      }
      default:
        throw UnsupportedLoopForm("array element inside an index expression", e.loc);
    }
  }

  ir::ExprPtr build_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return ir::Expr::make_const(e.value);
      case Expr::Kind::Var: {
        auto c = constants_.find(e.name);
        if (c != constants_.end()) return ir::Expr::make_const(c->second);
        return ir::Expr::load_scalar(e.name);
      }
      case Expr::Kind::ArrayRef:
        return ir::Expr::load_array(e.name, affine_of(*e.index));
      case Expr::Kind::Binary: {
        ir::ExprPtr l = build_expr(*e.lhs);
        ir::ExprPtr r = build_expr(*e.rhs);
        ir::Expr::Kind k = e.op == BinOp::Add   ? ir::Expr::Kind::Add
                           : e.op == BinOp::Sub ? ir::Expr::Kind::Sub
                                                : ir::Expr::Kind::Mul;
        if (l->kind == ir::Expr::Kind::Const && r->kind == ir::Expr::Kind::Const) {
          int32_t v = k == ir::Expr::Kind::Add   ? wadd(l->cval, r->cval)
                      : k == ir::Expr::Kind::Sub ? wsub(l->cval, r->cval)
                                                 : wmul(l->cval, r->cval);
          return ir::Expr::make_const(v);
        }
        return ir::Expr::binary(k, std::move(l), std::move(r));
      }
    }
    throw UnsupportedLoopForm("unreachable expression kind");
  }

  ir::Bound build_bound(const Expr& e, int32_t addend, SrcLoc loc) {
    ir::ExprPtr v = build_expr(e);
    if (v->kind == ir::Expr::Kind::Const)
      return {true, wadd(v->cval, addend), "", 0};
    if (v->kind == ir::Expr::Kind::LoadScalar)
      return {false, 0, v->var, addend};
    throw UnsupportedLoopForm(
        "loop bounds must be integer constants or scalar variables", loc);
  }

  void reject_writes_to(const std::vector<StmtPtr>& body, const std::string& name,
                        const char* what) {
    for (const auto& s : body) {
      if (s->kind == Stmt::Kind::Assign) {
        if (!s->lhs_index && s->lhs_name == name)
          throw UnsupportedLoopForm(std::string(what) + " '" + name +
                                    "' is modified inside the loop body");
      } else {
        if (s->header.var == name)
          throw UnsupportedLoopForm(std::string(what) + " '" + name +
                                    "' is reused by a nested loop");
        reject_writes_to(s->body, name, what);
      }
    }
  }

  ir::StmtPtr build_stmt(const Stmt& s, int depth) {
    auto out = std::make_unique<ir::Stmt>();
    out->id = next_id_++;
    if (s.kind == Stmt::Kind::Assign) {
      out->kind = ir::Stmt::Kind::Store;
      out->target.is_array = static_cast<bool>(s.lhs_index);
      out->target.name = s.lhs_name;
      if (s.lhs_index) out->target.index = affine_of(*s.lhs_index);
      out->value = build_expr(*s.rhs);
      return out;
    }
    out->kind = ir::Stmt::Kind::Loop;
    out->var = s.header.var;
    out->depth = depth + 1;
    if (s.header.step < 1)
      throw UnsupportedLoopForm("loop step must be a positive constant", s.loc);
    out->step = s.header.step;
    if (constants_.count(s.header.var))
      throw UnsupportedLoopForm("loop variable '" + s.header.var +
                                "' folded as a constant");
    out->lower = build_bound(*s.header.init, 0, s.loc);
    out->upper = build_bound(*s.header.bound, s.header.bound_inclusive ? 1 : 0, s.loc);
    reject_writes_to(s.body, s.header.var, "induction variable");
    if (!out->upper.is_const) reject_writes_to(s.body, out->upper.var, "loop bound");
    if (!out->lower.is_const) reject_writes_to(s.body, out->lower.var, "loop bound");
    for (const auto& b : s.body) out->body.push_back(build_stmt(*b, depth + 1));
    return out;
  }

  const Ast& ast_;
  std::map<std::string, int32_t> constants_;
  int next_id_ = 1;
};

bool contains_loop(const std::vector<ir::StmtPtr>& body) {
  for (const auto& s : body)
    if (s->kind == ir::Stmt::Kind::Loop) return true;
  return false;
}

void collect_loops(const std::vector<ir::StmtPtr>& stmts, std::vector<size_t>& path,
                   std::vector<ir::LoopRef>& out) {
  for (size_t i = 0; i < stmts.size(); ++i) {
    const ir::Stmt& s = *stmts[i];
    if (s.kind != ir::Stmt::Kind::Loop) continue;
    path.push_back(i);
    if (!contains_loop(s.body)) {
      ir::LoopRef ref;
      ref.path = path;
      ref.loop = &s;
      ref.depth = s.depth;
      ref.innermost = true;
      if (s.lower.is_const && s.upper.is_const) {
        int64_t lo = s.lower.cval;
        int64_t hi = s.upper.cval;
        int64_t trips = hi <= lo ? 0 : (hi - lo + s.step - 1) / s.step;
        ref.trip_count = trips;
      }
      out.push_back(std::move(ref));
    } else {
      collect_loops(s.body, path, out);
    }
    path.pop_back();
  }
}

}  // namespace

ir::LoopIr build_loop_ir(const Ast& ast) {
  if (!ast.typechecked)
    throw UnsupportedLoopForm("loop IR construction requires a typechecked program");
  return Builder(ast).run();
}

std::vector<ir::LoopRef> innermost_loops(const ir::LoopIr& ir) {
  std::vector<ir::LoopRef> out;
  std::vector<size_t> path;
  collect_loops(ir.stmts, path, out);
  return out;
}

}  // namespace bwc::front
