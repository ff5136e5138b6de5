#include <map>
#include <set>

#include "bwc/frontend.hpp"

namespace bwc::front {

namespace {

struct DeclInfo {
  bool is_array = false;
  int64_t size = 0;
  int32_t init = 0;
};

class Checker {
public:
  explicit Checker(Ast& ast) : ast_(ast) {}

  void run() {
    for (const Decl& d : ast_.decls) {
      if (decls_.count(d.name))
        throw TypeMismatch("'" + d.name + "' declared more than once", d.loc);
      if (d.array_size && *d.array_size < 1)
        throw TypeMismatch("array '" + d.name + "' must have a positive size", d.loc);
      if (d.array_size && d.has_init)
        throw TypeMismatch("array '" + d.name + "' cannot take a scalar initializer", d.loc);
      decls_[d.name] = {d.array_size.has_value(), d.array_size.value_or(0), d.init};
    }
    collect_assigned(ast_.stmts);
    for (auto& s : ast_.stmts) check_stmt(*s);
    for (const Decl& d : ast_.decls)
      if (!d.array_size && !assigned_.count(d.name))
        ast_.constant_scalars.push_back(d.name);
    ast_.typechecked = true;
  }

private:
  void collect_assigned(const std::vector<StmtPtr>& stmts) {
    for (const auto& s : stmts) {
      if (s->kind == Stmt::Kind::Assign) {
        if (!s->lhs_index) assigned_.insert(s->lhs_name);
      } else {
        assigned_.insert(s->header.var);
        collect_assigned(s->body);
      }
    }
  }

  const DeclInfo& lookup(const std::string& name, SrcLoc loc) {
    auto it = decls_.find(name);
    if (it == decls_.end()) throw UndeclaredIdentifier(name, loc);
    return it->second;
  }

  void check_stmt(Stmt& s) {
    if (s.kind == Stmt::Kind::Assign) {
      const DeclInfo& d = lookup(s.lhs_name, s.loc);
      if (d.is_array && !s.lhs_index)
        throw TypeMismatch("array '" + s.lhs_name + "' assigned without an index", s.loc);
      if (!d.is_array && s.lhs_index)
        throw TypeMismatch("scalar '" + s.lhs_name + "' assigned with an index", s.loc);
      if (s.lhs_index) check_index(*s.lhs_index);
      check_expr(*s.rhs);
      if (s.compound) {
        // x (+)= e  ==>  x = x + e, so the matcher sees one canonical shape.
        ExprPtr lhs = s.lhs_index
                          ? Expr::array_ref(s.lhs_name, s.lhs_index->clone(), s.loc)
                          : Expr::var(s.lhs_name, s.loc);
        s.rhs = Expr::binary(BinOp::Add, std::move(lhs), std::move(s.rhs), s.loc);
        s.compound = false;
      }
      return;
    }
    const DeclInfo& iv = lookup(s.header.var, s.loc);
    if (iv.is_array)
      throw TypeMismatch("loop variable '" + s.header.var + "' must be a scalar", s.loc);
    check_expr(*s.header.init);
    check_expr(*s.header.bound);
    induction_.push_back(s.header.var);
    for (auto& b : s.body) check_stmt(*b);
    induction_.pop_back();
  }

  void check_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return;
      case Expr::Kind::Var:
        if (lookup(e.name, e.loc).is_array)
          throw TypeMismatch("array '" + e.name + "' used without an index", e.loc);
        return;
      case Expr::Kind::ArrayRef:
        if (!lookup(e.name, e.loc).is_array)
          throw TypeMismatch("scalar '" + e.name + "' used with an index", e.loc);
        check_index(*e.index);
        return;
      case Expr::Kind::Binary:
        check_expr(*e.lhs);
        check_expr(*e.rhs);
        return;
    }
  }

  // Index expressions must be affine in the enclosing induction variables:
  // sums/differences of const * var terms and constants. Scalars that are
  // never assigned fold to their initializer value.
  struct AffineView {
    std::map<std::string, int64_t> coeffs;
    int64_t constant = 0;
  };

  AffineView affine_of(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return {{}, e.value};
      case Expr::Kind::Var: {
        const DeclInfo& d = lookup(e.name, e.loc);
        bool is_induction = false;
        for (const auto& v : induction_)
          if (v == e.name) is_induction = true;
        if (is_induction) return {{{e.name, 1}}, 0};
        if (d.is_array)
          throw TypeMismatch("array '" + e.name + "' used without an index", e.loc);
        if (!assigned_.count(e.name)) return {{}, d.init};
        throw NonAffineIndex("'" + e.name + "' is not an induction variable or constant",
                             e.loc);
      }
      case Expr::Kind::ArrayRef:
        throw NonAffineIndex("array element inside an index expression", e.loc);
      case Expr::Kind::Binary: {
        AffineView l = affine_of(*e.lhs);
        AffineView r = affine_of(*e.rhs);
        AffineView out;
        if (e.op == BinOp::Add || e.op == BinOp::Sub) {
          int64_t sign = e.op == BinOp::Add ? 1 : -1;
          out = l;
          out.constant += sign * r.constant;
          for (const auto& [v, c] : r.coeffs) out.coeffs[v] += sign * c;
        } else {
          if (!l.coeffs.empty() && !r.coeffs.empty())
            throw NonAffineIndex("product of two induction-variable terms", e.loc);
          const AffineView& vars = l.coeffs.empty() ? r : l;
          int64_t k = l.coeffs.empty() ? l.constant : r.constant;
          out.constant = vars.constant * k;
          for (const auto& [v, c] : vars.coeffs) out.coeffs[v] = c * k;
        }
        for (auto it = out.coeffs.begin(); it != out.coeffs.end();)
          it = it->second == 0 ? out.coeffs.erase(it) : std::next(it);
        return out;
      }
    }
    return {};
  }

  void check_index(const Expr& e) { (void)affine_of(e); }

  Ast& ast_;
  std::map<std::string, DeclInfo> decls_;
  std::set<std::string> assigned_;
  std::vector<std::string> induction_;
};

}  // namespace

Ast typecheck(Ast ast) {
  Checker(ast).run();
  return ast;
}

}  // namespace bwc::front
