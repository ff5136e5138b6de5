#include "bwc/interp.hpp"

namespace bwc::front {

namespace {

constexpr uint64_t kInterpFuel = 1ull << 33;  // statement budget, runaway guard

struct Env {
  std::map<std::string, int32_t> scalars;
  std::map<std::string, std::vector<int32_t>> arrays;
  // Per-cluster accumulator lanes keyed by accumulator index.
  std::map<int, std::vector<int32_t>> macc;
  int clusters = 4;
  int simd_width = 2;
  uint64_t fuel = kInterpFuel;

  void burn() {
    if (fuel-- == 0) throw EvalError("interpreter fuel exhausted");
  }

  int32_t& array_at(const std::string& name, int64_t idx) {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw EvalError("unknown array '" + name + "'");
    if (idx < 0 || idx >= static_cast<int64_t>(it->second.size()))
      throw EvalError("array '" + name + "' index " + std::to_string(idx) +
                      " out of range");
    return it->second[static_cast<size_t>(idx)];
  }
};

Env make_env(const Ast& ast, EvalState initial) {
  Env env;
  for (const Decl& d : ast.decls) {
    if (d.array_size) {
      std::vector<int32_t> data(static_cast<size_t>(*d.array_size), 0);
      auto it = initial.arrays.find(d.name);
      if (it != initial.arrays.end()) {
        if (it->second.size() > data.size())
          throw EvalError("initial contents of '" + d.name + "' exceed declared size");
        std::copy(it->second.begin(), it->second.end(), data.begin());
      }
      env.arrays[d.name] = std::move(data);
    } else {
      auto it = initial.scalars.find(d.name);
      env.scalars[d.name] = it != initial.scalars.end() ? it->second : d.init;
    }
  }
  return env;
}

EvalState finish(Env env) {
  EvalState out;
  out.scalars = std::move(env.scalars);
  out.arrays = std::move(env.arrays);
  return out;
}

// ---------- Ast evaluation ----------

int32_t eval_expr(const Expr& e, Env& env) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      return e.value;
    case Expr::Kind::Var: {
      auto it = env.scalars.find(e.name);
      if (it == env.scalars.end()) throw EvalError("unknown scalar '" + e.name + "'");
      return it->second;
    }
    case Expr::Kind::ArrayRef:
      return env.array_at(e.name, eval_expr(*e.index, env));
    case Expr::Kind::Binary: {
      int32_t l = eval_expr(*e.lhs, env);
      int32_t r = eval_expr(*e.rhs, env);
      switch (e.op) {
        case BinOp::Add: return wadd(l, r);
        case BinOp::Sub: return wsub(l, r);
        case BinOp::Mul: return wmul(l, r);
      }
    }
  }
  throw EvalError("unreachable expression kind");
}

void exec_stmt(const Stmt& s, Env& env) {
  env.burn();
  if (s.kind == Stmt::Kind::Assign) {
    int32_t v = eval_expr(*s.rhs, env);
    if (s.lhs_index) {
      env.array_at(s.lhs_name, eval_expr(*s.lhs_index, env)) = v;
    } else {
      env.scalars[s.lhs_name] = v;
    }
    return;
  }
  // Source semantics: the bound is re-evaluated every iteration. Accepted
  // programs never modify it inside the body, so this coincides with the
  // loop IR's read-once bound.
  int32_t iv = eval_expr(*s.header.init, env);
  env.scalars[s.header.var] = iv;
  for (;;) {
    env.burn();
    int32_t bound = eval_expr(*s.header.bound, env);
    int32_t cur = env.scalars[s.header.var];
    bool cont = s.header.bound_inclusive ? cur <= bound : cur < bound;
    if (!cont) break;
    for (const auto& b : s.body) exec_stmt(*b, env);
    env.scalars[s.header.var] = wadd(env.scalars[s.header.var], s.header.step);
  }
}

// ---------- LoopIr evaluation ----------

int32_t eval_ir_expr(const ir::Expr& e, Env& env);

int64_t eval_affine(const ir::Affine& a, Env& env) {
  int32_t v = a.constant;
  for (const auto& [var, coeff] : a.terms) {
    auto it = env.scalars.find(var);
    if (it == env.scalars.end()) throw EvalError("unknown scalar '" + var + "'");
    v = wadd(v, wmul(coeff, it->second));
  }
  return v;
}

int32_t eval_ir_expr(const ir::Expr& e, Env& env) {
  switch (e.kind) {
    case ir::Expr::Kind::Const:
      return e.cval;
    case ir::Expr::Kind::LoadScalar: {
      auto it = env.scalars.find(e.var);
      if (it == env.scalars.end()) throw EvalError("unknown scalar '" + e.var + "'");
      return it->second;
    }
    case ir::Expr::Kind::LoadArray:
      return env.array_at(e.array, eval_affine(e.index, env));
    case ir::Expr::Kind::Add:
      return wadd(eval_ir_expr(*e.lhs, env), eval_ir_expr(*e.rhs, env));
    case ir::Expr::Kind::Sub:
      return wsub(eval_ir_expr(*e.lhs, env), eval_ir_expr(*e.rhs, env));
    case ir::Expr::Kind::Mul:
      return wmul(eval_ir_expr(*e.lhs, env), eval_ir_expr(*e.rhs, env));
  }
  throw EvalError("unreachable IR expression kind");
}

int32_t eval_bound(const ir::Bound& b, Env& env) {
  if (b.is_const) return b.cval;
  auto it = env.scalars.find(b.var);
  if (it == env.scalars.end()) throw EvalError("unknown scalar '" + b.var + "'");
  return wadd(it->second, b.addend);
}

// Value of one SIMD operand lane; `lane` counts elements from the loop
// variable's current position.
int32_t lane_value(const ir::VecOperand& op, int lane, Env& env) {
  if (op.kind == ir::VecOperand::Kind::Const) return op.cval;
  return env.array_at(op.array, eval_affine(op.index, env) + lane);
}

void exec_ir_stmt(const ir::Stmt& s, Env& env) {
  env.burn();
  switch (s.kind) {
    case ir::Stmt::Kind::Store: {
      int32_t v = eval_ir_expr(*s.value, env);
      if (s.target.is_array) {
        env.array_at(s.target.name, eval_affine(s.target.index, env)) = v;
      } else {
        env.scalars[s.target.name] = v;
      }
      return;
    }
    case ir::Stmt::Kind::Loop: {
      int32_t lo = eval_bound(s.lower, env);
      int32_t hi = eval_bound(s.upper, env);  // read once on entry
      env.scalars[s.var] = lo;
      while (env.scalars[s.var] < hi) {
        env.burn();
        for (const auto& b : s.body) exec_ir_stmt(*b, env);
        env.scalars[s.var] = wadd(env.scalars[s.var], s.step);
      }
      return;
    }
    case ir::Stmt::Kind::MaccInit:
      env.macc[s.macc_index].assign(static_cast<size_t>(env.clusters), 0);
      return;
    case ir::Stmt::Kind::MaccUpdate: {
      int w = s.width == ir::SimdWidth::Double ? env.simd_width : 1;
      for (int k = 0; k < env.clusters; ++k) {
        if (s.width == ir::SimdWidth::Double) {
          // High lane pairs with macc_index, low lane with macc_index + 1.
          int32_t ahi = lane_value(s.op_a, w * k + 1, env);
          int32_t bhi = lane_value(s.op_b, w * k + 1, env);
          int32_t alo = lane_value(s.op_a, w * k, env);
          int32_t blo = lane_value(s.op_b, w * k, env);
          auto& hi = env.macc.at(s.macc_index);
          auto& lo = env.macc.at(s.macc_index + 1);
          hi[k] = wadd(hi[k], wmul(ahi, bhi));
          lo[k] = wadd(lo[k], wmul(alo, blo));
        } else {
          auto& lanes = env.macc.at(s.macc_index);
          lanes[k] = wadd(lanes[k], wmul(lane_value(s.op_a, k, env),
                                         lane_value(s.op_b, k, env)));
        }
      }
      return;
    }
    case ir::Stmt::Kind::MaccReduce: {
      int32_t sum = 0;
      for (int k = 0; k < env.clusters; ++k) {
        sum = wadd(sum, env.macc.at(s.macc_index)[k]);
        if (s.width == ir::SimdWidth::Double)
          sum = wadd(sum, env.macc.at(s.macc_index + 1)[k]);
      }
      env.scalars[s.acc_var] = wadd(env.scalars[s.acc_var], sum);
      return;
    }
  }
}

}  // namespace

EvalState evaluate_ast(const Ast& ast, EvalState initial) {
  if (!ast.typechecked) throw EvalError("evaluate_ast requires a typechecked program");
  Env env = make_env(ast, std::move(initial));
  for (const auto& s : ast.stmts) exec_stmt(*s, env);
  return finish(std::move(env));
}

EvalState evaluate_loop_ir(const Ast& ast, const ir::LoopIr& ir, EvalState initial,
                           int clusters, int simd_width) {
  Env env = make_env(ast, std::move(initial));
  env.clusters = clusters;
  env.simd_width = simd_width;
  for (const auto& s : ir.stmts) exec_ir_stmt(*s, env);
  return finish(std::move(env));
}

}  // namespace bwc::front
