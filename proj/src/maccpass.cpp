#include <algorithm>
#include <set>

#include "bwc/frontend.hpp"
#include "bwc/maccpass.hpp"

namespace bwc::macc {

namespace {

bool is_leaf_operand(const ir::Expr& e) {
  return e.kind == ir::Expr::Kind::Const || e.kind == ir::Expr::Kind::LoadScalar ||
         e.kind == ir::Expr::Kind::LoadArray;
}

// True if `e` is a load of exactly the store target.
bool loads_lvalue(const ir::Expr& e, const ir::LValue& lv) {
  if (lv.is_array)
    return e.kind == ir::Expr::Kind::LoadArray && e.array == lv.name && e.index == lv.index;
  return e.kind == ir::Expr::Kind::LoadScalar && e.var == lv.name;
}

// The recognition model: the stored value is an addition, one addend is a
// multiplication of two plain operands, the other addend re-reads the store
// target. ADD operand order is canonicalized, so both orders match.
std::optional<MaccMatch> match_store(const ir::Stmt& store) {
  const ir::Expr& v = *store.value;
  if (v.kind != ir::Expr::Kind::Add) return std::nullopt;
  for (int order = 0; order < 2; ++order) {
    const ir::Expr& operand = order == 0 ? *v.lhs : *v.rhs;
    const ir::Expr& mul = order == 0 ? *v.rhs : *v.lhs;
    if (mul.kind != ir::Expr::Kind::Mul) continue;
    if (!is_leaf_operand(*mul.lhs) || !is_leaf_operand(*mul.rhs)) continue;
    if (!loads_lvalue(operand, store.target)) continue;
    MaccMatch m;
    m.store_id = store.id;
    m.accumulator = store.target;
    m.mul_lhs = mul.lhs.get();
    m.mul_rhs = mul.rhs.get();
    return m;
  }
  return std::nullopt;
}

bool operand_vectorizable(const ir::Expr& e, const std::string& loop_var, int32_t step) {
  if (e.kind == ir::Expr::Kind::Const) return true;
  if (e.kind != ir::Expr::Kind::LoadArray) return false;
  // Distributed loads read consecutive ascending words: the element stride
  // per source iteration must be exactly one.
  return e.index.coeff_of(loop_var) == 1 && step == 1;
}

ir::VecOperand vec_operand(const ir::Expr& e) {
  ir::VecOperand op;
  if (e.kind == ir::Expr::Kind::Const) {
    op.kind = ir::VecOperand::Kind::Const;
    op.cval = e.cval;
  } else {
    op.kind = ir::VecOperand::Kind::Array;
    op.array = e.array;
    op.index = e.index;
  }
  return op;
}

ir::StmtPtr make_loop(const std::string& var, int64_t lo, int64_t hi, int32_t step,
                      int depth) {
  auto s = std::make_unique<ir::Stmt>();
  s->kind = ir::Stmt::Kind::Loop;
  s->var = var;
  s->lower = {true, static_cast<int32_t>(lo), "", 0};
  s->upper = {true, static_cast<int32_t>(hi), "", 0};
  s->step = step;
  s->depth = depth;
  return s;
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::None: return "none";
    case Mode::ScalarMacc: return "scalar_macc";
    case Mode::SimdSingleWord: return "simd_single_word";
    case Mode::SimdDoubleWord: return "simd_double_word";
  }
  return "?";
}

std::vector<MaccMatch> find_macc_patterns(const ir::LoopRef& loop, const ir::LoopIr& ir) {
  (void)ir;
  std::vector<MaccMatch> out;
  for (const auto& s : loop.loop->body) {
    if (s->kind != ir::Stmt::Kind::Store) continue;
    if (auto m = match_store(*s)) out.push_back(*m);
  }
  return out;
}

ModeDecision check_macc_resources(const std::vector<MaccMatch>& matches,
                                  const mdesc::MachineDesc& desc) {
  ModeDecision d;
  int m = static_cast<int>(matches.size());
  if (m == 0) return d;
  int budget = desc.macc_regs_per_cluster;
  bool dual = desc.simd_width_per_cluster == 2;
  if (dual && 2 * m <= budget) {
    d.mode = Mode::SimdDoubleWord;
    d.vector_factor = desc.cluster_count() * desc.simd_width_per_cluster;
    d.macc_regs_used = 2 * m;
  } else if (m <= budget) {
    d.mode = Mode::SimdSingleWord;
    d.vector_factor = desc.cluster_count();
    d.macc_regs_used = m;
  } else {
    // Over the accumulator register budget: synthesis is abandoned.
    return d;
  }
  for (size_t i = 0; i < matches.size(); ++i) d.matches_accepted.push_back(i);
  return d;
}

RewrittenLoop rewrite_macc(const ir::LoopRef& loop, const ModeDecision& decision,
                           const ir::LoopIr& ir) {
  (void)ir;
  if (decision.mode != Mode::SimdSingleWord && decision.mode != Mode::SimdDoubleWord)
    throw RewriteUnsupported("rewrite requires a SIMD mode decision");
  const ir::Stmt& l = *loop.loop;
  if (!l.lower.is_const || !l.upper.is_const)
    throw RewriteUnsupported("vectorization requires compile-time loop bounds");
  if (l.step != 1) throw RewriteUnsupported("vectorization requires unit loop step");

  std::vector<MaccMatch> matches = find_macc_patterns(loop, ir);
  std::vector<const MaccMatch*> accepted;
  for (size_t idx : decision.matches_accepted) accepted.push_back(&matches.at(idx));
  std::set<std::string> acc_names;
  for (const MaccMatch* m : accepted) {
    if (m->accumulator.is_array)
      throw RewriteUnsupported("accumulator '" + m->accumulator.name +
                               "' is an array element");
    acc_names.insert(m->accumulator.name);
  }
  for (const MaccMatch* m : accepted) {
    if (m->mul_lhs->reads_scalar(m->accumulator.name) ||
        m->mul_rhs->reads_scalar(m->accumulator.name))
      throw RewriteUnsupported("multiply operand reads the accumulator");
    for (const auto& name : acc_names)
      if (m->mul_lhs->reads_scalar(name) || m->mul_rhs->reads_scalar(name))
        throw RewriteUnsupported("multiply operand reads a rewritten accumulator");
    if (!operand_vectorizable(*m->mul_lhs, l.var, l.step) ||
        !operand_vectorizable(*m->mul_rhs, l.var, l.step))
      throw RewriteUnsupported("multiply operand is not unit-stride or constant");
  }

  bool dual = decision.mode == Mode::SimdDoubleWord;
  ir::SimdWidth width = dual ? ir::SimdWidth::Double : ir::SimdWidth::Single;
  int regs_per_match = dual ? 2 : 1;
  int64_t lo = l.lower.cval;
  int64_t hi = l.upper.cval;
  int64_t trips = hi <= lo ? 0 : hi - lo;  // unit step
  int64_t factor = decision.vector_factor;
  int64_t main_trips = trips / factor;
  int64_t tail_trips = trips % factor;

  RewrittenLoop out;
  for (size_t j = 0; j < accepted.size(); ++j) {
    for (int r = 0; r < regs_per_match; ++r) {
      auto init = std::make_unique<ir::Stmt>();
      init->kind = ir::Stmt::Kind::MaccInit;
      init->macc_index = static_cast<int>(j) * regs_per_match + r;
      out.prologue.push_back(std::move(init));
    }
  }

  if (main_trips > 0) {
    out.main_loop = make_loop(l.var, lo, lo + main_trips * factor,
                              static_cast<int32_t>(factor), l.depth);
    for (size_t j = 0; j < accepted.size(); ++j) {
      auto upd = std::make_unique<ir::Stmt>();
      upd->kind = ir::Stmt::Kind::MaccUpdate;
      upd->macc_index = static_cast<int>(j) * regs_per_match;
      upd->width = width;
      upd->op_a = vec_operand(*accepted[j]->mul_lhs);
      upd->op_b = vec_operand(*accepted[j]->mul_rhs);
      out.main_loop->body.push_back(std::move(upd));
    }
  }

  // The scalar tail covers trips not divisible by the vector factor. An
  // empty loop is still emitted when the whole loop vanishes so that the
  // induction variable gets its entry value.
  if (tail_trips > 0 || main_trips == 0) {
    out.remainder_loop = make_loop(l.var, lo + main_trips * factor, hi, 1, l.depth);
    out.remainder_loop->is_remainder = true;
    for (const auto& s : l.body) out.remainder_loop->body.push_back(s->clone());
  }

  for (size_t j = 0; j < accepted.size(); ++j) {
    auto red = std::make_unique<ir::Stmt>();
    red->kind = ir::Stmt::Kind::MaccReduce;
    red->macc_index = static_cast<int>(j) * regs_per_match;
    red->width = width;
    red->acc_var = accepted[j]->accumulator.name;
    out.epilogue.push_back(std::move(red));
  }
  return out;
}

namespace {

// A loop is rewritten only when every statement in its body is an accepted
// accumulate pattern the hardware can lane-split.
bool loop_rewritable(const ir::LoopRef& ref, const std::vector<MaccMatch>& matches) {
  const ir::Stmt& l = *ref.loop;
  if (!l.lower.is_const || !l.upper.is_const || l.step != 1) return false;
  if (matches.empty()) return false;
  std::set<int> matched_ids;
  std::set<std::string> acc_names;
  for (const auto& m : matches) {
    matched_ids.insert(m.store_id);
    if (m.accumulator.is_array) return false;
    acc_names.insert(m.accumulator.name);
  }
  for (const auto& s : l.body) {
    if (s->kind != ir::Stmt::Kind::Store || !matched_ids.count(s->id)) return false;
  }
  for (const auto& m : matches) {
    for (const auto& name : acc_names)
      if (m.mul_lhs->reads_scalar(name) || m.mul_rhs->reads_scalar(name)) return false;
    if (!operand_vectorizable(*m.mul_lhs, l.var, l.step) ||
        !operand_vectorizable(*m.mul_rhs, l.var, l.step))
      return false;
  }
  return true;
}

}  // namespace

ir::LoopIr run_macc_pass(const ir::LoopIr& ir, const mdesc::MachineDesc& desc,
                         std::vector<ModeDecision>* decisions) {
  ir::LoopIr out = ir.clone();
  std::vector<ir::LoopRef> loops = front::innermost_loops(out);
  std::vector<ModeDecision> decs(loops.size());

  // Splice back to front so earlier paths stay valid.
  for (size_t n = loops.size(); n-- > 0;) {
    const ir::LoopRef& ref = loops[n];
    std::vector<MaccMatch> matches = find_macc_patterns(ref, out);
    if (!loop_rewritable(ref, matches)) continue;
    ModeDecision d = check_macc_resources(matches, desc);
    decs[n] = d;
    if (d.mode != Mode::SimdSingleWord && d.mode != Mode::SimdDoubleWord) continue;
    RewrittenLoop rl = rewrite_macc(ref, d, out);

    std::vector<ir::StmtPtr>* parent = &out.stmts;
    for (size_t i = 0; i + 1 < ref.path.size(); ++i)
      parent = &(*parent)[ref.path[i]]->body;
    size_t pos = ref.path.back();

    std::vector<ir::StmtPtr> replacement;
    for (auto& s : rl.prologue) replacement.push_back(std::move(s));
    if (rl.main_loop) replacement.push_back(std::move(rl.main_loop));
    if (rl.remainder_loop) replacement.push_back(std::move(rl.remainder_loop));
    for (auto& s : rl.epilogue) replacement.push_back(std::move(s));

    parent->erase(parent->begin() + static_cast<long>(pos));
    parent->insert(parent->begin() + static_cast<long>(pos),
                   std::make_move_iterator(replacement.begin()),
                   std::make_move_iterator(replacement.end()));
  }
  if (decisions) *decisions = std::move(decs);
  return out;
}

}  // namespace bwc::macc
