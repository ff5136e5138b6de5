#include <cassert>
#include <map>

#include "bwc/codegen.hpp"

namespace bwc::cg {

namespace {

std::string mangle(const std::string& var) { return "__" + var; }

struct Stream {
  std::string array;
  ir::Affine affine;      // full index form, loop variable term included
  bool distributed = false;
  bool dual = false;
  int32_t stride = 0;     // elements per iteration
  int ureg = -1;
};

class Annotator {
public:
  Annotator(const front::Ast& ast, const ir::LoopIr& ir, const mdesc::MachineDesc& desc)
      : ast_(ast), ir_(ir), desc_(desc) {}

  CgirFunction run() {
    f_.general_regs = desc_.general_regs_per_cluster;
    f_.macc_regs = desc_.macc_regs_per_cluster;
    f_.addr_regs = desc_.address_regs;
    build_layout();
    new_block("entry");
    for (const auto& d : ast_.decls) {
      if (d.array_size) continue;
      int v = f_.new_vreg(RegClass::General);
      scalar_vreg_[d.name] = v;
      emit_move_imm(v, d.init);
    }
    lower_stmts(ir_.stmts);
    emit_writebacks();
    return std::move(f_);
  }

private:
  // ---- blocks and labels ----

  std::string fresh_label() {
    int n = label_counter_++;
    return "_Lt_" + std::to_string(n) + "_" + std::to_string(770 + 256 * n);
  }

  void new_block(const std::string& role, std::string label = "") {
    Block b;
    b.id = static_cast<int>(f_.blocks.size());
    b.label = label.empty() ? fresh_label() : std::move(label);
    b.role = role;
    b.loop_depth = static_cast<int>(loops_.size());
    cur_ = b.id;
    f_.blocks.push_back(std::move(b));
    block_zero_vreg_ = -1;
  }

  Block& cur() { return f_.blocks[static_cast<size_t>(cur_)]; }

  CgirOp& emit(CgirOp op) {
    cur().ops.push_back(std::move(op));
    return cur().ops.back();
  }

  // ---- small op factories ----

  Reg vr(int id, bool pair = false, int half = -1) {
    Reg r;
    r.cls = f_.vregs[static_cast<size_t>(id)].cls;
    r.id = id;
    r.pair = pair;
    r.half = half;
    return r;
  }

  void emit_move_imm(int dst, int32_t value) {
    CgirOp op;
    op.cls = OpClass::MoveImm;
    op.dst = vr(dst);
    op.imm = value;
    emit(op);
  }

  void emit_move_reg(int dst, int src) {
    CgirOp op;
    op.cls = OpClass::MoveReg;
    op.dst = vr(dst);
    op.src1 = vr(src);
    emit(op);
  }

  void emit_arith(OpClass cls, int dst, Reg a, Reg b) {
    CgirOp op;
    op.cls = cls;
    op.dst = vr(dst);
    op.src1 = a;
    op.src2 = b;
    emit(op);
  }

  // Zero register shared by consecutive accumulator initializations in the
  // same block.
  int block_zero(bool broadcast) {
    if (block_zero_vreg_ < 0) {
      block_zero_vreg_ = f_.new_vreg(RegClass::General, false, broadcast);
      emit_move_imm(block_zero_vreg_, 0);
    }
    return block_zero_vreg_;
  }

  // ---- data layout ----

  void build_layout() {
    int64_t addr = 0;
    for (const auto& d : ast_.decls) {
      SymbolInfo s;
      s.sym = mangle(d.name);
      s.var = d.name;
      s.addr = addr;
      s.words = d.array_size.value_or(1);
      s.is_array = d.array_size.has_value();
      addr += s.words;
      f_.layout.push_back(std::move(s));
    }
  }

  int scalar_vreg(const std::string& name) {
    auto it = scalar_vreg_.find(name);
    if (it == scalar_vreg_.end()) throw UnsupportedNode("no register for '" + name + "'");
    return it->second;
  }

  int alloc_ureg() {
    if (next_ureg_ >= desc_.address_regs)
      throw AllocationOverflow("address registers exhausted (" +
                               std::to_string(desc_.address_regs) + " available)");
    return next_ureg_++;
  }

  int scratch_ureg() {
    if (scratch_ureg_ < 0) scratch_ureg_ = alloc_ureg();
    return scratch_ureg_;
  }

  // ---- loop context and memory streams ----

  struct LoopCtx {
    const ir::Stmt* loop;
    std::vector<Stream> streams;
  };

  Stream* find_stream(const std::string& array, const ir::Affine& affine) {
    for (auto it = loops_.rbegin(); it != loops_.rend(); ++it)
      for (auto& s : it->streams)
        if (s.array == array && s.affine == affine) return &s;
    return nullptr;
  }

  // Collects the address streams used directly by a loop body (nested loops
  // manage their own) before any body op is emitted, so the preheader can
  // set up the address registers in first-use order.
  void scan_streams(const std::vector<ir::StmtPtr>& body, const ir::Stmt& loop,
                    LoopCtx& ctx) {
    auto add = [&](const std::string& array, const ir::Affine& affine, bool distributed,
                   bool dual) {
      for (const auto& s : ctx.streams)
        if (s.array == array && s.affine == affine) return;
      // References bound to an enclosing loop's stream stay with it.
      if (affine.coeff_of(loop.var) == 0 && find_stream(array, affine)) return;
      Stream s;
      s.array = array;
      s.affine = affine;
      s.distributed = distributed;
      s.dual = dual;
      s.stride = wmul(affine.coeff_of(loop.var), loop.step);
      ctx.streams.push_back(std::move(s));
    };
    auto scan_expr = [&](const ir::Expr& e, auto&& self) -> void {
      if (e.kind == ir::Expr::Kind::LoadArray) {
        add(e.array, e.index, false, false);
        return;
      }
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
    };
    for (const auto& st : body) {
      switch (st->kind) {
        case ir::Stmt::Kind::Store:
          scan_expr(*st->value, scan_expr);
          if (st->target.is_array) add(st->target.name, st->target.index, false, false);
          break;
        case ir::Stmt::Kind::MaccUpdate: {
          bool dual = st->width == ir::SimdWidth::Double;
          if (st->op_a.kind == ir::VecOperand::Kind::Array)
            add(st->op_a.array, st->op_a.index, true, dual);
          if (st->op_b.kind == ir::VecOperand::Kind::Array)
            add(st->op_b.array, st->op_b.index, true, dual);
          break;
        }
        default:
          break;
      }
    }
  }

  // Computes the address-register value of a stream at loop entry:
  // symbol + affine(outer vars, loop var = lower bound).
  void emit_stream_setup(Stream& s, const ir::Stmt& loop) {
    s.ureg = alloc_ureg();
    ir::Affine base = s.affine.without(loop.var);
    int32_t coeff = s.affine.coeff_of(loop.var);
    int64_t const_part = base.constant;
    if (loop.lower.is_const) {
      const_part += static_cast<int64_t>(coeff) * loop.lower.cval;
    }
    Reg acc;  // invalid until a variable term appears
    auto accumulate = [&](Reg term) {
      if (!acc.valid()) {
        acc = term;
        return;
      }
      int sum = f_.new_vreg(RegClass::General);
      emit_arith(OpClass::Add, sum, acc, term);
      acc = vr(sum);
    };
    for (const auto& [var, c] : base.terms) {
      Reg tv = vr(scalar_vreg(var));
      if (c == 1) {
        accumulate(tv);
      } else {
        int cv = f_.new_vreg(RegClass::General);
        emit_move_imm(cv, c);
        int prod = f_.new_vreg(RegClass::General);
        emit_arith(OpClass::Mul, prod, tv, vr(cv));
        accumulate(vr(prod));
      }
    }
    if (!loop.lower.is_const && coeff != 0) {
      Reg lov = vr(scalar_vreg(loop.lower.var));
      if (coeff == 1) {
        accumulate(lov);
      } else {
        int cv = f_.new_vreg(RegClass::General);
        emit_move_imm(cv, coeff);
        int prod = f_.new_vreg(RegClass::General);
        emit_arith(OpClass::Mul, prod, lov, vr(cv));
        accumulate(vr(prod));
      }
    }
    if (acc.valid() && const_part != 0) {
      int cv = f_.new_vreg(RegClass::General);
      emit_move_imm(cv, static_cast<int32_t>(const_part));
      int sum = f_.new_vreg(RegClass::General);
      emit_arith(OpClass::Add, sum, acc, vr(cv));
      acc = vr(sum);
      const_part = 0;
    }
    CgirOp op;
    op.cls = OpClass::AddrMove;
    op.addr_dst = s.ureg;
    op.addr.sym = mangle(s.array);
    op.addr.offset = static_cast<int32_t>(const_part);
    op.addr.reg = acc;
    emit(op);
  }

  // ---- expressions ----

  MemRef stream_access(Stream& s) {
    MemRef m;
    m.ureg = s.ureg;
    m.distributed = s.distributed;
    if (s.stride == 0) {
      m.postinc = false;
      m.amount = 0;
    } else {
      m.postinc = true;
      m.amount = s.stride;
    }
    return m;
  }

  // Loads one array element; scalar access path.
  Reg lower_array_load(const std::string& array, const ir::Affine& affine, int hint) {
    int dst = hint >= 0 ? hint : f_.new_vreg(RegClass::General);
    CgirOp op;
    op.cls = OpClass::LoadWord;
    op.dst = vr(dst);
    if (Stream* s = find_stream(array, affine)) {
      op.mem = stream_access(*s);
    } else {
      if (!affine.is_constant())
        throw UnsupportedNode("array reference outside its loop context");
      int u = scratch_ureg();
      CgirOp am;
      am.cls = OpClass::AddrMove;
      am.addr_dst = u;
      am.addr.sym = mangle(array);
      emit(am);
      op.mem = {u, affine.constant, false, false};
    }
    emit(op);
    return vr(dst);
  }

  // Evaluates an IR expression; when hint >= 0 the result is produced in
  // that register.
  Reg lower_expr(const ir::Expr& e, int hint = -1) {
    switch (e.kind) {
      case ir::Expr::Kind::Const: {
        int dst = hint >= 0 ? hint : f_.new_vreg(RegClass::General);
        emit_move_imm(dst, e.cval);
        return vr(dst);
      }
      case ir::Expr::Kind::LoadScalar: {
        int v = scalar_vreg(e.var);
        if (hint >= 0 && hint != v) {
          emit_move_reg(hint, v);
          return vr(hint);
        }
        return vr(v);
      }
      case ir::Expr::Kind::LoadArray:
        return lower_array_load(e.array, e.index, hint);
      case ir::Expr::Kind::Add:
      case ir::Expr::Kind::Sub:
      case ir::Expr::Kind::Mul: {
        Reg a = lower_expr(*e.lhs);
        Reg b = lower_expr(*e.rhs);
        OpClass cls = e.kind == ir::Expr::Kind::Add   ? OpClass::Add
                      : e.kind == ir::Expr::Kind::Sub ? OpClass::Sub
                                                      : OpClass::Mul;
        int dst = hint >= 0 ? hint : f_.new_vreg(RegClass::General);
        emit_arith(cls, dst, a, b);
        return vr(dst);
      }
    }
    throw UnsupportedNode("unreachable expression kind");
  }

  // ---- statements ----

  void lower_stmts(const std::vector<ir::StmtPtr>& stmts) {
    for (const auto& s : stmts) lower_stmt(*s);
  }

  void lower_stmt(const ir::Stmt& s) {
    switch (s.kind) {
      case ir::Stmt::Kind::Store:
        lower_store(s);
        return;
      case ir::Stmt::Kind::Loop:
        lower_loop(s);
        return;
      case ir::Stmt::Kind::MaccInit:
        lower_macc_init(s);
        return;
      case ir::Stmt::Kind::MaccUpdate:
        lower_macc_update(s);
        return;
      case ir::Stmt::Kind::MaccReduce:
        lower_macc_reduce(s);
        return;
    }
    throw UnsupportedNode("unknown statement kind");
  }

  void lower_store(const ir::Stmt& s) {
    if (!s.target.is_array) {
      int dst = scalar_vreg(s.target.name);
      Reg r = lower_expr(*s.value, dst);
      (void)r;
      return;
    }
    Reg v = lower_expr(*s.value);
    CgirOp op;
    op.cls = OpClass::StoreWord;
    op.src1 = v;
    if (Stream* st = find_stream(s.target.name, s.target.index)) {
      op.mem = stream_access(*st);
    } else {
      if (!s.target.index.is_constant())
        throw UnsupportedNode("array store outside its loop context");
      int u = scratch_ureg();
      CgirOp am;
      am.cls = OpClass::AddrMove;
      am.addr_dst = u;
      am.addr.sym = mangle(s.target.name);
      emit(am);
      op.mem = {u, s.target.index.constant, false, false};
    }
    emit(op);
  }

  void lower_loop(const ir::Stmt& loop) {
    std::optional<int64_t> trips;
    if (loop.lower.is_const && loop.upper.is_const) {
      int64_t lo = loop.lower.cval, hi = loop.upper.cval;
      trips = hi <= lo ? 0 : (hi - lo + loop.step - 1) / loop.step;
    }

    // Preheader: address streams, then the counter.
    loops_.push_back({&loop, {}});
    scan_streams(loop.body, loop, loops_.back());
    int ivreg = scalar_vreg(loop.var);
    if (trips && *trips == 0) {
      loops_.pop_back();
      if (loop.lower.is_const) {
        emit_move_imm(ivreg, loop.lower.cval);
      } else {
        emit_move_reg(ivreg, scalar_vreg(loop.lower.var));
      }
      return;  // body provably never runs
    }
    for (auto& st : loops_.back().streams) emit_stream_setup(st, loop);
    if (loop.lower.is_const) {
      emit_move_imm(ivreg, loop.lower.cval);
    } else {
      emit_move_reg(ivreg, scalar_vreg(loop.lower.var));
    }

    // Runtime trip counts get an entry guard; constant ones are rotated
    // directly into a bottom-tested loop.
    Reg bound_reg;
    std::string after_label = fresh_label();
    if (!trips) {
      int hv = scalar_vreg(loop.upper.var);
      if (loop.upper.addend != 0) {
        int av = f_.new_vreg(RegClass::General);
        emit_move_imm(av, loop.upper.addend);
        int sum = f_.new_vreg(RegClass::General);
        emit_arith(OpClass::Add, sum, vr(hv), vr(av));
        bound_reg = vr(sum);
      } else {
        bound_reg = vr(hv);
      }
      CgirOp guard;
      guard.cls = OpClass::BranchCond;
      guard.cond = Cond::Ge;  // skip the loop when counter >= bound
      guard.src1 = vr(ivreg);
      guard.src2 = bound_reg;
      guard.target = after_label;
      emit(guard);
    }

    std::string role = loop.is_remainder ? "remainder" : "loop";
    for (const auto& b : loop.body)
      if (b->kind == ir::Stmt::Kind::MaccUpdate) role = "vec_loop";
    new_block(role);
    std::string body_label = cur().label;
    lower_stmts(loop.body);

    // Bottom control: counter advance plus the loop-back branch. The step
    // and limit constants ride inside the body like the published listings.
    int stepv = f_.new_vreg(RegClass::General);
    emit_move_imm(stepv, loop.step);
    CgirOp branch;
    branch.cls = OpClass::BranchCond;
    branch.target = body_label;
    if (trips) {
      int64_t lo = loop.lower.cval;
      int limitv = f_.new_vreg(RegClass::General);
      if (loop.step == 1) {
        // Counter runs lo+1..lo+T; continue while it differs from the exit
        // value.
        emit_move_imm(limitv, static_cast<int32_t>(lo + *trips));
        branch.cond = Cond::Ne;
        branch.src1 = vr(ivreg);
        branch.src2 = vr(limitv);
      } else {
        // Continue while limit >= counter, limit = upper-1.
        emit_move_imm(limitv, wsub(loop.upper.cval, 1));
        branch.cond = Cond::Ge;
        branch.src1 = vr(limitv);
        branch.src2 = vr(ivreg);
      }
      emit_arith(OpClass::Add, ivreg, vr(ivreg), vr(stepv));
    } else {
      emit_arith(OpClass::Add, ivreg, vr(ivreg), vr(stepv));
      branch.cond = Cond::Lt;
      branch.src1 = vr(ivreg);
      branch.src2 = bound_reg;
    }
    emit(branch);
    loops_.pop_back();
    new_block("cont", after_label);
  }

  void lower_macc_init(const ir::Stmt& s) {
    int z = block_zero(true);
    int mv = f_.new_vreg(RegClass::Macc, false, true);
    macc_vreg_[s.macc_index] = mv;
    CgirOp op;
    op.cls = OpClass::MaccInit;
    op.dst = vr(mv);
    op.src1 = vr(z);
    emit(op);
  }

  int macc_vreg(int index) {
    auto it = macc_vreg_.find(index);
    if (it == macc_vreg_.end())
      throw UnsupportedNode("accumulate uses an uninitialized lane register");
    return it->second;
  }

  // Loads one vector operand; returns (lo half, hi half) register views.
  std::pair<Reg, Reg> lower_vec_operand(const ir::VecOperand& op, bool dual) {
    if (op.kind == ir::VecOperand::Kind::Const) {
      int v = f_.new_vreg(RegClass::General, false, true);
      emit_move_imm(v, op.cval);
      return {vr(v), vr(v)};
    }
    Stream* s = find_stream(op.array, op.index);
    if (!s) throw UnsupportedNode("vector operand has no address stream");
    if (dual) {
      int pairv = f_.new_vreg(RegClass::General, true, true);
      CgirOp load;
      load.cls = OpClass::LoadDual;
      load.dst = vr(pairv, true);
      load.mem = stream_access(*s);
      emit(load);
      return {vr(pairv, false, 0), vr(pairv, false, 1)};
    }
    int v = f_.new_vreg(RegClass::General, false, true);
    CgirOp load;
    load.cls = OpClass::LoadWord;
    load.dst = vr(v);
    load.mem = stream_access(*s);
    emit(load);
    return {vr(v), vr(v)};
  }

  void lower_macc_update(const ir::Stmt& s) {
    bool dual = s.width == ir::SimdWidth::Double;
    auto [alo, ahi] = lower_vec_operand(s.op_a, dual);
    auto [blo, bhi] = lower_vec_operand(s.op_b, dual);
    auto emit_macc = [&](int mv, Reg a, Reg b) {
      CgirOp op;
      op.cls = OpClass::Macc;
      op.dst = vr(mv);
      op.src1 = a;
      op.src2 = b;
      emit(op);
    };
    if (dual) {
      // High lanes feed the first accumulator, low lanes the second, the
      // order the published listing uses.
      emit_macc(macc_vreg(s.macc_index), ahi, bhi);
      emit_macc(macc_vreg(s.macc_index + 1), alo, blo);
    } else {
      emit_macc(macc_vreg(s.macc_index), alo, blo);
    }
  }

  void lower_macc_reduce(const ir::Stmt& s) {
    bool dual = s.width == ir::SimdWidth::Double;
    auto read_macc = [&](int index) {
      int v = f_.new_vreg(RegClass::General, false, true);
      CgirOp op;
      op.cls = OpClass::MaccRead;
      op.dst = vr(v);
      op.src1 = vr(macc_vreg(index));
      emit(op);
      return v;
    };
    int hi = read_macc(s.macc_index);
    int folded = hi;
    if (dual) {
      int lo = read_macc(s.macc_index + 1);
      folded = f_.new_vreg(RegClass::General, false, true);
      emit_arith(OpClass::Add, folded, vr(hi), vr(lo));
    }
    int sig = f_.new_vreg(RegClass::General);
    CgirOp sop;
    sop.cls = OpClass::Sigma;
    sop.dst = vr(sig);
    sop.src1 = vr(folded);
    emit(sop);
    int acc = scalar_vreg(s.acc_var);
    emit_arith(OpClass::Add, acc, vr(acc), vr(sig));
  }

  void emit_writebacks() {
    if (cur().role != "entry") cur().role = "exit";
    for (const auto& d : ast_.decls) {
      if (d.array_size) continue;
      int u = scratch_ureg();
      CgirOp am;
      am.cls = OpClass::AddrMove;
      am.addr_dst = u;
      am.addr.sym = mangle(d.name);
      emit(am);
      CgirOp st;
      st.cls = OpClass::StoreWord;
      st.src1 = vr(scalar_vreg(d.name));
      st.mem = {u, 0, false, false};
      emit(st);
    }
  }

  const front::Ast& ast_;
  const ir::LoopIr& ir_;
  const mdesc::MachineDesc& desc_;
  CgirFunction f_;
  int cur_ = 0;
  int label_counter_ = 0;
  int block_zero_vreg_ = -1;
  int next_ureg_ = 0;
  int scratch_ureg_ = -1;
  std::map<std::string, int> scalar_vreg_;
  std::map<int, int> macc_vreg_;
  std::vector<LoopCtx> loops_;
};

}  // namespace

CgirFunction annotate(const front::Ast& ast, const ir::LoopIr& ir,
                      const mdesc::MachineDesc& desc) {
  return Annotator(ast, ir, desc).run();
}

const SymbolInfo* CgirFunction::find_symbol(const std::string& sym) const {
  for (const auto& s : layout)
    if (s.sym == sym) return &s;
  return nullptr;
}

int64_t CgirFunction::memory_words() const {
  int64_t total = 0;
  for (const auto& s : layout) total += s.words;
  return total;
}

}  // namespace bwc::cg
