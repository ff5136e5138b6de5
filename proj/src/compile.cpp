#include "bwc/compile.hpp"

#include "bwc/frontend.hpp"
#include "bwc/interp.hpp"

namespace bwc {

CompileResult compile(const std::string& source, const mdesc::MachineDesc& desc,
                      const CompileOptions& opts) {
  CompileResult res;
  res.ast = front::typecheck(front::parse_program(source));
  ir::LoopIr loop_ir = front::build_loop_ir(res.ast);
  if (opts.dump_ir) res.ir_before = ir::print_loop_ir(loop_ir);

  ir::LoopIr lowered = opts.enable_macc
                           ? macc::run_macc_pass(loop_ir, desc, &res.decisions)
                           : loop_ir.clone();
  if (opts.dump_ir) res.ir_after = ir::print_loop_ir(lowered);

  cg::CgirFunction f = cg::annotate(res.ast, lowered, desc);
  cg::assign_clusters(f);
  cg::schedule_bundles(f, desc);
  cg::allocate_global(f, desc);
  cg::allocate_local(f, desc);

  auto alloc_violations = cg::verify_allocation(f);
  if (!alloc_violations.empty())
    throw Error("VerificationFailed",
                "register allocation check failed: " + alloc_violations[0].what);
  auto bundle_violations = cg::verify_bundles(f, desc);
  if (!bundle_violations.empty())
    throw Error("VerificationFailed",
                "bundle check failed: " + bundle_violations[0].what);

  cg::apply_assignment(f);
  res.assembly = cg::emit_assembly(f, desc);
  res.function = std::move(f);
  return res;
}

}  // namespace bwc
