#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bwc/bench.hpp"
#include "bwc/compile.hpp"
#include "bwc/frontend.hpp"
#include "bwc/interp.hpp"
#include "bwc/sim.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bwc::Error("IoError", "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bwc::Error("IoError", "cannot write '" + path + "'");
  out << text;
}

bwc::mdesc::MachineDesc machine_for(const std::string& path) {
  if (path.empty()) return bwc::mdesc::default_machine();
  return bwc::mdesc::load_machine_description(slurp(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compiler, simulator and benchmark harness for a 4-cluster VLIW DSP"};
  app.require_subcommand(1);

  // compile ----------------------------------------------------------------
  std::string c_src, c_machine, c_out = "out.asm";
  bool c_no_macc = false, c_dump_ir = false;
  auto* c = app.add_subcommand("compile", "compile a source file to assembly");
  c->add_option("src", c_src, "source file")->required();
  c->add_option("--machine", c_machine, "machine description file");
  c->add_option("-o,--out", c_out, "output assembly file");
  c->add_flag("--no-macc", c_no_macc, "disable accumulate synthesis (baseline build)");
  c->add_flag("--dump-ir", c_dump_ir, "print loop IR before and after the rewrite");

  // run ---------------------------------------------------------------------
  std::string r_asm, r_machine, r_data, r_report = "text", r_trace;
  std::vector<std::string> r_bind;
  uint64_t r_fuel = 100000000ull;
  auto* r = app.add_subcommand("run", "simulate an assembly file");
  r->add_option("asm", r_asm, "assembly file")->required();
  r->add_option("--machine", r_machine, "machine description file");
  r->add_option("--data", r_data, "data image file");
  r->add_option("--bind", r_bind, "symbol=addr binding (repeatable)");
  r->add_option("--report", r_report, "report format: text|json");
  r->add_option("--trace", r_trace, "write a per-bundle cost trace to a file");
  r->add_option("--fuel", r_fuel, "maximum bundles to execute");

  // bench ---------------------------------------------------------------
  std::string b_suite = "table1", b_machine, b_report = "markdown", b_out;
  uint64_t b_seed = 1;
  auto* b = app.add_subcommand("bench", "run a benchmark suite");
  b->add_option("--suite", b_suite, "suite name");
  b->add_option("--seed", b_seed, "input generator seed");
  b->add_option("--machine", b_machine, "machine description file");
  b->add_option("--report", b_report, "report format: markdown|json");
  b->add_option("--out", b_out, "write the report to a file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c) {
      auto desc = machine_for(c_machine);
      bwc::CompileOptions opts;
      opts.enable_macc = !c_no_macc;
      opts.dump_ir = c_dump_ir;
      auto res = bwc::compile(slurp(c_src), desc, opts);
      if (c_dump_ir) {
        std::cout << "== loop IR before rewrite ==\n" << res.ir_before;
        std::cout << "== loop IR after rewrite ==\n" << res.ir_after;
      }
      spit(c_out, res.assembly);
      std::cerr << "wrote " << c_out << "\n";
    } else if (*r) {
      auto desc = machine_for(r_machine);
      auto prog = bwc::sim::parse_assembly(slurp(r_asm), desc);
      for (const auto& bind : r_bind) {
        auto eq = bind.find('=');
        if (eq == std::string::npos)
          throw bwc::Error("CliError", "--bind expects symbol=addr");
        prog.symbols[bind.substr(0, eq)] = std::stoll(bind.substr(eq + 1));
      }
      std::vector<int32_t> memory = r_data.empty()
                                        ? bwc::sim::build_memory(prog, {})
                                        : bwc::sim::load_data_image(slurp(r_data), prog);
      bwc::sim::RunOptions opts;
      opts.fuel = r_fuel;
      std::vector<std::pair<size_t, uint32_t>> trace;
      if (!r_trace.empty()) opts.trace = &trace;
      auto rr = bwc::sim::run(prog, std::move(memory), desc, opts);
      if (!r_trace.empty()) {
        std::ostringstream os;
        for (const auto& [bundle, cost] : trace) os << bundle << " " << cost << "\n";
        spit(r_trace, os.str());
      }
      std::cout << (r_report == "json" ? rr.report.to_json() + "\n"
                                       : rr.report.to_text());
    } else if (*b) {
      auto desc = machine_for(b_machine);
      auto report = bwc::bench::run_suite(b_suite, desc, b_seed);
      std::string text =
          b_report == "json" ? report.to_json() + "\n" : report.to_markdown();
      if (b_out.empty()) {
        std::cout << text;
      } else {
        spit(b_out, text);
        std::cerr << "wrote " << b_out << "\n";
      }
      return report.all_pass ? 0 : 1;
    }
  } catch (const bwc::Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
