#include <cmath>
#include <random>
#include <sstream>

#include "bwc/bench.hpp"
#include "bwc/compile.hpp"
#include "bwc/frontend.hpp"

#include "json.hpp"

namespace bwc::bench {

namespace {

int64_t array_len(int64_t n) { return std::max<int64_t>(n, 1); }

// Raw engine words; the 64-bit generator sequence is pinned by the standard,
// so reports are reproducible across platforms. Low 32 bits give the full
// int32 range, negatives and wraparound magnitudes included.
std::vector<int32_t> random_words(uint64_t seed, size_t n) {
  std::mt19937_64 eng(seed);
  std::vector<int32_t> out(n);
  for (auto& v : out) v = static_cast<int32_t>(eng() & 0xffffffffull);
  return out;
}

uint64_t mix(uint64_t seed, const std::string& s) {
  uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  for (char c : s) h = (h ^ static_cast<uint64_t>(c)) * 0x100000001b3ull;
  return h;
}

}  // namespace

std::string dot_source(int64_t n) {
  std::ostringstream os;
  os << "int N = " << n << ";\n";
  os << "int sum = 0;\n";
  os << "int i;\n";
  os << "int a[" << array_len(n) << "];\n";
  os << "int b[" << array_len(n) << "];\n";
  os << "for (i = 0; i < N; i++) {\n";
  os << "  sum += a[i] * b[i];\n";
  os << "}\n";
  return os.str();
}

std::string conv_source(int64_t outputs, int64_t n) {
  std::ostringstream os;
  os << "int n;\nint i;\nint s;\n";
  os << "int x[" << array_len(outputs - 1 + n) << "];\n";
  os << "int h[" << array_len(n) << "];\n";
  os << "int y[" << array_len(outputs) << "];\n";
  os << "for (n = 0; n < " << outputs << "; n++) {\n";
  os << "  s = 0;\n";
  os << "  for (i = 0; i < " << n << "; i++) {\n";
  os << "    s += x[n+i] * h[i];\n";
  os << "  }\n";
  os << "  y[n] = s;\n";
  os << "}\n";
  return os.str();
}

std::string fir_source(int64_t outputs, int64_t taps) {
  std::ostringstream os;
  os << "int n;\nint i;\nint s;\n";
  os << "int x[" << array_len(outputs - 1 + taps) << "];\n";
  os << "int h[" << array_len(taps) << "];\n";
  os << "int y[" << array_len(outputs) << "];\n";
  os << "for (n = 0; n < " << outputs << "; n++) {\n";
  os << "  s = 0;\n";
  os << "  for (i = 0; i < " << taps << "; i++) {\n";
  os << "    s += x[n+i] * h[i];\n";
  os << "  }\n";
  os << "  y[n] = s;\n";
  os << "}\n";
  return os.str();
}

std::string matmul_source(int64_t rows, int64_t cols, int64_t inner) {
  // The right operand is stored transposed so the reduction runs unit-stride.
  std::ostringstream os;
  os << "int i;\nint j;\nint k;\nint s;\n";
  os << "int a[" << array_len(rows * inner) << "];\n";
  os << "int bt[" << array_len(cols * inner) << "];\n";
  os << "int c[" << array_len(rows * cols) << "];\n";
  os << "for (i = 0; i < " << rows << "; i++) {\n";
  os << "  for (j = 0; j < " << cols << "; j++) {\n";
  os << "    s = 0;\n";
  os << "    for (k = 0; k < " << inner << "; k++) {\n";
  os << "      s += a[i*" << inner << "+k] * bt[j*" << inner << "+k];\n";
  os << "    }\n";
  os << "    c[i*" << cols << "+j] = s;\n";
  os << "  }\n";
  os << "}\n";
  return os.str();
}

std::string matmul_source(int64_t dim) { return matmul_source(dim, dim, dim); }

namespace {

BenchCase make_dot(int64_t n) {
  BenchCase c;
  c.name = "dot_product";
  c.source = dot_source(n);
  c.input_arrays = {"a", "b"};
  c.output_symbols = {"sum"};
  c.reference_speedup = 8.85;
  c.min_speedup = 8.0;
  c.oracle = [n](const Image& in) {
    int32_t sum = 0;
    for (int64_t i = 0; i < n; ++i)
      sum = wadd(sum, wmul(in.at("a")[static_cast<size_t>(i)],
                           in.at("b")[static_cast<size_t>(i)]));
    return Image{{"sum", {sum}}};
  };
  return c;
}

BenchCase make_windowed(const std::string& name, int64_t outputs, int64_t taps,
                        double reference) {
  BenchCase c;
  c.name = name;
  c.source = name == "convolution" ? conv_source(outputs, taps)
                                   : fir_source(outputs, taps);
  c.input_arrays = {"x", "h"};
  c.output_symbols = {"y"};
  c.reference_speedup = reference;
  c.min_speedup = 4.0;
  c.oracle = [outputs, taps](const Image& in) {
    std::vector<int32_t> y(static_cast<size_t>(array_len(outputs)), 0);
    for (int64_t n = 0; n < outputs; ++n) {
      int32_t s = 0;
      for (int64_t i = 0; i < taps; ++i)
        s = wadd(s, wmul(in.at("x")[static_cast<size_t>(n + i)],
                         in.at("h")[static_cast<size_t>(i)]));
      y[static_cast<size_t>(n)] = s;
    }
    return Image{{"y", std::move(y)}};
  };
  return c;
}

BenchCase make_matmul(int64_t rows, int64_t cols, int64_t inner, double reference) {
  BenchCase c;
  c.name = "matmul";
  c.source = matmul_source(rows, cols, inner);
  c.input_arrays = {"a", "bt"};
  c.output_symbols = {"c"};
  c.reference_speedup = reference;
  c.min_speedup = 4.0;
  c.oracle = [rows, cols, inner](const Image& in) {
    std::vector<int32_t> out(static_cast<size_t>(array_len(rows * cols)), 0);
    for (int64_t i = 0; i < rows; ++i)
      for (int64_t j = 0; j < cols; ++j) {
        int32_t s = 0;
        for (int64_t k = 0; k < inner; ++k)
          s = wadd(s, wmul(in.at("a")[static_cast<size_t>(i * inner + k)],
                           in.at("bt")[static_cast<size_t>(j * inner + k)]));
        out[static_cast<size_t>(i * cols + j)] = s;
      }
    return Image{{"c", std::move(out)}};
  };
  return c;
}

}  // namespace

std::vector<BenchCase> table1_suite() {
  return {make_dot(1024), make_windowed("convolution", 4, 1024, 5.93),
          make_windowed("fir", 1024, 128, 4.90), make_matmul(100, 100, 100, 5.53)};
}

Image generate_inputs(const BenchCase& c, uint64_t seed) {
  front::Ast ast = front::parse_program(c.source);
  Image out;
  for (const std::string& name : c.input_arrays) {
    for (const auto& d : ast.decls) {
      if (d.name != name || !d.array_size) continue;
      out[name] = random_words(mix(seed, c.name + "/" + name),
                               static_cast<size_t>(*d.array_size));
    }
  }
  return out;
}

Image oracle_eval(const BenchCase& c, const Image& inputs) { return c.oracle(inputs); }

namespace {

struct BuildRun {
  uint64_t total = 0;
  uint64_t loop = 0;
  std::map<std::string, std::vector<int32_t>> outputs;
};

BuildRun run_build(const BenchCase& c, const mdesc::MachineDesc& desc, bool macc,
                   const Image& inputs) {
  CompileOptions opts;
  opts.enable_macc = macc;
  CompileResult res;
  try {
    res = compile(c.source, desc, opts);
  } catch (const Error& e) {
    throw CompileFailure(c.name + ": " + e.what());
  }
  try {
    sim::AsmProgram prog = sim::parse_assembly(res.assembly, desc);
    std::map<std::string, std::vector<int32_t>> contents;
    for (const auto& [name, words] : inputs) contents["__" + name] = words;
    std::vector<int32_t> memory = sim::build_memory(prog, contents);
    sim::RunResult rr = sim::run(prog, std::move(memory), desc);

    BuildRun out;
    out.total = rr.report.total_cycles;
    for (const auto& b : res.function.blocks)
      if (b.role == "loop" || b.role == "vec_loop" || b.role == "remainder")
        out.loop += rr.report.cycles_for(b.label);
    for (const std::string& name : c.output_symbols) {
      const cg::SymbolInfo* sym = res.function.find_symbol("__" + name);
      if (!sym) throw SimFailure(c.name + ": no symbol for output '" + name + "'");
      std::vector<int32_t> words(
          rr.state.memory.begin() + static_cast<long>(sym->addr),
          rr.state.memory.begin() + static_cast<long>(sym->addr + sym->words));
      out.outputs[name] = std::move(words);
    }
    return out;
  } catch (const Error& e) {
    if (dynamic_cast<const SimFailure*>(&e)) throw;
    throw SimFailure(c.name + ": " + e.what());
  }
}

}  // namespace

BenchRow run_case(const BenchCase& c, const mdesc::MachineDesc& desc, uint64_t seed) {
  Image inputs = generate_inputs(c, seed);
  Image expected = oracle_eval(c, inputs);

  BuildRun baseline = run_build(c, desc, false, inputs);
  BuildRun optimized = run_build(c, desc, true, inputs);

  BenchRow row;
  row.name = c.name;
  row.baseline_cycles = baseline.total;
  row.optimized_cycles = optimized.total;
  row.baseline_loop_cycles = baseline.loop;
  row.optimized_loop_cycles = optimized.loop;
  row.reference_speedup = c.reference_speedup;

  row.correct = true;
  for (const std::string& name : c.output_symbols) {
    const auto& want = expected.at(name);
    for (const BuildRun* br : {&baseline, &optimized}) {
      const auto& got = br->outputs.at(name);
      if (got.size() < want.size()) row.correct = false;
      for (size_t i = 0; i < want.size() && row.correct; ++i)
        if (got[i] != want[i]) row.correct = false;
    }
  }

  row.speedup = optimized.total == 0
                    ? 0.0
                    : std::round(100.0 * static_cast<double>(baseline.total) /
                                 static_cast<double>(optimized.total)) /
                          100.0;
  row.pass = row.correct && row.speedup >= c.min_speedup;
  return row;
}

BenchReport run_suite(const std::string& suite, const mdesc::MachineDesc& desc,
                      uint64_t seed) {
  if (suite != "table1") throw UnknownSuite(suite);
  BenchReport report;
  report.all_pass = true;
  for (const BenchCase& c : table1_suite()) {
    BenchRow row = run_case(c, desc, seed);
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string BenchReport::to_markdown() const {
  std::ostringstream os;
  os << "| algorithm | baseline cycles | optimized cycles | speedup | reference | ok |\n";
  os << "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.name << " | " << r.baseline_cycles << " | " << r.optimized_cycles
       << " | " << r.speedup << " | " << r.reference_speedup << " | "
       << (r.pass ? "yes" : "NO") << " |\n";
  }
  return os.str();
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["all_pass"] = all_pass;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"name", r.name},
                         {"baseline_cycles", r.baseline_cycles},
                         {"optimized_cycles", r.optimized_cycles},
                         {"baseline_loop_cycles", r.baseline_loop_cycles},
                         {"optimized_loop_cycles", r.optimized_loop_cycles},
                         {"speedup", r.speedup},
                         {"reference_speedup", r.reference_speedup},
                         {"correct", r.correct},
                         {"pass", r.pass}});
  }
  return j.dump(2);
}

}  // namespace bwc::bench
