#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bwc/machine.hpp"

namespace bwc::bench {

class UnknownSuite : public Error {
public:
  explicit UnknownSuite(const std::string& name)
      : Error("UnknownSuite", "unknown benchmark suite '" + name + "'") {}
};

class CompileFailure : public Error {
public:
  explicit CompileFailure(const std::string& d) : Error("CompileFailure", d) {}
};
class SimFailure : public Error {
public:
  explicit SimFailure(const std::string& d) : Error("SimFailure", d) {}
};
class OracleMismatch : public Error {
public:
  explicit OracleMismatch(const std::string& d) : Error("OracleMismatch", d) {}
};

using Image = std::map<std::string, std::vector<int32_t>>;

struct BenchCase {
  std::string name;
  std::string source;
  std::vector<std::string> input_arrays;   // filled with seeded random words
  std::vector<std::string> output_symbols; // compared against the oracle
  // Direct evaluation of the kernel semantics, independent of the compiler
  // and simulator: fills expected values for output_symbols.
  std::function<Image(const Image& inputs)> oracle;
  double reference_speedup = 0.0;  // reported alongside measurements
  double min_speedup = 0.0;        // pass threshold
};

struct BenchRow {
  std::string name;
  uint64_t baseline_cycles = 0;
  uint64_t optimized_cycles = 0;
  uint64_t baseline_loop_cycles = 0;   // cycles attributed to loop-body labels
  uint64_t optimized_loop_cycles = 0;
  double speedup = 0.0;                // baseline/optimized, 2 decimal places
  double reference_speedup = 0.0;
  bool correct = false;                // both builds match the oracle exactly
  bool pass = false;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  bool all_pass = false;
  std::string to_markdown() const;
  std::string to_json() const;
};

// Fills the named input arrays with seeded pseudorandom int32 words,
// including negatives and wraparound-forcing magnitudes.
Image generate_inputs(const BenchCase& c, uint64_t seed);

// Direct kernel evaluation on the given inputs (the independent oracle).
Image oracle_eval(const BenchCase& c, const Image& inputs);

// Compiles the case twice (baseline and optimized), simulates both on the
// same inputs, checks both against the oracle and measures the speedup.
BenchRow run_case(const BenchCase& c, const mdesc::MachineDesc& desc, uint64_t seed);

// The four shipped kernels: dot product, convolution, FIR filter, matmul.
std::vector<BenchCase> table1_suite();

BenchReport run_suite(const std::string& suite, const mdesc::MachineDesc& desc,
                      uint64_t seed);

// Parameterizable kernel sources, also used by the acceptance tests.
std::string dot_source(int64_t n);
std::string conv_source(int64_t outputs, int64_t n);
std::string fir_source(int64_t outputs, int64_t taps);
std::string matmul_source(int64_t dim);                      // square
std::string matmul_source(int64_t rows, int64_t cols, int64_t inner);

}  // namespace bwc::bench
