#include <array>
#include <cctype>
#include <sstream>

#include "bwc/machine.hpp"

namespace bwc::mdesc {

namespace {

struct ClassMeta {
  OpClass cls;
  const char* name;
  int arity;
};

constexpr std::array<ClassMeta, kNumOpClasses> kClasses = {{
    {OpClass::LoadWord, "load_word", 2},
    {OpClass::LoadDual, "load_dual", 2},
    {OpClass::StoreWord, "store_word", 2},
    {OpClass::MoveImm, "move_imm", 2},
    {OpClass::MoveReg, "move_reg", 2},
    {OpClass::Add, "add", 3},
    {OpClass::Sub, "sub", 3},
    {OpClass::Mul, "mul", 3},
    {OpClass::Macc, "macc", 3},
    {OpClass::MaccInit, "macc_init", 2},
    {OpClass::MaccRead, "macc_read", 2},
    {OpClass::Sigma, "sigma", 2},
    {OpClass::BranchCond, "branch_cond", 3},
    {OpClass::AddrMove, "addr_move", 2},
}};

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace

const char* op_class_name(OpClass c) {
  for (const auto& m : kClasses)
    if (m.cls == c) return m.name;
  return "?";
}

std::optional<OpClass> op_class_from_name(const std::string& name) {
  for (const auto& m : kClasses)
    if (name == m.name) return m.cls;
  return std::nullopt;
}

int op_class_arity(OpClass c) {
  for (const auto& m : kClasses)
    if (m.cls == c) return m.arity;
  return 0;
}

std::string MachineDesc::broadcast_prefix() const {
  std::string out;
  for (const auto& n : cluster_names) out += n;
  return out;
}

namespace {

MachineDesc make_defaults() {
  MachineDesc d;
  d.cluster_names = {"x", "y", "z", "t"};
  d.general_regs_per_cluster = 64;
  d.address_regs = 16;
  d.macc_regs_per_cluster = 4;
  d.simd_width_per_cluster = 2;
  d.slots = {{"mem", 1}, {"alu", 1}, {"mul", 1}, {"mov", 2},
             {"macc", 1}, {"branch", 1}, {"addr", 1}};
  d.branch_taken_penalty = 5;
  return d;
}

}  // namespace

MachineDesc load_machine_description(const std::string& text) {
  MachineDesc desc = make_defaults();
  bool names_set = false;
  enum class Section { None, Clusters, Registers, Opcodes, Branch };
  Section section = Section::None;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    lineno++;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);

    if (line.front() == '[') {
      if (line == "[clusters]") section = Section::Clusters;
      else if (line == "[registers]") section = Section::Registers;
      else if (line == "[opcodes]") section = Section::Opcodes;
      else if (line == "[branch]") section = Section::Branch;
      else throw DescriptionSyntaxError(lineno, "unknown section " + line);
      continue;
    }

    auto words = split_ws(line);
    auto want_int = [&](const std::string& w) -> int {
      try {
        size_t used = 0;
        int v = std::stoi(w, &used);
        if (used != w.size()) throw std::invalid_argument(w);
        return v;
      } catch (const std::exception&) {
        throw DescriptionSyntaxError(lineno, "expected an integer, got '" + w + "'");
      }
    };

    switch (section) {
      case Section::None:
        throw DescriptionSyntaxError(lineno, "content before any [section]");
      case Section::Clusters:
        if (words[0] == "names") {
          if (words.size() < 2)
            throw DescriptionSyntaxError(lineno, "names needs at least one cluster");
          if (names_set) throw DuplicateEntry("cluster names");
          desc.cluster_names.assign(words.begin() + 1, words.end());
          names_set = true;
        } else if (words[0] == "simd_width" && words.size() == 2) {
          desc.simd_width_per_cluster = want_int(words[1]);
        } else if (words[0] == "slot" && words.size() == 3) {
          desc.slots[words[1]] = want_int(words[2]);
        } else {
          throw DescriptionSyntaxError(lineno, "unrecognized clusters entry '" + line + "'");
        }
        break;
      case Section::Registers:
        if (words.size() != 2)
          throw DescriptionSyntaxError(lineno, "register entries are '<file> <count>'");
        if (words[0] == "general") desc.general_regs_per_cluster = want_int(words[1]);
        else if (words[0] == "address") desc.address_regs = want_int(words[1]);
        else if (words[0] == "macc") desc.macc_regs_per_cluster = want_int(words[1]);
        else throw DescriptionSyntaxError(lineno, "unknown register file '" + words[0] + "'");
        break;
      case Section::Opcodes: {
        auto cls = op_class_from_name(words[0]);
        if (!cls) throw UnknownOpcodeClass(words[0]);
        if (desc.opcode_table.count(*cls)) throw DuplicateEntry(words[0]);
        if (words.size() < 4)
          throw DescriptionSyntaxError(lineno,
                                       "opcode entries are '<class> <latency> <slot> \"<fmt>\"'");
        OpcodeInfo info;
        info.cls = *cls;
        info.latency = want_int(words[1]);
        info.slot = words[2];
        auto q0 = line.find('"');
        auto q1 = line.rfind('"');
        if (q0 == std::string::npos || q1 <= q0)
          throw DescriptionSyntaxError(lineno, "missing quoted print format");
        info.print_format = line.substr(q0 + 1, q1 - q0 - 1);
        desc.opcode_table[*cls] = info;
        break;
      }
      case Section::Branch:
        if (words.size() == 2 && words[0] == "taken_penalty") {
          desc.branch_taken_penalty = want_int(words[1]);
        } else {
          throw DescriptionSyntaxError(lineno, "unrecognized branch entry '" + line + "'");
        }
        break;
    }
  }

  for (const auto& m : kClasses)
    if (!desc.opcode_table.count(m.cls))
      throw UnknownOpcodeClass(std::string(m.name) + " (missing from [opcodes])");

  auto violations = validate_description(desc);
  if (!violations.empty()) {
    std::string msg = "invalid machine description:";
    for (const auto& v : violations) msg += "\n  " + v.what;
    throw Error("InvalidDescription", msg);
  }
  return desc;
}

std::vector<Violation> validate_description(const MachineDesc& desc) {
  std::vector<Violation> out;
  if (desc.cluster_count() < 1) out.push_back({"cluster count must be >= 1"});
  for (const auto& n : desc.cluster_names) {
    if (n.size() != 1 || n[0] < 'a' || n[0] > 'z' || n == "r" || n == "u")
      out.push_back({"cluster name '" + n + "' must be a single letter other than r/u"});
  }
  if (desc.general_regs_per_cluster < 1) out.push_back({"general register count must be >= 1"});
  if (desc.address_regs < 1) out.push_back({"address register count must be >= 1"});
  if (desc.macc_regs_per_cluster < 1)
    out.push_back({"accumulator register count must be >= 1"});
  if (desc.simd_width_per_cluster != 1 && desc.simd_width_per_cluster != 2)
    out.push_back({"simd_width must be 1 or 2"});
  for (const auto& [name, cap] : desc.slots)
    if (cap < 1) out.push_back({"slot '" + name + "' capacity must be >= 1"});
  if (desc.branch_taken_penalty < 1) out.push_back({"branch taken penalty must be >= 1"});

  for (const auto& [cls, info] : desc.opcode_table) {
    std::string name = op_class_name(cls);
    if (info.latency < 1) out.push_back({"latency >= 1 required for " + name});
    if (!desc.slots.count(info.slot))
      out.push_back({"opcode " + name + " references unknown slot '" + info.slot + "'"});
    // Placeholders must cover the operand arity exactly.
    std::vector<bool> seen(static_cast<size_t>(op_class_arity(cls)), false);
    bool bad = false;
    const std::string& f = info.print_format;
    for (size_t i = 0; i + 1 < f.size(); ++i) {
      if (f[i] != '%') continue;
      size_t j = i + 1;
      if (f[j] == 'P') j++;
      if (j < f.size() && std::isdigit(static_cast<unsigned char>(f[j]))) {
        size_t k = static_cast<size_t>(f[j] - '0');
        if (k >= seen.size()) bad = true;
        else seen[k] = true;
      } else if (f[j] == 'c') {
        if (cls != OpClass::BranchCond) bad = true;
      } else {
        bad = true;
      }
    }
    for (bool s : seen)
      if (!s) bad = true;
    if (bad)
      out.push_back({"print_format placeholders of " + name + " do not match arity " +
                     std::to_string(op_class_arity(cls))});
  }
  return out;
}

const OpcodeInfo& lookup_opcode(const MachineDesc& desc, OpClass cls) {
  auto it = desc.opcode_table.find(cls);
  if (it == desc.opcode_table.end()) throw UnknownOpcodeClass(op_class_name(cls));
  return it->second;
}

std::string serialize_description(const MachineDesc& desc) {
  std::ostringstream os;
  os << "[clusters]\n";
  os << "names";
  for (const auto& n : desc.cluster_names) os << " " << n;
  os << "\n";
  os << "simd_width " << desc.simd_width_per_cluster << "\n";
  for (const auto& [name, cap] : desc.slots) os << "slot " << name << " " << cap << "\n";
  os << "\n[registers]\n";
  os << "general " << desc.general_regs_per_cluster << "\n";
  os << "address " << desc.address_regs << "\n";
  os << "macc " << desc.macc_regs_per_cluster << "\n";
  os << "\n[opcodes]\n";
  for (const auto& m : kClasses) {
    auto it = desc.opcode_table.find(m.cls);
    if (it == desc.opcode_table.end()) continue;
    const OpcodeInfo& info = it->second;
    os << m.name << " " << info.latency << " " << info.slot << " \"" << info.print_format
       << "\"\n";
  }
  os << "\n[branch]\n";
  os << "taken_penalty " << desc.branch_taken_penalty << "\n";
  return os.str();
}

const std::string& default_description_text() {
  static const std::string text = R"(# Default 4-cluster machine description.
# Latencies are a calibration: the hardware manuals are not public, so the
# values are chosen to reproduce the published per-iteration bundle costs.

[clusters]
names x y z t
simd_width 2
slot mem 1
slot alu 1
slot mul 1
slot mov 2
slot macc 1
slot branch 1
slot addr 1

[registers]
general 64
address 16
macc 4

[opcodes]
# class latency slot "print format"
load_word   4 mem    "%P0=%1"
load_dual   4 mem    "%P0=%1"
store_word  4 mem    "%1=%P0"
move_imm    1 mov    "%P0=%1"
move_reg    1 mov    "%P0=%1"
add         1 alu    "%P0=%1+%2"
sub         1 alu    "%P0=%1-%2"
mul         4 mul    "%P0=%1*%2"
macc        2 macc   "%P0+=%1*%2"
macc_init   1 macc   "%P0=%1"
macc_read   1 macc   "%P0=%1"
sigma       2 alu    "%P0=sigma %P1"
addr_move   1 addr   "%0=%1"
branch_cond 1 branch "If %P0%c%1 B %2"

[branch]
taken_penalty 5
)";
  return text;
}

const MachineDesc& default_machine() {
  static const MachineDesc desc = load_machine_description(default_description_text());
  return desc;
}

}  // namespace bwc::mdesc
