#include "leakcheck/asm.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <sstream>

namespace leakcheck {

namespace {

constexpr std::array<std::string_view, kNumMnemonics> kMnemonicNames = {
    "mov", "add", "sub", "mul", "udiv", "and", "or",   "xor",   "shl",  "shr", "sar",
    "sltu", "load", "store", "jmp", "jz", "jnz", "call", "ret", "fence", "halt",
};

enum class Kind : uint8_t { Reg, Imm, Mem, Label, RegOrImm, Size };

struct Signature {
  std::vector<Kind> required;
  bool trailing_size = false;
};

Signature signature_of(Mnemonic m) {
  switch (m) {
    case Mnemonic::Mov:
      return {{Kind::Reg, Kind::RegOrImm}};
    case Mnemonic::Load:
      return {{Kind::Reg, Kind::Mem}, true};
    case Mnemonic::Store:
      return {{Kind::Mem, Kind::RegOrImm}, true};
    case Mnemonic::Jmp:
    case Mnemonic::Call:
      return {{Kind::Label}};
    case Mnemonic::Jz:
    case Mnemonic::Jnz:
      return {{Kind::Reg, Kind::Label}};
    case Mnemonic::Ret:
    case Mnemonic::Fence:
    case Mnemonic::Halt:
      return {};
    default:
      return {{Kind::Reg, Kind::Reg, Kind::RegOrImm}};
  }
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::optional<uint8_t> register_from_name(std::string_view s) {
  if (s == "sp") return static_cast<uint8_t>(kStackPointer);
  if (s.size() < 2 || s.size() > 3 || s[0] != 'r') return std::nullopt;
  unsigned v = 0;
  auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v >= kNumRegisters) return std::nullopt;
  if (s.size() == 3 && s[1] == '0') return std::nullopt;
  return static_cast<uint8_t>(v);
}

// Operand as written, before label resolution.
struct RawOperand {
  Operand value;
  size_t column = 0;
  bool pending_label = false;
};

class LineParser {
 public:
  LineParser(std::string_view text, size_t line_no) : text_(text), line_(line_no) {}

  [[noreturn]] void fail(size_t col, const std::string& msg) const { throw ParseError(line_, col + 1, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  size_t pos() const { return pos_; }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(pos_, std::string("expected '") + c + "'");
  }

  std::string_view ident() {
    skip_ws();
    size_t start = pos_;
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) fail(pos_, "expected identifier");
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  bool peek_ident() {
    skip_ws();
    return pos_ < text_.size() && is_ident_start(text_[pos_]);
  }

  bool peek_number() {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
    return c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]));
  }

  // Decimal or 0x-hex; a leading '-' yields the two's complement.
  uint64_t number() {
    skip_ws();
    size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    int base = 10;
    if (pos_ + 1 < text_.size() && text_[pos_] == '0' && (text_[pos_ + 1] == 'x' || text_[pos_ + 1] == 'X')) {
      base = 16;
      pos_ += 2;
    }
    size_t digits = pos_;
    while (pos_ < text_.size() && std::isxdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, v, base);
    if (ec == std::errc::result_out_of_range) fail(start, "immediate out of range");
    if (ec != std::errc{} || p != text_.data() + pos_ || digits == pos_) fail(start, "malformed number");
    if (pos_ < text_.size() && is_ident_char(text_[pos_])) fail(start, "malformed number");
    return negative ? (~v + 1) : v;
  }

  MemOperand memory() {
    expect('[');
    MemOperand mem;
    size_t col = pos();
    std::string_view base_name = ident();
    auto base = register_from_name(base_name);
    if (!base) fail(col, "memory operand needs a base register, got '" + std::string(base_name) + "'");
    mem.base = *base;
    bool have_offset = false;
    int64_t offset = 0;
    while (!consume(']')) {
      size_t term_col = pos();
      bool minus = false;
      if (consume('-')) {
        minus = true;
      } else {
        expect('+');
      }
      if (peek_ident()) {
        if (minus) fail(term_col, "index register cannot be subtracted");
        size_t rc = pos();
        std::string_view name = ident();
        auto idx = register_from_name(name);
        if (!idx) fail(rc, "expected index register, got '" + std::string(name) + "'");
        if (mem.index) fail(rc, "memory operand has more than one index register");
        mem.index = *idx;
        if (consume('*')) {
          size_t sc = pos();
          uint64_t s = number();
          if (s != 1 && s != 2 && s != 4 && s != 8) fail(sc, "scale must be 1, 2, 4 or 8");
          mem.scale = static_cast<uint8_t>(s);
        }
      } else if (peek_number()) {
        if (have_offset) fail(term_col, "memory operand has more than one offset");
        if (peek() == '-') fail(term_col, "malformed offset");
        uint64_t v = number();
        if (v > 0x80000000ULL || (!minus && v > 0x7FFFFFFFULL)) fail(term_col, "offset does not fit in 32 bits");
        offset = minus ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
        have_offset = true;
      } else {
        fail(pos(), "expected register or offset in memory operand");
      }
    }
    mem.offset = static_cast<int32_t>(offset);
    return mem;
  }

  RawOperand operand() {
    RawOperand raw;
    raw.column = pos();
    char c = peek();
    raw.column = pos_;
    if (c == '[') {
      raw.value = memory();
    } else if (peek_number()) {
      raw.value = ImmOperand{number()};
    } else if (peek_ident()) {
      std::string_view name = ident();
      if (auto r = register_from_name(name)) {
        raw.value = RegOperand{*r};
      } else {
        raw.value = LabelOperand{std::string(name), 0};
        raw.pending_label = true;
      }
    } else if (c == '\0') {
      fail(pos_, "expected operand");
    } else {
      fail(pos_, std::string("unexpected character '") + c + "'");
    }
    return raw;
  }

 private:
  std::string_view text_;
  size_t line_;
  size_t pos_ = 0;
};

struct PendingInstruction {
  Instruction insn;
  size_t line = 0;
  std::vector<std::pair<size_t, size_t>> label_refs;  // operand index, column
};

bool kind_matches(Kind k, const Operand& op) {
  switch (k) {
    case Kind::Reg:
      return std::holds_alternative<RegOperand>(op);
    case Kind::Imm:
      return std::holds_alternative<ImmOperand>(op);
    case Kind::Mem:
      return std::holds_alternative<MemOperand>(op);
    case Kind::Label:
      return std::holds_alternative<LabelOperand>(op);
    case Kind::RegOrImm:
      return std::holds_alternative<RegOperand>(op) || std::holds_alternative<ImmOperand>(op) ||
             std::holds_alternative<LabelOperand>(op);
    case Kind::Size:
      return std::holds_alternative<ImmOperand>(op);
  }
  return false;
}

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Reg:
      return "register";
    case Kind::Imm:
    case Kind::Size:
      return "immediate";
    case Kind::Mem:
      return "memory operand";
    case Kind::Label:
      return "label";
    case Kind::RegOrImm:
      return "register or immediate";
  }
  return "operand";
}

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::string format_operand(const Operand& op) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, RegOperand>) {
          return "r" + std::to_string(o.reg);
        } else if constexpr (std::is_same_v<T, ImmOperand>) {
          return o.value < 10 ? std::to_string(o.value) : hex(o.value);
        } else if constexpr (std::is_same_v<T, LabelOperand>) {
          return o.name.empty() ? hex(o.address) : o.name;
        } else {
          std::string s = "[r" + std::to_string(o.base);
          if (o.index) {
            s += " + r" + std::to_string(*o.index);
            if (o.scale != 1) s += "*" + std::to_string(o.scale);
          }
          if (o.offset > 0) s += " + " + std::to_string(o.offset);
          if (o.offset < 0) s += " - " + std::to_string(-static_cast<int64_t>(o.offset));
          return s + "]";
        }
      },
      op);
}

}  // namespace

std::string_view mnemonic_name(Mnemonic m) { return kMnemonicNames[static_cast<size_t>(m)]; }

std::optional<Mnemonic> mnemonic_from_name(std::string_view name) {
  for (size_t i = 0; i < kMnemonicNames.size(); ++i) {
    if (kMnemonicNames[i] == name) return static_cast<Mnemonic>(i);
  }
  return std::nullopt;
}

InsnGroup group_of(Mnemonic m) {
  switch (m) {
    case Mnemonic::Jmp:
    case Mnemonic::Jz:
    case Mnemonic::Jnz:
      return InsnGroup::Jump;
    case Mnemonic::Call:
      return InsnGroup::Call;
    case Mnemonic::Ret:
      return InsnGroup::Ret;
    default:
      return InsnGroup::None;
  }
}

bool is_alu(Mnemonic m) { return m >= Mnemonic::Add && m <= Mnemonic::Sltu; }

const Instruction* Program::fetch(uint64_t addr) const {
  if (addr < code_base || (addr - code_base) % kInstructionSize != 0) return nullptr;
  uint64_t idx = (addr - code_base) / kInstructionSize;
  if (idx >= instructions.size()) return nullptr;
  return &instructions[idx];
}

std::optional<uint64_t> Program::label(std::string_view name) const {
  auto it = labels.find(name);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

ParseError::ParseError(size_t line, size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

Program parse_program(std::string_view text) {
  Program prog;
  std::vector<PendingInstruction> pending;
  std::map<std::string, size_t, std::less<>> label_lines;
  std::optional<std::pair<std::string, std::pair<size_t, size_t>>> entry_directive;

  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);

    LineParser lp(line, line_no);
    while (!lp.at_end()) {
      size_t col = lp.pos();
      if (lp.peek() == '.') {
        std::string_view directive = lp.ident();
        if (directive != ".entry") lp.fail(col, "unknown directive '" + std::string(directive) + "'");
        if (entry_directive) lp.fail(col, "duplicate .entry directive");
        size_t lc = lp.pos();
        std::string name(lp.ident());
        entry_directive = {name, {line_no, lc + 1}};
        if (!lp.at_end()) lp.fail(lp.pos(), "unexpected text after .entry");
        break;
      }
      if (!lp.peek_ident()) lp.fail(col, "expected label or instruction");
      std::string_view word = lp.ident();
      if (lp.consume(':')) {
        if (register_from_name(word)) lp.fail(col, "register name '" + std::string(word) + "' used as label");
        if (mnemonic_from_name(word)) lp.fail(col, "mnemonic '" + std::string(word) + "' used as label");
        std::string name(word);
        if (label_lines.count(name)) {
          lp.fail(col, "duplicate label '" + name + "' (first defined on line " +
                           std::to_string(label_lines[name]) + ")");
        }
        label_lines[name] = line_no;
        prog.labels[name] = prog.address_of(pending.size());
        continue;
      }

      auto mn = mnemonic_from_name(word);
      if (!mn) lp.fail(col, "unknown mnemonic '" + std::string(word) + "'");
      PendingInstruction pi;
      pi.line = line_no;
      pi.insn.mnemonic = *mn;
      pi.insn.group = group_of(*mn);
      Signature sig = signature_of(*mn);

      std::vector<RawOperand> raws;
      if (!lp.at_end()) {
        do {
          raws.push_back(lp.operand());
        } while (lp.consume(','));
        if (!lp.at_end()) lp.fail(lp.pos(), "unexpected text after operands");
      }

      size_t max_ops = sig.required.size() + (sig.trailing_size ? 1 : 0);
      if (raws.size() < sig.required.size() || raws.size() > max_ops) {
        std::string expected = std::to_string(sig.required.size());
        if (sig.trailing_size) expected += " or " + std::to_string(max_ops);
        lp.fail(col, "'" + std::string(word) + "' takes " + expected + " operand(s), got " +
                         std::to_string(raws.size()));
      }
      for (size_t i = 0; i < sig.required.size(); ++i) {
        if (!kind_matches(sig.required[i], raws[i].value)) {
          lp.fail(raws[i].column, "operand " + std::to_string(i + 1) + " of '" + std::string(word) +
                                      "' must be a " + std::string(kind_name(sig.required[i])));
        }
        if (raws[i].pending_label) pi.label_refs.emplace_back(i, raws[i].column);
        pi.insn.operands.push_back(std::move(raws[i].value));
      }
      if (sig.trailing_size) {
        pi.insn.access_size = 8;
        if (raws.size() == max_ops) {
          const auto* imm = std::get_if<ImmOperand>(&raws.back().value);
          if (!imm || (imm->value != 1 && imm->value != 2 && imm->value != 4 && imm->value != 8)) {
            lp.fail(raws.back().column, "access size must be 1, 2, 4 or 8");
          }
          pi.insn.access_size = static_cast<uint8_t>(imm->value);
        }
      }
      pending.push_back(std::move(pi));
      if (!lp.at_end()) lp.fail(lp.pos(), "unexpected text after instruction");
    }

    if (end == text.size()) break;
    start = end + 1;
  }

  for (auto& pi : pending) {
    for (auto [idx, col] : pi.label_refs) {
      auto& lbl = std::get<LabelOperand>(pi.insn.operands[idx]);
      auto addr = prog.label(lbl.name);
      if (!addr) throw ParseError(pi.line, col + 1, "undefined label '" + lbl.name + "'");
      lbl.address = *addr;
    }
    prog.instructions.push_back(std::move(pi.insn));
  }

  if (prog.instructions.empty()) throw ParseError(1, 1, "no entry instruction");
  prog.entry = prog.code_base;
  if (entry_directive) {
    auto addr = prog.label(entry_directive->first);
    if (!addr) {
      throw ParseError(entry_directive->second.first, entry_directive->second.second,
                       "undefined label '" + entry_directive->first + "'");
    }
    if (!prog.fetch(*addr)) {
      throw ParseError(entry_directive->second.first, entry_directive->second.second,
                       "entry label '" + entry_directive->first + "' does not name an instruction");
    }
    prog.entry = *addr;
  }
  return prog;
}

std::string format_instruction(const Instruction& insn) {
  std::string s(mnemonic_name(insn.mnemonic));
  for (size_t i = 0; i < insn.operands.size(); ++i) {
    s += i == 0 ? " " : ", ";
    s += format_operand(insn.operands[i]);
  }
  if (insn.mnemonic == Mnemonic::Load || insn.mnemonic == Mnemonic::Store) {
    s += ", " + std::to_string(insn.access_size);
  }
  return s;
}

std::string disassemble(const Program& program) {
  std::multimap<uint64_t, std::string> by_address;
  for (const auto& [name, addr] : program.labels) by_address.emplace(addr, name);

  std::string out;
  if (program.entry != program.code_base) {
    auto it = std::find_if(program.labels.begin(), program.labels.end(),
                           [&](const auto& kv) { return kv.second == program.entry; });
    if (it != program.labels.end()) out += ".entry " + it->first + "\n";
  }
  for (size_t i = 0; i <= program.instructions.size(); ++i) {
    uint64_t addr = program.address_of(i);
    auto [lo, hi] = by_address.equal_range(addr);
    for (auto it = lo; it != hi; ++it) out += it->second + ":\n";
    if (i < program.instructions.size()) out += format_instruction(program.instructions[i]) + "\n";
  }
  return out;
}

}  // namespace leakcheck
