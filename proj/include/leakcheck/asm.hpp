#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace leakcheck {

inline constexpr unsigned kNumRegisters = 16;
inline constexpr unsigned kStackPointer = 15;
inline constexpr uint64_t kInstructionSize = 4;
inline constexpr uint64_t kDefaultCodeBase = 0x1000;

// The numeric value of each mnemonic is its opcode. Observations that carry an
// operation (cs, op, cr) encode it with this number.
enum class Mnemonic : uint8_t {
  Mov,
  Add,
  Sub,
  Mul,
  Udiv,
  And,
  Or,
  Xor,
  Shl,
  Shr,
  Sar,
  Sltu,
  Load,
  Store,
  Jmp,
  Jz,
  Jnz,
  Call,
  Ret,
  Fence,
  Halt,
};

inline constexpr unsigned kNumMnemonics = 21;

enum class InsnGroup : uint8_t { None, Jump, Call, Ret };

std::string_view mnemonic_name(Mnemonic m);
std::optional<Mnemonic> mnemonic_from_name(std::string_view name);
InsnGroup group_of(Mnemonic m);
bool is_alu(Mnemonic m);

struct RegOperand {
  uint8_t reg = 0;
  bool operator==(const RegOperand&) const = default;
};

struct ImmOperand {
  uint64_t value = 0;
  bool operator==(const ImmOperand&) const = default;
};

struct MemOperand {
  uint8_t base = 0;
  std::optional<uint8_t> index;
  uint8_t scale = 1;
  int32_t offset = 0;
  bool operator==(const MemOperand&) const = default;
};

// A code label. Equality ignores the name: two label operands are the same
// operand when they resolve to the same address.
struct LabelOperand {
  std::string name;
  uint64_t address = 0;
  bool operator==(const LabelOperand& o) const { return address == o.address; }
};

using Operand = std::variant<RegOperand, ImmOperand, MemOperand, LabelOperand>;

struct Instruction {
  Mnemonic mnemonic = Mnemonic::Halt;
  std::vector<Operand> operands;
  uint8_t access_size = 0;  // load/store only, bytes in {1,2,4,8}
  InsnGroup group = InsnGroup::None;

  bool operator==(const Instruction&) const = default;
};

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, uint64_t, std::less<>> labels;
  uint64_t code_base = kDefaultCodeBase;
  uint64_t entry = kDefaultCodeBase;

  uint64_t address_of(size_t index) const { return code_base + kInstructionSize * index; }
  uint64_t code_end() const { return address_of(instructions.size()); }
  // nullptr when addr is not an instruction address of this program.
  const Instruction* fetch(uint64_t addr) const;
  std::optional<uint64_t> label(std::string_view name) const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t line, size_t column, const std::string& message);
  size_t line() const { return line_; }
  size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  size_t line_;
  size_t column_;
  std::string message_;
};

/// Parses assembly text.
///
/// One instruction or label per line, `;` starts a comment. Memory operands are
/// written `[rB + rI*S + OFF]` with index and offset optional; `.entry label`
/// selects the entry point (default: first instruction). Throws ParseError.
Program parse_program(std::string_view text);

/// Renders a program back to assembly. parse_program(disassemble(p)) yields a
/// program whose instruction list equals p's.
std::string disassemble(const Program& program);

std::string format_instruction(const Instruction& insn);

}  // namespace leakcheck
