#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "leakcheck/asm.hpp"
#include "leakcheck/leakage.hpp"
#include "leakcheck/machine.hpp"

namespace leakcheck {

enum class Secrecy { Public, Secret };
enum class Placement { Register, Memory, Auto };

struct InputSpec {
  std::string name;
  Secrecy secrecy = Secrecy::Public;
  Placement placement = Placement::Memory;
  uint8_t reg = 0;       // Register placement
  uint64_t address = 0;  // Memory placement; filled in for Auto by resolve_interface
  uint64_t length = 0;

  bool operator==(const InputSpec&) const = default;
};

inline constexpr uint64_t kDefaultStackTop = 0x7FFF'F000;
inline constexpr uint64_t kDefaultStackSize = 0x1000;
inline constexpr uint64_t kDefaultMaxSteps = 100000;
inline constexpr uint64_t kAutoPlacementBase = 0x1000'0000;
inline constexpr uint64_t kAutoPlacementAlign = 64;

/// The input layout of a program: where each input lives and whether it is
/// public or secret.
struct LabeledInterface {
  std::string entry;  // label; empty = the program's entry
  std::vector<InputSpec> inputs;
  // When set, replaces the default initialized regions (memory inputs + stack).
  std::optional<std::vector<MemRegion>> init;
  std::vector<MemRegion> mapped;  // extra regions accessible in strict mode
  uint64_t stack_top = kDefaultStackTop;
  uint64_t stack_size = kDefaultStackSize;
  uint64_t max_steps = kDefaultMaxSteps;
  bool strict = false;

  bool operator==(const LabeledInterface&) const = default;
};

class InterfaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interface file syntax, one directive per line, `#` starts a comment:
///
///   entry LABEL
///   input NAME public|secret reg rN LENGTH
///   input NAME public|secret mem ADDRESS LENGTH
///   input NAME public|secret auto LENGTH
///   init ADDRESS LENGTH
///   map ADDRESS LENGTH
///   stack TOP SIZE
///   max_steps N
///   strict
///
/// Numbers are decimal or 0x-prefixed hex.
LabeledInterface parse_interface(std::string_view text);
std::string format_interface(const LabeledInterface& iface);

/// An interface checked against a program, with auto placements assigned.
struct ResolvedInterface {
  LabeledInterface spec;  // inputs carry final addresses
  uint64_t entry_pc = 0;
  std::vector<MemRegion> initialized;
  std::vector<MemRegion> accessible;  // mapped in strict mode
  uint64_t total_bytes = 0;
  uint64_t secret_bytes = 0;
};

/// Throws InterfaceError for unknown entry labels, overlapping regions,
/// clashes with code or the stack, duplicate registers or names, use of r15,
/// and register inputs longer than 8 bytes.
ResolvedInterface resolve_interface(const LabeledInterface& iface, const Program& program);

/// Concrete bytes for every input, in interface order.
struct InputAssignment {
  std::vector<std::vector<uint8_t>> values;

  bool operator==(const InputAssignment&) const = default;
};

std::vector<uint8_t> concat_bytes(const InputAssignment& a);
InputAssignment split_bytes(const ResolvedInterface& iface, std::span<const uint8_t> bytes);

bool low_equivalent(const ResolvedInterface& iface, const InputAssignment& a, const InputAssignment& b);

MachineState initial_state(const ResolvedInterface& iface, const InputAssignment& input);
StartInfo start_info(const ResolvedInterface& iface);

std::string to_hex(std::span<const uint8_t> bytes);
// Accepts an optional 0x prefix; throws std::invalid_argument on bad digits
// or odd length.
std::vector<uint8_t> from_hex(std::string_view text);

}  // namespace leakcheck
