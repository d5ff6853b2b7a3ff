#include "leakcheck/interface.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace leakcheck {

namespace {

[[noreturn]] void fail(size_t line, const std::string& msg) {
  throw InterfaceError("interface line " + std::to_string(line) + ": " + msg);
}

uint64_t parse_u64(std::string_view s, size_t line) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) fail(line, "malformed number '" + std::string(s) + "'");
  return v;
}

std::string hex_addr(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

bool overlaps(const MemRegion& a, const MemRegion& b) {
  return a.address < b.address + b.length && b.address < a.address + a.length;
}

std::string describe(const MemRegion& r) { return "[" + hex_addr(r.address) + ", " + hex_addr(r.address + r.length) + ")"; }

}  // namespace

LabeledInterface parse_interface(std::string_view text) {
  LabeledInterface iface;
  std::istringstream in{std::string(text)};
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    auto expect = [&](size_t n) {
      if (tok.size() != n) fail(line_no, "'" + kw + "' takes " + std::to_string(n - 1) + " argument(s)");
    };
    auto num = [&](size_t i) { return parse_u64(tok[i], line_no); };
    if (kw == "entry") {
      expect(2);
      iface.entry = tok[1];
    } else if (kw == "stack") {
      expect(3);
      iface.stack_top = num(1);
      iface.stack_size = num(2);
    } else if (kw == "max_steps") {
      expect(2);
      iface.max_steps = num(1);
      if (iface.max_steps == 0) fail(line_no, "max_steps must be positive");
    } else if (kw == "strict") {
      if (tok.size() == 2) {
        iface.strict = num(1) != 0;
      } else {
        expect(1);
        iface.strict = true;
      }
    } else if (kw == "init" || kw == "map") {
      expect(3);
      MemRegion r{num(1), num(2)};
      if (kw == "init") {
        if (!iface.init) iface.init.emplace();
        iface.init->push_back(r);
      } else {
        iface.mapped.push_back(r);
      }
    } else if (kw == "input") {
      if (tok.size() < 5) fail(line_no, "'input' needs NAME SECRECY PLACEMENT ... LENGTH");
      InputSpec spec;
      spec.name = tok[1];
      if (tok[2] == "public") {
        spec.secrecy = Secrecy::Public;
      } else if (tok[2] == "secret") {
        spec.secrecy = Secrecy::Secret;
      } else {
        fail(line_no, "secrecy must be 'public' or 'secret', got '" + tok[2] + "'");
      }
      const std::string& where = tok[3];
      if (where == "reg") {
        expect(6);
        const std::string& r = tok[4];
        unsigned idx = 0;
        bool ok = false;
        if (r == "sp") {
          idx = kStackPointer;
          ok = true;
        } else if (r.size() >= 2 && r[0] == 'r') {
          auto [p, ec] = std::from_chars(r.data() + 1, r.data() + r.size(), idx);
          ok = ec == std::errc{} && p == r.data() + r.size() && idx < kNumRegisters;
        }
        if (!ok) fail(line_no, "bad register '" + r + "'");
        spec.placement = Placement::Register;
        spec.reg = static_cast<uint8_t>(idx);
        spec.length = num(5);
      } else if (where == "mem") {
        expect(6);
        spec.placement = Placement::Memory;
        spec.address = num(4);
        spec.length = num(5);
      } else if (where == "auto") {
        expect(5);
        spec.placement = Placement::Auto;
        spec.length = num(4);
      } else {
        fail(line_no, "placement must be 'reg', 'mem' or 'auto', got '" + where + "'");
      }
      if (spec.length == 0) fail(line_no, "input '" + spec.name + "' has zero length");
      iface.inputs.push_back(std::move(spec));
    } else {
      fail(line_no, "unknown directive '" + kw + "'");
    }
  }
  return iface;
}

std::string format_interface(const LabeledInterface& iface) {
  std::ostringstream os;
  if (!iface.entry.empty()) os << "entry " << iface.entry << "\n";
  for (const auto& in : iface.inputs) {
    os << "input " << in.name << ' ' << (in.secrecy == Secrecy::Secret ? "secret" : "public") << ' ';
    switch (in.placement) {
      case Placement::Register:
        os << "reg r" << unsigned{in.reg} << ' ' << in.length;
        break;
      case Placement::Memory:
        os << "mem " << hex_addr(in.address) << ' ' << in.length;
        break;
      case Placement::Auto:
        os << "auto " << in.length;
        break;
    }
    os << "\n";
  }
  if (iface.init) {
    for (const auto& r : *iface.init) os << "init " << hex_addr(r.address) << ' ' << r.length << "\n";
  }
  for (const auto& r : iface.mapped) os << "map " << hex_addr(r.address) << ' ' << r.length << "\n";
  if (iface.stack_top != kDefaultStackTop || iface.stack_size != kDefaultStackSize) {
    os << "stack " << hex_addr(iface.stack_top) << ' ' << hex_addr(iface.stack_size) << "\n";
  }
  if (iface.max_steps != kDefaultMaxSteps) os << "max_steps " << iface.max_steps << "\n";
  if (iface.strict) os << "strict\n";
  return os.str();
}

ResolvedInterface resolve_interface(const LabeledInterface& iface, const Program& program) {
  ResolvedInterface out;
  out.spec = iface;
  if (iface.entry.empty()) {
    out.entry_pc = program.entry;
  } else {
    auto addr = program.label(iface.entry);
    if (!addr) throw InterfaceError("entry label '" + iface.entry + "' not found in program");
    out.entry_pc = *addr;
  }
  if (iface.stack_size == 0 || iface.stack_size > iface.stack_top) throw InterfaceError("bad stack size");

  const MemRegion code{program.code_base, program.code_end() - program.code_base};
  const MemRegion stack{iface.stack_top - iface.stack_size, iface.stack_size};
  std::vector<std::pair<std::string, MemRegion>> regions{{"stack", stack}};
  if (overlaps(code, stack)) throw InterfaceError("stack " + describe(stack) + " overlaps the code");

  auto check_region = [&](const std::string& name, const MemRegion& r) {
    if (r.address + r.length < r.address) throw InterfaceError("input '" + name + "' wraps the address space");
    if (overlaps(r, code)) throw InterfaceError("input '" + name + "' " + describe(r) + " overlaps the code");
    for (const auto& [other, region] : regions) {
      if (overlaps(r, region)) throw InterfaceError("input '" + name + "' " + describe(r) + " overlaps " + other);
    }
    regions.emplace_back("input '" + name + "'", r);
  };

  std::set<std::string> names;
  std::set<uint8_t> regs;
  for (const auto& in : out.spec.inputs) {
    if (!names.insert(in.name).second) throw InterfaceError("duplicate input name '" + in.name + "'");
    if (in.length == 0) throw InterfaceError("input '" + in.name + "' has zero length");
    if (in.placement == Placement::Register) {
      if (in.reg == kStackPointer) throw InterfaceError("input '" + in.name + "': r15 is reserved for the stack pointer");
      if (in.length > 8) throw InterfaceError("register input '" + in.name + "' is longer than 8 bytes");
      if (!regs.insert(in.reg).second) throw InterfaceError("register r" + std::to_string(in.reg) + " used twice");
    } else if (in.placement == Placement::Memory) {
      check_region(in.name, {in.address, in.length});
    }
  }

  uint64_t cursor = kAutoPlacementBase;
  auto align = [](uint64_t v) { return (v + kAutoPlacementAlign - 1) & ~(kAutoPlacementAlign - 1); };
  for (auto& in : out.spec.inputs) {
    if (in.placement != Placement::Auto) continue;
    MemRegion r{align(cursor), in.length};
    for (bool moved = true; moved;) {
      moved = false;
      for (const auto& [_, region] : regions) {
        if (overlaps(r, region)) {
          r.address = align(region.address + region.length);
          moved = true;
        }
      }
      if (overlaps(r, code)) {
        r.address = align(code.address + code.length);
        moved = true;
      }
    }
    in.placement = Placement::Memory;
    in.address = r.address;
    check_region(in.name, r);
    cursor = r.address + r.length;
  }

  for (const auto& in : out.spec.inputs) {
    out.total_bytes += in.length;
    if (in.secrecy == Secrecy::Secret) out.secret_bytes += in.length;
  }

  if (iface.init) {
    out.initialized = *iface.init;
  } else {
    for (const auto& in : out.spec.inputs) {
      if (in.placement == Placement::Memory) out.initialized.push_back({in.address, in.length});
    }
    out.initialized.push_back(stack);
  }
  for (const auto& [_, r] : regions) out.accessible.push_back(r);
  if (iface.init) out.accessible.insert(out.accessible.end(), iface.init->begin(), iface.init->end());
  out.accessible.insert(out.accessible.end(), iface.mapped.begin(), iface.mapped.end());
  return out;
}

std::vector<uint8_t> concat_bytes(const InputAssignment& a) {
  std::vector<uint8_t> out;
  for (const auto& v : a.values) out.insert(out.end(), v.begin(), v.end());
  return out;
}

InputAssignment split_bytes(const ResolvedInterface& iface, std::span<const uint8_t> bytes) {
  if (bytes.size() != iface.total_bytes) {
    throw std::invalid_argument("input has " + std::to_string(bytes.size()) + " bytes, interface expects " +
                                std::to_string(iface.total_bytes));
  }
  InputAssignment a;
  size_t pos = 0;
  for (const auto& in : iface.spec.inputs) {
    a.values.emplace_back(bytes.begin() + pos, bytes.begin() + pos + in.length);
    pos += in.length;
  }
  return a;
}

bool low_equivalent(const ResolvedInterface& iface, const InputAssignment& a, const InputAssignment& b) {
  const auto& inputs = iface.spec.inputs;
  if (a.values.size() != inputs.size() || b.values.size() != inputs.size()) return false;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (a.values[i].size() != inputs[i].length || b.values[i].size() != inputs[i].length) return false;
    if (inputs[i].secrecy == Secrecy::Public && a.values[i] != b.values[i]) return false;
  }
  return true;
}

MachineState initial_state(const ResolvedInterface& iface, const InputAssignment& input) {
  MachineState s;
  s.pc = iface.entry_pc;
  s.regs[kStackPointer] = iface.spec.stack_top;
  s.mem.set_strict(iface.spec.strict);
  for (const auto& r : iface.accessible) s.mem.map(r.address, r.length);
  const auto& inputs = iface.spec.inputs;
  if (input.values.size() != inputs.size()) throw std::invalid_argument("assignment does not match interface");
  for (size_t i = 0; i < inputs.size(); ++i) {
    const auto& bytes = input.values[i];
    if (bytes.size() != inputs[i].length) throw std::invalid_argument("wrong length for input '" + inputs[i].name + "'");
    if (inputs[i].placement == Placement::Register) {
      uint64_t v = 0;
      for (size_t b = 0; b < bytes.size(); ++b) v |= uint64_t{bytes[b]} << (8 * b);
      s.regs[inputs[i].reg] = v;
    } else {
      s.mem.write_bytes(inputs[i].address, bytes);
    }
  }
  return s;
}

StartInfo start_info(const ResolvedInterface& iface) {
  StartInfo info;
  info.initialized = iface.initialized;
  info.stack_low = iface.spec.stack_top - iface.spec.stack_size;
  info.stack_high = iface.spec.stack_top;
  return info;
}

std::string to_hex(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

std::vector<uint8_t> from_hex(std::string_view text) {
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
  if (text.size() % 2 != 0) throw std::invalid_argument("hex input has odd length");
  auto digit = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::vector<uint8_t> out;
  for (size_t i = 0; i < text.size(); i += 2) {
    int hi = digit(text[i]);
    int lo = digit(text[i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("malformed hex input");
    out.push_back(static_cast<uint8_t>(hi * 16 + lo));
  }
  return out;
}

}  // namespace leakcheck
