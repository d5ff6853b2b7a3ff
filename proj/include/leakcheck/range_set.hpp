#pragma once

#include <cstdint>
#include <map>

namespace leakcheck {

// Set of 64-bit addresses stored as disjoint half-open intervals.
class RangeSet {
 public:
  void insert(uint64_t start, uint64_t length) {
    if (length == 0) return;
    uint64_t end = start + length;
    if (end <= start) {  // wraps; the topmost byte of the address space is not representable
      insert(start, UINT64_MAX - start);
      insert(0, end);
      return;
    }
    auto it = ranges_.upper_bound(start);
    if (it != ranges_.begin()) {
      auto prev = std::prev(it);
      if (prev->second >= start) {
        start = prev->first;
        if (prev->second > end) end = prev->second;
        it = ranges_.erase(prev);
      }
    }
    while (it != ranges_.end() && it->first <= end) {
      if (it->second > end) end = it->second;
      it = ranges_.erase(it);
    }
    ranges_.emplace(start, end);
  }

  bool contains(uint64_t addr) const { return contains(addr, 1); }

  // True when every address in [start, start+length) is present.
  bool contains(uint64_t start, uint64_t length) const {
    if (length == 0) return true;
    uint64_t end = start + length;
    if (end <= start) return false;  // wrapping ranges are never fully present
    auto it = ranges_.upper_bound(start);
    if (it == ranges_.begin()) return false;
    --it;
    return it->first <= start && end <= it->second;
  }

  bool empty() const { return ranges_.empty(); }
  void clear() { ranges_.clear(); }
  const std::map<uint64_t, uint64_t>& intervals() const { return ranges_; }

  bool operator==(const RangeSet&) const = default;

 private:
  std::map<uint64_t, uint64_t> ranges_;  // start -> end (exclusive)
};

}  // namespace leakcheck
