#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace perms {

// Sparse map (r, s) -> log per_{r,s}. Open addressing with linear probing;
// only finite values are stored. Values are held as exp(log value - scale)
// with one log scale per table, so accumulation is a plain addition. A side list of occupied slots keeps clear()
// and iteration proportional to the number of entries, so one table can be
// recycled across many permanent evaluations.
class SubpermanentTable {
 public:
  struct Entry {
    int r;
    int s;
    double log_value;
  };

  explicit SubpermanentTable(std::size_t initial_capacity = 64);

  // per_{r,s} += exp(log_value), accumulated in the log domain.
  void add_log(int r, int s, double log_value);
  void set_log(int r, int s, double log_value);
  std::optional<double> find(int r, int s) const;

  void clear();
  std::size_t size() const { return used_.size(); }
  std::size_t capacity() const { return slots_.size(); }
  // Room for n entries without rehashing.
  void reserve(std::size_t n);
  bool empty() const { return used_.empty(); }

  // LogSumExp over all entries; -inf when empty.
  double log_total() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::uint32_t slot : used_)
      f(Entry{unpack_r(slots_[slot].key), unpack_s(slots_[slot].key), std::log(slots_[slot].value) + scale_});
  }

  std::vector<Entry> entries() const;

  // Linear interface: value = x * exp(scale()).
  double scale() const { return scale_; }
  void clear_with_scale(double scale) {
    clear();
    scale_ = scale;
  }
  void add_linear(int r, int s, double x) {
    if (x <= 0.0) return;
    if (static_cast<double>(used_.size() + 1) > kMaxLoad * static_cast<double>(slots_.size())) grow();
    const std::uint64_t key = pack(r, s);
    std::size_t slot = mix(key) & mask_;
    for (;;) {
      Slot& e = slots_[slot];
      if (e.key == key) {
        e.value += x;
        return;
      }
      if (e.key == kEmpty) {
        e.key = key;
        e.value = x;
        used_.push_back(static_cast<std::uint32_t>(slot));
        return;
      }
      slot = (slot + 1) & mask_;
    }
  }
  // Divides by the largest value and folds it into the scale.
  void normalize();

  template <class F>
  void for_each_linear(F&& f) const {
    for (std::uint32_t slot : used_) f(unpack_r(slots_[slot].key), unpack_s(slots_[slot].key), slots_[slot].value);
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  static constexpr double kMaxLoad = 0.7;

  static std::uint64_t pack(int r, int s) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 32) |
           static_cast<std::uint32_t>(s);
  }
  static int unpack_r(std::uint64_t key) { return static_cast<int>(key >> 32); }
  static int unpack_s(std::uint64_t key) { return static_cast<int>(key & 0xffffffffu); }
  // r scattered by a multiplicative hash; consecutive s stay in adjacent slots
  static std::uint64_t mix(std::uint64_t x) {
    return (x >> 32) * 0x9e3779b97f4a7c15ULL + x;
  }

  struct Slot {
    std::uint64_t key;
    double value;
  };

  std::size_t probe(std::uint64_t key) const;
  std::size_t slot_for(int r, int s);
  void grow();
  void rescale(double new_scale);

  std::vector<Slot> slots_;
  std::vector<std::uint32_t> used_;
  std::uint64_t mask_ = 0;
  double scale_ = 0.0;
};

}  // namespace perms
