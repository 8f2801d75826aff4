#include "perms/subpermanent_table.hpp"

#include <bit>
#include <cmath>

#include "perms/log_math.hpp"

namespace perms {

SubpermanentTable::SubpermanentTable(std::size_t initial_capacity) {
  const std::size_t cap = std::bit_ceil(std::max<std::size_t>(initial_capacity, 8));
  slots_.assign(cap, Slot{kEmpty, 0.0});
  mask_ = cap - 1;
}

std::size_t SubpermanentTable::probe(std::uint64_t key) const {
  std::size_t slot = mix(key) & mask_;
  while (slots_[slot].key != kEmpty && slots_[slot].key != key) slot = (slot + 1) & mask_;
  return slot;
}

void SubpermanentTable::grow() {
  std::vector<Slot> old(slots_.size() * 2, Slot{kEmpty, 0.0});
  old.swap(slots_);
  mask_ = slots_.size() - 1;
  std::vector<std::uint32_t> old_used;
  old_used.swap(used_);
  used_.reserve(old_used.size());
  for (std::uint32_t slot : old_used) {
    const std::size_t dst = probe(old[slot].key);
    slots_[dst] = old[slot];
    used_.push_back(static_cast<std::uint32_t>(dst));
  }
}

void SubpermanentTable::reserve(std::size_t n) {
  while (static_cast<double>(n) > kMaxLoad * static_cast<double>(slots_.size())) grow();
}

std::size_t SubpermanentTable::slot_for(int r, int s) {
  if (static_cast<double>(used_.size() + 1) > kMaxLoad * static_cast<double>(slots_.size())) grow();
  const std::uint64_t key = pack(r, s);
  const std::size_t slot = probe(key);
  if (slots_[slot].key == kEmpty) {
    slots_[slot] = Slot{key, 0.0};
    used_.push_back(static_cast<std::uint32_t>(slot));
  }
  return slot;
}

void SubpermanentTable::rescale(double new_scale) {
  const double f = std::exp(scale_ - new_scale);
  for (std::uint32_t slot : used_) slots_[slot].value *= f;
  scale_ = new_scale;
}

void SubpermanentTable::add_log(int r, int s, double log_value) {
  if (!std::isfinite(log_value)) return;
  if (used_.empty()) scale_ = log_value;
  // keep exp(log_value - scale) well inside the double range
  if (log_value - scale_ > 600.0) rescale(log_value);
  const double x = std::exp(log_value - scale_);
  if (x == 0.0) return;
  slots_[slot_for(r, s)].value += x;
}

void SubpermanentTable::set_log(int r, int s, double log_value) {
  if (!std::isfinite(log_value)) return;
  if (used_.empty()) scale_ = log_value;
  if (log_value - scale_ > 600.0) rescale(log_value);
  const double x = std::exp(log_value - scale_);
  if (x == 0.0) return;
  slots_[slot_for(r, s)].value = x;
}

void SubpermanentTable::normalize() {
  double mx = 0.0;
  for (std::uint32_t slot : used_) mx = std::max(mx, slots_[slot].value);
  if (mx <= 0.0 || mx == 1.0) return;
  const double inv = 1.0 / mx;
  for (std::uint32_t slot : used_) slots_[slot].value *= inv;
  scale_ += std::log(mx);
}

std::optional<double> SubpermanentTable::find(int r, int s) const {
  const std::size_t slot = probe(pack(r, s));
  if (slots_[slot].key == kEmpty) return std::nullopt;
  return std::log(slots_[slot].value) + scale_;
}

void SubpermanentTable::clear() {
  for (std::uint32_t slot : used_) slots_[slot].key = kEmpty;
  used_.clear();
}

double SubpermanentTable::log_total() const {
  double sum = 0.0;
  for (std::uint32_t slot : used_) sum += slots_[slot].value;
  if (sum <= 0.0) return kNegInf;
  return std::log(sum) + scale_;
}

std::vector<SubpermanentTable::Entry> SubpermanentTable::entries() const {
  std::vector<Entry> out;
  out.reserve(used_.size());
  for_each([&](const Entry& e) { out.push_back(e); });
  return out;
}

}  // namespace perms
