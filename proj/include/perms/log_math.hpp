#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace perms {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// Max-shifted LogSumExp over the finite entries; -inf if there are none.
inline double log_sum_exp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs)
    if (std::isfinite(x) && x > mx) mx = x;
  if (mx == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs)
    if (std::isfinite(x)) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

// Cached log n! for n up to a growing bound.
class LogFactorials {
 public:
  LogFactorials() : table_{0.0} {}

  void ensure(int n) {
    if (n < static_cast<int>(table_.size())) return;
    const int old = static_cast<int>(table_.size());
    table_.resize(static_cast<std::size_t>(n) + 1);
    for (int i = old; i <= n; ++i) table_[i] = std::lgamma(static_cast<double>(i) + 1.0);
  }

  double operator()(int n) const { return table_[static_cast<std::size_t>(n)]; }

  double log_choose(int n, int k) const { return table_[n] - table_[k] - table_[n - k]; }

  // log(n (n-1) ... (n-k+1))
  double log_falling(int n, int k) const { return table_[n] - table_[n - k]; }

 private:
  std::vector<double> table_;
};

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline double log_choose(int n, int k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace perms
