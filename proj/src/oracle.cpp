#include "perms/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <unordered_map>

#include "perms/log_math.hpp"

namespace perms {

namespace {

using Count128 = unsigned __int128;

ExactCount to_exact(Count128 v) {
  ExactCount out = static_cast<std::uint64_t>(v >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(v);
  return out;
}

void check_dense(const DenseMatrix& a, int& m, int& n) {
  m = static_cast<int>(a.size());
  if (m == 0) throw InvalidInput("matrix has no rows");
  n = static_cast<int>(a.front().size());
  for (const auto& row : a)
    if (static_cast<int>(row.size()) != n) throw InvalidInput("ragged matrix");
  if (m > n) throw InvalidInput("more rows than columns");
  if (n > kDenseOracleMaxCols) throw OracleRefusal("per_exact_dense: more than 20 columns");
}

std::uint64_t enumerate_rows(const DenseMatrix& a, int i, std::uint32_t used) {
  if (i == static_cast<int>(a.size())) return 1;
  std::uint64_t total = 0;
  const int n = static_cast<int>(a[i].size());
  for (int c = 0; c < n; ++c)
    if (a[i][c] && !(used >> c & 1u)) total += enumerate_rows(a, i + 1, used | 1u << c);
  return total;
}

}  // namespace

ExactCount per_exact_dense(const DenseMatrix& a) {
  int m = 0;
  int n = 0;
  check_dense(a, m, n);
  if (n <= 8) return ExactCount(enumerate_rows(a, 0, 0));

  // masks of columns used by the first i rows
  std::unordered_map<std::uint32_t, Count128> cur{{0u, 1}}, next;
  for (int i = 0; i < m; ++i) {
    next.clear();
    for (const auto& [mask, cnt] : cur)
      for (int c = 0; c < n; ++c)
        if (a[i][c] && !(mask >> c & 1u)) next[mask | 1u << c] += cnt;
    cur.swap(next);
    if (cur.empty()) return 0;
  }
  Count128 total = 0;
  for (const auto& [mask, cnt] : cur) total += cnt;
  return to_exact(total);
}

ExactCount per_class_dp(const BlockRectMatrix& b) {
  const int m = b.rows();
  const int k = b.blocks();
  std::vector<int> p(m), q(m);
  for (int i = 0, first = 0, last = 0; i < m; ++i) {
    while (b.bot(first) < i) ++first;
    while (last + 1 < k && b.top(last + 1) <= i) ++last;
    p[i] = first;
    q[i] = last;
  }
  struct Class {
    int p, q, size;
  };
  std::vector<Class> classes;
  for (int i = 0; i < m; ++i) {
    if (!classes.empty() && classes.back().p == p[i] && classes.back().q == q[i])
      ++classes.back().size;
    else
      classes.push_back({p[i], q[i], 1});
  }
  double states = 1.0;
  for (const Class& c : classes) states *= c.size + 1;
  if (states > kClassDpMaxStates) throw OracleRefusal("per_class_dp: state space above limit");

  const int nc = static_cast<int>(classes.size());
  int max_size = 0;
  for (const Class& c : classes) max_size = std::max(max_size, c.size);
  const int max_w = *std::max_element(b.alpha().begin(), b.alpha().end());
  std::vector<std::vector<ExactCount>> binom(max_size + 1);
  for (int u = 0; u <= max_size; ++u) {
    binom[u].resize(u + 1);
    binom[u][0] = 1;
    for (int d = 1; d <= u; ++d) binom[u][d] = binom[u][d - 1] * (u - d + 1) / d;
  }
  std::vector<ExactCount> falling(max_w + 1);

  // state: unmatched rows per class; within a block the classes take their
  // columns one at a time, with the count used so far kept alongside
  using State = std::vector<int>;
  std::map<State, ExactCount> cur;
  State init(nc);
  for (int c = 0; c < nc; ++c) init[c] = classes[c].size;
  cur[init] = 1;

  for (int j = 0; j < k; ++j) {
    const int w = b.alpha()[j];
    falling[0] = 1;
    for (int d = 1; d <= w; ++d) falling[d] = falling[d - 1] * (w - d + 1);
    std::map<std::pair<State, int>, ExactCount> part, part_next;
    for (auto& [state, cnt] : cur) part[{state, 0}] = std::move(cnt);
    for (int c = 0; c < nc; ++c) {
      if (classes[c].p > j || classes[c].q < j) continue;
      part_next.clear();
      for (const auto& [key, cnt] : part) {
        State s = key.first;
        const int used = key.second;
        const int u = s[c];
        const int lo = classes[c].q == j ? u : 0;
        for (int d = lo; d <= u && used + d <= w; ++d) {
          s[c] = u - d;
          part_next[{s, used + d}] += cnt * binom[u][d];
        }
      }
      part.swap(part_next);
    }
    cur.clear();
    for (const auto& [key, cnt] : part) cur[key.first] += cnt * falling[key.second];
    if (cur.empty()) return 0;
  }
  ExactCount total = 0;
  for (const auto& [state, cnt] : cur) total += cnt;
  return total;
}

ExactCount count_perms_brute(std::span<const double> x, const BinaryDesign& design) {
  design.validate();
  const int n = static_cast<int>(design.size());
  if (static_cast<int>(x.size()) != n) throw InvalidInput("sample length differs from design size");
  if (n > kBruteMaxN) throw OracleRefusal("count_perms_brute: n above 8");
  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      const double v = x[sigma[j]];
      ok = design.y[j] == 1 ? v <= design.t[j] : v > design.t[j];
    }
    count += ok;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return count;
}

void for_each_small_blockmat(int n_max, const std::function<void(const BlockRectMatrix&)>& f) {
  if (n_max > 7) throw OracleRefusal("gen_small_blockmats: n_max above 7");
  std::vector<Interval> rows;
  for (int n = 1; n <= n_max; ++n) {
    rows.assign(n, {});
    auto rec = [&](auto&& self, int i) -> void {
      if (i == n) {
        if (rows.back().hi == n - 1) f(BlockRectMatrix::from_row_intervals(rows, n));
        return;
      }
      const Interval prev = i > 0 ? rows[i - 1] : Interval{0, 0};
      // the next row may not start past the reach of the previous one
      const int lo_max = i > 0 ? prev.hi + 1 : 0;
      for (int lo = prev.lo; lo <= std::min(lo_max, n - 1); ++lo)
        for (int hi = std::max(prev.hi, lo); hi < n; ++hi) {
          rows[i] = {lo, hi};
          self(self, i + 1);
        }
    };
    rec(rec, 0);
  }
}

std::vector<BlockRectMatrix> gen_small_blockmats(int n_max) {
  std::vector<BlockRectMatrix> out;
  for_each_small_blockmat(n_max, [&](const BlockRectMatrix& b) { out.push_back(b); });
  return out;
}

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wstringop-overflow"
#pragma GCC diagnostic ignored "-Wstringop-overread"
double log_count(const ExactCount& c) {
  if (c <= 0) return kNegInf;
  const std::size_t bits = boost::multiprecision::msb(c);
  if (bits < 1000) return std::log(c.convert_to<double>());
  const std::size_t shift = bits - 60;
  const ExactCount top = c >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}
#pragma GCC diagnostic pop

}  // namespace perms
