#include "perms/permanent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <utility>

namespace perms {

namespace {

// Staircase row intervals with every column covered, or nothing if the
// permanent is certainly zero. Uncovered columns are squeezed out.
bool normalize_rows(std::span<const Interval> rows, int n, std::vector<Interval>& out, int& out_n) {
  const int m = static_cast<int>(rows.size());
  if (m == 0) throw InvalidInput("matrix has no rows");
  for (int i = 0; i < m; ++i) {
    if (rows[i].lo < 0 || rows[i].hi >= n) throw InvalidInput("row interval out of range");
    if (i > 0 && (rows[i].lo < rows[i - 1].lo || rows[i].hi < rows[i - 1].hi))
      throw InvalidInput("row intervals are not a staircase");
    if (rows[i].empty()) return false;
  }
  // covered columns form the union of the intervals; map them to 0..n'-1
  std::vector<int> shift(static_cast<std::size_t>(n) + 1, 0);
  int removed = 0;
  int reach = -1;  // last covered column so far
  int i = 0;
  for (int c = 0; c < n; ++c) {
    while (i < m && rows[i].lo <= c) reach = std::max(reach, rows[i++].hi);
    shift[c] = removed;
    if (c > reach) ++removed;
  }
  out.resize(m);
  for (int r = 0; r < m; ++r)
    out[r] = {rows[r].lo - shift[rows[r].lo], rows[r].hi - shift[rows[r].hi]};
  out_n = n - removed;
  return m <= out_n;
}

bool greedy_positive(std::span<const Interval> rows) {
  int next_free = 0;
  for (const Interval& r : rows) {
    const int c = std::max(next_free, r.lo);
    if (c > r.hi) return false;
    next_free = c + 1;
  }
  return true;
}

}  // namespace

Workspace::Workspace() : table_a_(256), table_b_(256) {}

// Drives the reduction on the workspace's compact state: block widths plus,
// for every row, the first and last block it covers.
class Reducer {
 public:
  using Snapshot = std::function<void(const Reducer&, const Move&)>;

  explicit Reducer(Workspace& ws) : ws_(ws) {}

  void load(std::span<const Interval> rows, int n) {
    auto& cuts = ws_.cuts_;
    cuts.clear();
    cuts.push_back(0);
    for (const Interval& r : rows) {
      if (r.lo > 0) cuts.push_back(r.lo);
      if (r.hi + 1 < n) cuts.push_back(r.hi + 1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const int k = static_cast<int>(cuts.size());
    ws_.widths_.resize(k);
    for (int j = 0; j < k; ++j) ws_.widths_[j] = (j + 1 < k ? cuts[j + 1] : n) - cuts[j];
    const int m = static_cast<int>(rows.size());
    ws_.span_p_.resize(m);
    ws_.span_q_.resize(m);
    for (int i = 0; i < m; ++i) {
      ws_.span_p_[i] = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), rows[i].lo) - cuts.begin()) - 1;
      ws_.span_q_[i] = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), rows[i].hi) - cuts.begin()) - 1;
    }
    n_ = n;
    ws_.steps_.clear();
  }

  void load(const BlockRectMatrix& b) {
    const auto rows = b.row_intervals();
    // keep the caller's block structure, canonical or not
    const int k = b.blocks();
    ws_.widths_.assign(b.alpha().begin(), b.alpha().end());
    const int m = b.rows();
    ws_.span_p_.resize(m);
    ws_.span_q_.resize(m);
    int first = 0;
    int last = 0;
    for (int i = 0; i < m; ++i) {
      while (b.bot(first) < i) ++first;
      while (last + 1 < k && b.top(last + 1) <= i) ++last;
      ws_.span_p_[i] = first;
      ws_.span_q_[i] = last;
    }
    n_ = b.cols();
    ws_.steps_.clear();
  }

  int blocks() const { return static_cast<int>(ws_.widths_.size()); }
  int rows() const { return static_cast<int>(ws_.span_p_.size()); }
  int cols() const { return n_; }

  BlockRectMatrix matrix() const {
    const int k = blocks();
    const int m = rows();
    std::vector<int> top(k), bot(k);
    int first = 0;
    int last = -1;
    for (int j = 0; j < k; ++j) {
      while (first < m && ws_.span_q_[first] < j) ++first;
      while (last + 1 < m && ws_.span_p_[last + 1] <= j) ++last;
      top[j] = first;
      bot[j] = last;
    }
    std::vector<int> beta(k - 1), gamma(k - 1);
    for (int j = 0; j + 1 < k; ++j) {
      beta[j] = top[j + 1] - top[j];
      gamma[j] = bot[j + 1] - bot[j];
    }
    return BlockRectMatrix(m, ws_.widths_, std::move(beta), std::move(gamma));
  }

  Interval row_columns(int i) const {
    int lo = 0;
    for (int j = 0; j < ws_.span_p_[i]; ++j) lo += ws_.widths_[j];
    int hi = lo - 1;
    for (int j = ws_.span_p_[i]; j <= ws_.span_q_[i]; ++j) hi += ws_.widths_[j];
    return {lo, hi};
  }

  // Runs to a single block. Returns false if no admissible row can be
  // dropped (the input is outside the reducible class).
  bool run(const Snapshot& snapshot = {}) {
    for (;;) {
      merge_identical(snapshot);
      if (blocks() == 1) return true;
      const int i = choose_drop();
      if (i < 0) return false;
      drop(i, snapshot);
    }
  }

 private:
  void count_ends() {
    const int k = blocks();
    ws_.start_count_.assign(k, 0);
    ws_.end_count_.assign(k, 0);
    for (std::size_t i = 0; i < ws_.span_p_.size(); ++i) {
      ++ws_.start_count_[ws_.span_p_[i]];
      ++ws_.end_count_[ws_.span_q_[i]];
    }
  }

  void merge_identical(const Snapshot& snapshot) {
    count_ends();
    int j = 0;
    while (j + 1 < blocks()) {
      if (ws_.end_count_[j] != 0 || ws_.start_count_[j + 1] != 0) {
        ++j;
        continue;
      }
      const int k = blocks();
      if (snapshot) snapshot(*this, Move::merge(j));
      StepRecord rec{};
      rec.kind = Move::Kind::MergeBlocks;
      rec.k = k;
      rec.m = rows();
      rec.n = n_;
      rec.first_w = ws_.widths_.front();
      rec.last_w = ws_.widths_.back();
      rec.j = j;
      rec.wa = ws_.widths_[j];
      rec.wb = ws_.widths_[j + 1];
      ws_.steps_.push_back(rec);
      ++ws_.counters_.moves;

      ws_.widths_[j] += ws_.widths_[j + 1];
      ws_.widths_.erase(ws_.widths_.begin() + j + 1);
      for (std::size_t i = 0; i < ws_.span_p_.size(); ++i) {
        if (ws_.span_p_[i] > j) --ws_.span_p_[i];
        if (ws_.span_q_[i] > j) --ws_.span_q_[i];
      }
      ws_.end_count_[j] = ws_.end_count_[j + 1];
      ws_.end_count_.erase(ws_.end_count_.begin() + j + 1);
      ws_.start_count_.erase(ws_.start_count_.begin() + j + 1);
    }
  }

  int choose_drop() {
    const int k = blocks();
    const int m = rows();
    auto& h = ws_.height_;
    h.assign(k + 1, 0);
    for (int i = 0; i < m; ++i) {
      ++h[ws_.span_p_[i]];
      --h[ws_.span_q_[i] + 1];
    }
    for (int j = 1; j <= k; ++j) h[j] += h[j - 1];
    // sole_prefix[j] = number of middle blocks < j covered by exactly one row
    auto& sole = ws_.sole_prefix_;
    sole.assign(k + 1, 0);
    for (int j = 0; j < k; ++j) sole[j + 1] = sole[j] + (j > 0 && j < k - 1 && h[j] == 1 ? 1 : 0);

    // Support estimate for the next matrix: pairs (x, y) of unused columns in
    // the first and last block with x + y <= unused total, bounded by the rows
    // touching and the rows confined to each end block.
    const auto& sc = ws_.start_count_;
    const auto& ec = ws_.end_count_;
    const int u_next = n_ - m + 1;
    const int a = ws_.widths_.front();
    const int b = ws_.widths_.back();
    // number of (x, y) with x + y <= u_next, x in [xl, xh], y in [yl, yh]
    auto pairs = [&](long xl, long xh, long yl, long yh) -> long {
      long c = 0;
      for (long x = xl; x <= xh; ++x) {
        const long hi = std::min(yh, static_cast<long>(u_next) - x);
        if (hi >= yl) c += hi - yl + 1;
      }
      return c;
    };
    auto proxy = [&](int p, int q) -> long {
      long t0 = sc[0] - (p == 0), c0 = ec[0] - (q == 0);
      long tk = ec[k - 1] - (q == k - 1), ck = sc[k - 1] - (p == k - 1);
      long aa = a, bb = b;
      if (k >= 3) {
        const long e0 = ec[0] - (q == 0), s1 = sc[1] - (p == 1);
        if (e0 == 0 && s1 == 0) {
          aa += ws_.widths_[1];
          c0 = ec[1] - (q == 1);
        }
        const long ek2 = ec[k - 2] - (q == k - 2), sk1 = sc[k - 1] - (p == k - 1);
        if (ek2 == 0 && sk1 == 0) {
          bb += ws_.widths_[k - 2];
          ck = sc[k - 2] - (p == k - 2);
        }
      }
      const long xl = std::max(0L, aa - t0), xh = std::min(aa - c0, static_cast<long>(u_next));
      const long yl = std::max(0L, bb - tk), yh = std::min(bb - ck, static_cast<long>(u_next));
      return pairs(xl, xh, yl, yh);
    };
    int best_red = -1, best_oth = -1, first_c = -1;
    long red_key = std::numeric_limits<long>::max(), oth_key = std::numeric_limits<long>::max();
    long red_rank = std::numeric_limits<long>::max();
    for (int i = 0; i < m; ++i) {
      const int p = ws_.span_p_[i];
      const int q = ws_.span_q_[i];
      const bool single_end = p == q && (p == 0 || p == k - 1);
      if (!(single_end || (p <= 1 && q >= k - 2))) continue;
      const int mid_lo = std::max(p, 1);
      const int mid_hi = std::min(q, k - 2);
      if (mid_lo <= mid_hi && sole[mid_hi + 1] - sole[mid_lo] > 0) continue;
      long rank = std::numeric_limits<long>::max();
      if ((p == 0 && h[0] == 1) || (q == k - 1 && h[k - 1] == 1)) rank = -1;
      if (p >= 1 && sc[p] == 1 && ec[p - 1] == 0) rank = std::min<long>(rank, p - 1);
      if (q <= k - 2 && ec[q] == 1 && sc[q + 1] == 0) rank = std::min<long>(rank, q);
      const long key = proxy(p, q);
      if (rank != std::numeric_limits<long>::max()) {
        if (rank == -1) return i;
        if (key < red_key || (key == red_key && rank <= red_rank)) {
          red_key = key;
          red_rank = rank;
          best_red = i;
        }
        continue;
      }
      if (first_c < 0 && p == 0 && q == 0) first_c = i;
      if (key < oth_key || (key == oth_key && best_oth < 0)) {
        oth_key = key;
        best_oth = i;
      }
    }
    // removal, then a merging drop unless some other drop has a smaller
    // estimate, then rows confined to the first block
    if (best_red >= 0 && red_key <= oth_key) return best_red;
    if (first_c >= 0) return first_c;
    return best_oth >= 0 ? best_oth : best_red;
  }

  void drop(int i, const Snapshot& snapshot) {
    const int k = blocks();
    const int p = ws_.span_p_[i];
    const int q = ws_.span_q_[i];
    if (snapshot) snapshot(*this, Move::drop(i, row_columns(i)));
    StepRecord rec{};
    rec.kind = Move::Kind::DropRow;
    rec.k = k;
    rec.m = rows();
    rec.n = n_;
    rec.first_w = ws_.widths_.front();
    rec.last_w = ws_.widths_.back();
    rec.p = p;
    rec.q = q;
    rec.removed_left = p == 0 && ws_.height_[0] == 1;
    rec.removed_right = q == k - 1 && ws_.height_[k - 1] == 1;
    ws_.steps_.push_back(rec);
    ++ws_.counters_.moves;

    ws_.span_p_.erase(ws_.span_p_.begin() + i);
    ws_.span_q_.erase(ws_.span_q_.begin() + i);
    if (rec.removed_right) {
      n_ -= ws_.widths_.back();
      ws_.widths_.pop_back();
    }
    if (rec.removed_left) {
      n_ -= ws_.widths_.front();
      ws_.widths_.erase(ws_.widths_.begin());
      for (std::size_t r = 0; r < ws_.span_p_.size(); ++r) {
        --ws_.span_p_[r];
        --ws_.span_q_[r];
      }
    }
  }

  Workspace& ws_;
  int n_ = 0;
};

namespace {

double log_hyper(const LogFactorials& lf, int x, int y, int total, int in_x) {
  return lf.log_choose(x, in_x) + lf.log_choose(y, total - in_x) - lf.log_choose(x + y, total);
}

// Spreads value v over the ways `total` chosen columns split between blocks
// of widths x and y, calling put(in_x, weight * v).
template <class Put>
void split_hyper(const LogFactorials& lf, int x, int y, int total, double v, Put&& put) {
  const int lo = std::max(0, total - y);
  const int hi = std::min(x, total);
  double w = std::exp(log_hyper(lf, x, y, total, lo));
  for (int c = lo; c <= hi; ++c) {
    put(c, v * w);
    // ratio of consecutive hypergeometric terms
    w *= static_cast<double>(x - c) * static_cast<double>(total - c) /
         (static_cast<double>(c + 1) * static_cast<double>(y - total + c + 1));
  }
}

void unwind_step(const StepRecord& st, const SubpermanentTable& src, SubpermanentTable& dst,
                 const LogFactorials& lf) {
  dst.clear_with_scale(src.scale());
  dst.reserve(3 * src.size() + 8);
  const int k = st.k;
  if (st.kind == Move::Kind::MergeBlocks) {
    src.for_each_linear([&](int r, int s, double v) {
      if (k == 2) {
        split_hyper(lf, st.wa, st.wb, r, v, [&](int c, double x) { dst.add_linear(c, r - c, x); });
      } else if (st.j == 0) {
        split_hyper(lf, st.wa, st.wb, r, v, [&](int c, double x) { dst.add_linear(c, s, x); });
      } else if (st.j == k - 2) {
        split_hyper(lf, st.wb, st.wa, s, v, [&](int c, double x) { dst.add_linear(r, c, x); });
      } else {
        dst.add_linear(r, s, v);
      }
    });
    dst.normalize();
    return;
  }

  const int a = st.first_w;
  const int b = st.last_w;
  const bool has_mid = k >= 3 && st.p <= 1 && st.q >= k - 2;
  const int mid_width = k >= 3 ? st.n - a - b : 0;
  const int others = st.m - 1;
  src.for_each_linear([&](int r, int s, double v) {
    // Re-attach an emptied end block: it holds none of the other rows.
    if (st.removed_right) s = 0;
    if (st.removed_left) {
      s = k - 1 >= 2 ? s : r;
      r = 0;
    }
    if (st.p == 0 && a - r > 0) dst.add_linear(r + 1, s, v * (a - r));
    if (st.q == k - 1 && b - s > 0) dst.add_linear(r, s + 1, v * (b - s));
    if (has_mid) {
      const int free_mid = mid_width - (others - r - s);
      if (free_mid > 0) dst.add_linear(r, s, v * free_mid);
    }
  });
  dst.normalize();
}

}  // namespace

// Unwinds the recorded steps from the terminal single block (m0 rows, width
// w) and returns the log of the full permanent.
double unwind_and_sum(std::span<const StepRecord> steps, int terminal_rows, int terminal_width,
                      Workspace& ws) {
  ws.lf_.ensure(std::max(terminal_width, 1));
  for (const StepRecord& st : steps) ws.lf_.ensure(st.n + 1);
  SubpermanentTable* src = &ws.table_a_;
  SubpermanentTable* dst = &ws.table_b_;
  src->clear();
  src->set_log(terminal_rows, 0, ws.lf_.log_falling(terminal_width, terminal_rows));
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    unwind_step(*it, *src, *dst, ws.lf_);
    std::swap(src, dst);
    ws.counters_.max_table_size = std::max(ws.counters_.max_table_size, src->size());
  }
  return src->log_total();
}

using Memo = std::map<std::vector<std::pair<int, int>>, double>;

struct Engine {
  static double log_permanent_impl(std::span<const Interval> rows, int n, Workspace& ws, Memo* memo);
  static double expand_top_row(const std::vector<Interval>& rows, int n, Workspace& ws, Memo& memo);
};

// Top-row expansion for inputs the reduction cannot handle. Columns inside
// one block are interchangeable, so each block contributes width x minor.
double Engine::expand_top_row(const std::vector<Interval>& rows, int n, Workspace& ws, Memo& memo) {
  std::vector<std::pair<int, int>> key;
  key.reserve(rows.size() + 1);
  key.emplace_back(n, -1);
  for (const Interval& r : rows) key.emplace_back(r.lo, r.hi);
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  ++ws.counters_.fallbacks;
  std::vector<int> cuts{0};
  for (const Interval& r : rows) {
    if (r.lo > 0) cuts.push_back(r.lo);
    if (r.hi + 1 < n) cuts.push_back(r.hi + 1);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> terms;
  std::vector<Interval> minor(rows.size() - 1);
  const Interval top = rows.front();
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const int begin = cuts[j];
    const int end = j + 1 < cuts.size() ? cuts[j + 1] : n;
    if (begin < top.lo || begin > top.hi) continue;
    const int c = begin;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const Interval& r = rows[i];
      minor[i - 1] = {r.lo - (r.lo > c ? 1 : 0), r.hi - (r.hi >= c ? 1 : 0)};
    }
    const double sub = minor.empty() ? 0.0 : log_permanent_impl(minor, n - 1, ws, &memo);
    if (sub != kNegInf) terms.push_back(std::log(static_cast<double>(end - begin)) + sub);
  }
  const double result = log_sum_exp(terms);
  memo.emplace(std::move(key), result);
  return result;
}

double Engine::log_permanent_impl(std::span<const Interval> rows, int n, Workspace& ws, Memo* memo) {
  std::vector<Interval> norm;
  int norm_n = 0;
  ++ws.counters_.permanents;
  if (!normalize_rows(rows, n, norm, norm_n) || !greedy_positive(norm)) {
    ++ws.counters_.zero_rejected;
    return kNegInf;
  }
  Reducer red(ws);
  red.load(norm, norm_n);
  if (red.run()) {
    const int m0 = red.rows();
    const int w = ws.widths_.front();
    return unwind_and_sum(ws.steps_, m0, w, ws);
  }
  if (memo) return expand_top_row(norm, norm_n, ws, *memo);
  Memo local;
  return expand_top_row(norm, norm_n, ws, local);
}

bool is_positive_rows(std::span<const Interval> rows, int n) {
  const int m = static_cast<int>(rows.size());
  if (m > n) return false;
  for (const Interval& r : rows)
    if (r.empty()) return false;
  if (m == n) {
    for (int i = 0; i < m; ++i)
      if (rows[i].lo > i || rows[i].hi < i) return false;
    return true;
  }
  return greedy_positive(rows);
}

bool is_positive(const BlockRectMatrix& b) {
  const auto rows = b.row_intervals();
  return is_positive_rows(rows, b.cols());
}

bool is_reducible(const BlockRectMatrix& b) {
  Workspace ws;
  Reducer red(ws);
  red.load(b);
  return red.run();
}

ReductionTrace reduce_trace(const BlockRectMatrix& b) {
  if (!is_positive(b)) throw ContractViolation("reduce_trace: permanent is zero");
  Workspace ws;
  Reducer red(ws);
  red.load(b);
  std::vector<TraceStep> steps;
  const bool ok = red.run([&](const Reducer& r, const Move& mv) { steps.push_back({r.matrix(), mv}); });
  if (!ok) throw ContractViolation("reduce_trace: matrix has no admissible reduction move");
  return {std::move(steps), red.matrix()};
}

SubpermanentTable base_subpermanents(const BlockRectMatrix& b) {
  if (b.blocks() != 1) throw ContractViolation("base_subpermanents: expected a single block");
  const int w = b.alpha()[0];
  if (b.rows() > w) throw ContractViolation("base_subpermanents: more rows than columns");
  SubpermanentTable t(8);
  t.set_log(b.rows(), 0, log_factorial(w) - log_factorial(w - b.rows()));
  return t;
}

SubpermanentTable unwind_once(const SubpermanentTable& post, const TraceStep& step) {
  const BlockRectMatrix& b = step.matrix;
  const int k = b.blocks();
  StepRecord rec{};
  rec.kind = step.move.kind;
  rec.k = k;
  rec.m = b.rows();
  rec.n = b.cols();
  rec.first_w = b.alpha().front();
  rec.last_w = b.alpha().back();
  if (step.move.kind == Move::Kind::MergeBlocks) {
    rec.j = step.move.block;
    if (rec.j < 0 || rec.j + 1 >= k) throw InvalidInput("unwind_once: merge index out of range");
    rec.wa = b.alpha()[rec.j];
    rec.wb = b.alpha()[rec.j + 1];
  } else {
    const int i = step.move.row;
    if (i < 0 || i >= b.rows()) throw InvalidInput("unwind_once: row index out of range");
    int p = 0;
    while (b.bot(p) < i) ++p;
    int q = p;
    while (q + 1 < k && b.top(q + 1) <= i) ++q;
    rec.p = p;
    rec.q = q;
    rec.removed_left = p == 0 && b.top(0) == b.bot(0);
    rec.removed_right = q == k - 1 && b.top(k - 1) == b.bot(k - 1);
  }
  LogFactorials lf;
  lf.ensure(b.cols() + 1);
  SubpermanentTable out(std::max<std::size_t>(post.size() * 4, 8));
  unwind_step(rec, post, out, lf);
  return out;
}

double log_permanent_rows(std::span<const Interval> rows, int n, Workspace& ws) {
  return Engine::log_permanent_impl(rows, n, ws, nullptr);
}

double log_permanent(const BlockRectMatrix& b, Workspace& ws) {
  const auto rows = b.row_intervals();
  return log_permanent_rows(rows, b.cols(), ws);
}

double log_permanent(const BlockRectMatrix& b) {
  Workspace ws;
  return log_permanent(b, ws);
}

}  // namespace perms
