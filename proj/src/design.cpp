#include "perms/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace perms {

void BinaryDesign::validate() const {
  if (t.empty()) throw InvalidInput("design must contain at least one observation");
  if (t.size() != y.size()) throw InvalidInput("design: t and y lengths differ");
  for (double v : t)
    if (!std::isfinite(v)) throw InvalidInput("design: non-finite threshold");
  for (int v : y)
    if (v != 0 && v != 1) throw InvalidInput("design: responses must be 0 or 1");
}

int BioassayTable::total_trials() const {
  return std::accumulate(trials.begin(), trials.end(), 0);
}

void BioassayTable::validate() const {
  if (level.empty()) throw InvalidInput("bioassay table is empty");
  if (successes.size() != level.size() || trials.size() != level.size())
    throw InvalidInput("bioassay table: column lengths differ");
  for (std::size_t j = 0; j < level.size(); ++j) {
    if (!std::isfinite(level[j])) throw InvalidInput("bioassay table: non-finite level");
    if (j > 0 && !(level[j] > level[j - 1]))
      throw InvalidInput("bioassay table: levels must be strictly increasing (pre-aggregate duplicates)");
    if (trials[j] < 1) throw InvalidInput("bioassay table: trials must be >= 1");
    if (successes[j] < 0 || successes[j] > trials[j])
      throw InvalidInput("bioassay table: successes out of range");
  }
}

BlockRectMatrix::BlockRectMatrix(int m, std::vector<int> alpha, std::vector<int> beta,
                                 std::vector<int> gamma)
    : m_(m), alpha_(std::move(alpha)), beta_(std::move(beta)), gamma_(std::move(gamma)) {
  const int k = static_cast<int>(alpha_.size());
  if (m_ < 1) throw InvalidInput("block matrix needs at least one row");
  if (k < 1) throw InvalidInput("block matrix needs at least one block");
  if (static_cast<int>(beta_.size()) != k - 1 || static_cast<int>(gamma_.size()) != k - 1)
    throw InvalidInput("beta and gamma must have k - 1 entries");
  for (int a : alpha_)
    if (a < 1) throw InvalidInput("block widths must be positive");
  for (int j = 0; j + 1 < k; ++j)
    if (beta_[j] < 0 || gamma_[j] < 0) throw InvalidInput("beta and gamma must be non-negative");

  top_.resize(k);
  bot_.resize(k);
  col_begin_.resize(k);
  top_[0] = 0;
  bot_[0] = m_ - 1 - std::accumulate(gamma_.begin(), gamma_.end(), 0);
  col_begin_[0] = 0;
  for (int j = 0; j + 1 < k; ++j) {
    top_[j + 1] = top_[j] + beta_[j];
    bot_[j + 1] = bot_[j] + gamma_[j];
    col_begin_[j + 1] = col_begin_[j] + alpha_[j];
  }
  n_ = col_begin_[k - 1] + alpha_[k - 1];
  for (int j = 0; j < k; ++j) {
    if (bot_[j] < top_[j] || top_[j] < 0 || bot_[j] >= m_)
      throw InvalidInput("block with no rows");
    if (j + 1 < k && top_[j + 1] > bot_[j] + 1) throw InvalidInput("uncovered row between blocks");
  }
}

bool BlockRectMatrix::is_canonical() const {
  for (std::size_t j = 0; j < beta_.size(); ++j)
    if (beta_[j] == 0 && gamma_[j] == 0) return false;
  return true;
}

std::vector<Interval> BlockRectMatrix::row_intervals() const {
  std::vector<Interval> rows(m_);
  const int k = blocks();
  int first = 0;
  int last = 0;
  for (int i = 0; i < m_; ++i) {
    while (bot_[first] < i) ++first;
    while (last + 1 < k && top_[last + 1] <= i) ++last;
    rows[i] = {col_begin_[first], col_begin_[last] + alpha_[last] - 1};
  }
  return rows;
}

BlockRectMatrix BlockRectMatrix::from_row_intervals(std::span<const Interval> rows, int n) {
  const int m = static_cast<int>(rows.size());
  if (m < 1 || n < 1) throw InvalidInput("empty matrix");
  for (int i = 0; i < m; ++i) {
    const Interval& r = rows[i];
    if (r.empty() || r.lo < 0 || r.hi >= n) throw InvalidInput("row interval out of range or empty");
    if (i > 0 && (r.lo < rows[i - 1].lo || r.hi < rows[i - 1].hi))
      throw InvalidInput("row intervals are not a staircase");
    if (i > 0 && r.lo > rows[i - 1].hi + 1) throw InvalidInput("uncovered column");
  }
  if (rows.front().lo != 0 || rows.back().hi != n - 1) throw InvalidInput("uncovered column");

  // Block boundaries sit wherever some row starts or some row has just ended.
  std::vector<int> cuts;
  cuts.reserve(2 * m + 1);
  for (const Interval& r : rows) {
    if (r.lo > 0) cuts.push_back(r.lo);
    if (r.hi + 1 < n) cuts.push_back(r.hi + 1);
  }
  cuts.push_back(0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const int k = static_cast<int>(cuts.size());
  std::vector<int> alpha(k), top(k), bot(k);
  int first = 0;
  int last = -1;
  for (int j = 0; j < k; ++j) {
    const int c = cuts[j];
    alpha[j] = (j + 1 < k ? cuts[j + 1] : n) - c;
    while (rows[first].hi < c) ++first;
    while (last + 1 < m && rows[last + 1].lo <= c) ++last;
    top[j] = first;
    bot[j] = last;
  }
  std::vector<int> beta(k - 1), gamma(k - 1);
  for (int j = 0; j + 1 < k; ++j) {
    beta[j] = top[j + 1] - top[j];
    gamma[j] = bot[j + 1] - bot[j];
  }
  return BlockRectMatrix(m, std::move(alpha), std::move(beta), std::move(gamma));
}

CanonicalDesign canonicalize(const BinaryDesign& design) {
  design.validate();
  const std::size_t n = design.size();
  CanonicalDesign cd;
  cd.order.resize(n);
  std::iota(cd.order.begin(), cd.order.end(), std::size_t{0});
  std::stable_sort(cd.order.begin(), cd.order.end(), [&](std::size_t a, std::size_t b) {
    if (design.y[a] != design.y[b]) return design.y[a] > design.y[b];
    return design.t[a] < design.t[b];
  });
  cd.threshold.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    cd.threshold[j] = design.t[cd.order[j]];
    if (design.y[cd.order[j]] == 1) ++cd.split;
  }
  return cd;
}

Interval row_interval(double v, const CanonicalDesign& cd) {
  const auto closed_begin = cd.threshold.begin();
  const auto closed_end = closed_begin + static_cast<std::ptrdiff_t>(cd.split);
  const auto open_end = cd.threshold.end();
  // Closed sets contain v iff v <= t: a suffix of the ascending closed part.
  const int lo = static_cast<int>(std::lower_bound(closed_begin, closed_end, v) - closed_begin);
  // Open sets contain v iff t < v: a prefix of the ascending open part.
  const int open_count = static_cast<int>(std::lower_bound(closed_end, open_end, v) - closed_end);
  return {lo, static_cast<int>(cd.split) + open_count - 1};
}

bool sample_rows(std::span<const double> sorted_x, const CanonicalDesign& cd, std::vector<Interval>& rows) {
  const int n = static_cast<int>(sorted_x.size());
  if (sorted_x.size() != cd.size()) throw InvalidInput("sample length differs from design size");
  rows.resize(cd.size());
  // thresholds ascend within each part, so one forward walk per part suffices
  int below = 0;
  for (std::size_t j = 0; j < cd.size(); ++j) {
    if (j == cd.split) below = 0;
    while (below < n && sorted_x[below] <= cd.threshold[j]) ++below;
    rows[j] = j < cd.split ? Interval{0, below - 1} : Interval{below, n - 1};
    if (rows[j].empty()) return false;
  }
  return true;
}

std::optional<BlockRectMatrix> from_sorted_sample(std::span<const double> sorted_x,
                                                  const CanonicalDesign& cd) {
  const int n = static_cast<int>(sorted_x.size());
  std::vector<Interval> rows;
  if (!sample_rows(sorted_x, cd, rows)) return std::nullopt;
  for (std::size_t j = 1; j < rows.size(); ++j)
    if (rows[j].lo > rows[j - 1].hi + 1) return std::nullopt;
  if (rows.front().lo != 0 || rows.back().hi != n - 1) return std::nullopt;
  return BlockRectMatrix::from_row_intervals(rows, n);
}

std::optional<BlockRectMatrix> from_sample(std::span<const double> x, const CanonicalDesign& cd) {
  if (x.size() != cd.size()) throw InvalidInput("sample length differs from design size");
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidInput("non-finite latent value");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  return from_sorted_sample(sorted, cd);
}

DenseMatrix to_dense(const BlockRectMatrix& b) {
  DenseMatrix a(b.rows(), std::vector<std::uint8_t>(b.cols(), 0));
  const auto rows = b.row_intervals();
  for (int i = 0; i < b.rows(); ++i)
    for (int c = rows[i].lo; c <= rows[i].hi; ++c) a[i][c] = 1;
  return a;
}

DenseMatrix dense_from_sample(std::span<const double> x, const BinaryDesign& design) {
  if (x.size() != design.size()) throw InvalidInput("sample length differs from design size");
  const std::size_t n = x.size();
  DenseMatrix a(n, std::vector<std::uint8_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i][j] = design.y[j] == 1 ? x[i] <= design.t[j] : x[i] > design.t[j];
  return a;
}

BinaryDesign expand_bioassay(const BioassayTable& table) {
  table.validate();
  BinaryDesign d;
  for (std::size_t j = 0; j < table.num_levels(); ++j) {
    for (int i = 0; i < table.trials[j]; ++i) {
      d.t.push_back(table.level[j]);
      d.y.push_back(i < table.successes[j] ? 1 : 0);
    }
  }
  return d;
}

}  // namespace perms
