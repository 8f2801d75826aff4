#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace perms {

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Observed binary responses: y_i = 1{X_i <= t_i}.
struct BinaryDesign {
  std::vector<double> t;
  std::vector<int> y;

  std::size_t size() const { return t.size(); }
  void validate() const;
};

// Dosage-level summary of repeated trials.
struct BioassayTable {
  std::vector<double> level;
  std::vector<int> successes;
  std::vector<int> trials;

  std::size_t num_levels() const { return level.size(); }
  int total_trials() const;
  void validate() const;
};

// A design with its sets reordered so that, for any value v, the sets
// containing v form one contiguous index range: the closed sets (-inf, t]
// (y = 1) ascending by t, then the open sets (t, inf) (y = 0) ascending by t.
struct CanonicalDesign {
  std::vector<std::size_t> order;  // order[j] = original index of set j
  std::vector<double> threshold;   // threshold of set j
  std::size_t split = 0;           // sets [0, split) are closed-left (y = 1)

  std::size_t size() const { return order.size(); }
};

// Inclusive 0-based index interval.
struct Interval {
  int lo = 0;
  int hi = -1;

  bool empty() const { return hi < lo; }
  int length() const { return empty() ? 0 : hi - lo + 1; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Compact (m, k, alpha, beta, gamma) encoding of a block-rectangular 0-1
// matrix. Block j covers columns [sum alpha_<j, sum alpha_<=j) and rows
// [top_j, bot_j] with top_0 = 0, bot_0 = m - 1 - sum(gamma),
// top_{j+1} = top_j + beta_j and bot_{j+1} = bot_j + gamma_j.
//
// The constructor enforces the structural invariants (non-empty blocks, every
// row covered, bot_{k-1} = m - 1). Canonical minimality ((beta_j, gamma_j) !=
// (0, 0)) is reported by is_canonical(); intermediate matrices of a reduction
// are allowed to violate it.
class BlockRectMatrix {
 public:
  BlockRectMatrix(int m, std::vector<int> alpha, std::vector<int> beta, std::vector<int> gamma);

  // Builds the canonical matrix from staircase row intervals over n columns.
  // Throws InvalidInput if the rows are not a staircase, a row is empty, or
  // a column is uncovered.
  static BlockRectMatrix from_row_intervals(std::span<const Interval> rows, int n);

  int rows() const { return m_; }
  int cols() const { return n_; }
  int blocks() const { return static_cast<int>(alpha_.size()); }
  const std::vector<int>& alpha() const { return alpha_; }
  const std::vector<int>& beta() const { return beta_; }
  const std::vector<int>& gamma() const { return gamma_; }

  int top(int j) const { return top_[j]; }
  int bot(int j) const { return bot_[j]; }
  int col_begin(int j) const { return col_begin_[j]; }

  bool is_canonical() const;
  std::vector<Interval> row_intervals() const;

  friend bool operator==(const BlockRectMatrix&, const BlockRectMatrix&) = default;

 private:
  int m_;
  int n_ = 0;
  std::vector<int> alpha_, beta_, gamma_;
  std::vector<int> top_, bot_, col_begin_;
};

using DenseMatrix = std::vector<std::vector<std::uint8_t>>;

CanonicalDesign canonicalize(const BinaryDesign& design);

// Sets of cd (canonical indices) that contain v; empty when none do.
Interval row_interval(double v, const CanonicalDesign& cd);

// Matrix of a latent sample against the design, rows = canonical sets and
// columns = sorted sample values. Its permanent equals the permutation
// number w(x; B). std::nullopt means the permanent is certainly zero (some
// value lies in no set, or some set holds no value).
std::optional<BlockRectMatrix> from_sample(std::span<const double> x, const CanonicalDesign& cd);

// Same, with x already sorted ascending; used by the hot path.
std::optional<BlockRectMatrix> from_sorted_sample(std::span<const double> sorted_x,
                                                  const CanonicalDesign& cd);

// Row intervals of the same matrix, written into rows. Returns false if some
// set holds no value. Columns outside every row may remain.
bool sample_rows(std::span<const double> sorted_x, const CanonicalDesign& cd, std::vector<Interval>& rows);

DenseMatrix to_dense(const BlockRectMatrix& b);

// a_ij = 1 iff x_i lies in the j-th set of the design, original order.
DenseMatrix dense_from_sample(std::span<const double> x, const BinaryDesign& design);

BinaryDesign expand_bioassay(const BioassayTable& table);

}  // namespace perms
