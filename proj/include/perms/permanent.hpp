#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "perms/design.hpp"
#include "perms/log_math.hpp"
#include "perms/subpermanent_table.hpp"

namespace perms {

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One reduction move. DropRow removes row `row` (whose columns are `columns`
// in the pre-move matrix); if that row was the only row of an end block, the
// emptied block is removed in the same move. MergeBlocks joins blocks
// `block` and `block + 1`, which have identical row sets.
struct Move {
  enum class Kind { DropRow, MergeBlocks };
  Kind kind = Kind::DropRow;
  int row = -1;
  Interval columns;
  int block = -1;

  static Move drop(int row, Interval columns) { return {Kind::DropRow, row, columns, -1}; }
  static Move merge(int block) { return {Kind::MergeBlocks, -1, {}, block}; }
};

struct TraceStep {
  BlockRectMatrix matrix;  // before the move
  Move move;
};

struct ReductionTrace {
  std::vector<TraceStep> steps;
  BlockRectMatrix terminal;  // single block
};

struct EngineCounters {
  std::uint64_t permanents = 0;     // log_permanent calls that reached the engine
  std::uint64_t zero_rejected = 0;  // rejected by the positivity gate
  std::uint64_t moves = 0;          // reduction moves performed
  std::uint64_t fallbacks = 0;      // top-row expansions for non-reducible input
  std::size_t max_table_size = 0;   // largest subpermanent table seen
};

// Internal record of a move, holding just what the unwind recurrences need.
struct StepRecord {
  Move::Kind kind;
  int k;        // blocks before the move
  int m;        // rows before the move
  int n;        // columns before the move
  int first_w;  // width of the leftmost block before the move
  int last_w;   // width of the rightmost block before the move
  int p, q;     // DropRow: block span of the removed row
  bool removed_left, removed_right;
  int j, wa, wb;  // MergeBlocks: index and widths of the merged pair
};

// Scratch memory for one in-flight permanent evaluation. Not shareable
// between threads; create one per worker.
class Workspace {
 public:
  Workspace();

  const EngineCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = {}; }

 private:
  friend class Reducer;
  friend struct Engine;
  friend double log_permanent_rows(std::span<const Interval>, int, Workspace&);
  friend double unwind_and_sum(std::span<const StepRecord>, int, int, Workspace&);

  SubpermanentTable table_a_, table_b_;
  std::vector<int> widths_;
  std::vector<int> span_p_, span_q_;
  std::vector<int> start_count_, end_count_, height_, sole_prefix_;
  std::vector<StepRecord> steps_;
  std::vector<int> cuts_;
  LogFactorials lf_;
  EngineCounters counters_;
};

// Positivity gate. For a square matrix this is the diagonal criterion
// l_i <= i <= r_i; for m < n it is the greedy earliest-column matching.
bool is_positive(const BlockRectMatrix& b);
bool is_positive_rows(std::span<const Interval> rows, int n);

// True when the reduction reaches a single block without getting stuck.
bool is_reducible(const BlockRectMatrix& b);

ReductionTrace reduce_trace(const BlockRectMatrix& b);

SubpermanentTable base_subpermanents(const BlockRectMatrix& b);

// Subpermanent table of step.matrix from the table of the matrix that the
// move produces.
SubpermanentTable unwind_once(const SubpermanentTable& post, const TraceStep& step);

// log per B, or -inf when the permanent vanishes.
double log_permanent(const BlockRectMatrix& b, Workspace& ws);
double log_permanent(const BlockRectMatrix& b);

// Same, from staircase row intervals covering columns [0, n). Columns not
// covered by any row are ignored.
double log_permanent_rows(std::span<const Interval> rows, int n, Workspace& ws);

}  // namespace perms
