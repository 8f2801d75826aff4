#pragma once

#include <vector>

#include "perms/design.hpp"

namespace fixtures {

// 1-based row intervals over 7 columns
inline perms::BlockRectMatrix from_one_based(const std::vector<std::pair<int, int>>& rows, int n) {
  std::vector<perms::Interval> iv;
  for (auto [l, r] : rows) iv.push_back({l - 1, r - 1});
  return perms::BlockRectMatrix::from_row_intervals(iv, n);
}

inline perms::BlockRectMatrix a1() {
  return from_one_based({{1, 4}, {1, 5}, {1, 5}, {1, 6}, {2, 7}, {5, 7}, {6, 7}}, 7);
}

inline std::vector<std::vector<std::pair<int, int>>> a1_reduction_rows() {
  return {
      {{1, 4}, {1, 5}, {1, 5}, {1, 6}, {2, 7}, {5, 7}, {6, 7}},
      {{1, 4}, {1, 5}, {1, 5}, {1, 6}, {5, 7}, {6, 7}},
      {{1, 4}, {1, 5}, {1, 5}, {1, 6}, {5, 7}, {6, 7}},
      {{1, 4}, {1, 5}, {1, 5}, {5, 7}, {6, 7}},
      {{1, 4}, {1, 5}, {1, 5}, {5, 7}, {6, 7}},
      {{1, 5}, {1, 5}, {5, 7}, {6, 7}},
      {{1, 5}, {1, 5}, {6, 7}},
      {{1, 5}, {1, 5}, {6, 7}},
      {{1, 5}, {1, 5}},
  };
}

}  // namespace fixtures
