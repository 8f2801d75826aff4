#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "perms/design.hpp"

namespace perms {

using ExactCount = boost::multiprecision::cpp_int;

// Thrown when an oracle is asked for something beyond its size limit.
class OracleRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDenseOracleMaxCols = 20;
inline constexpr int kBruteMaxN = 8;
inline constexpr double kClassDpMaxStates = 1e7;

// Exact permanent of an m x n 0-1 matrix with m <= n <= 20: sum over
// injective row -> column maps of the product of entries.
ExactCount per_exact_dense(const DenseMatrix& a);

// Exact permanent of a block-rectangular matrix, sweeping the column blocks
// and tracking how many rows of each interval class are still unmatched.
ExactCount per_class_dp(const BlockRectMatrix& b);

// Number of permutations sigma with x[sigma(j)] in set j for every j.
ExactCount count_perms_brute(std::span<const double> x, const BinaryDesign& design);

// Every staircase row-interval system with m = n columns, 1 <= n <= n_max,
// whose rows cover all columns, as canonical matrices. n_max <= 7.
void for_each_small_blockmat(int n_max, const std::function<void(const BlockRectMatrix&)>& f);
std::vector<BlockRectMatrix> gen_small_blockmats(int n_max);

// log of an exact count; -inf for zero.
double log_count(const ExactCount& c);

}  // namespace perms
