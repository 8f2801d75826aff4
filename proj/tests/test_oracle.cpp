#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "perms/log_math.hpp"
#include "perms/oracle.hpp"
#include "testing.hpp"

using namespace perms;

TEST_CASE("per_exact_dense examples") {
  CHECK(per_exact_dense({{1}}) == 1);
  CHECK(per_exact_dense({{0}}) == 0);
  CHECK(per_exact_dense(DenseMatrix(2, std::vector<std::uint8_t>(5, 1))) == 20);
  CHECK(per_exact_dense(to_dense(fixtures::a1())) == 222);
  ExactCount f20 = 1;
  for (int i = 2; i <= 20; ++i) f20 *= i;
  CHECK(per_exact_dense(DenseMatrix(20, std::vector<std::uint8_t>(20, 1))) == f20);
  CHECK_THROWS_AS(per_exact_dense(DenseMatrix(21, std::vector<std::uint8_t>(21, 1))), OracleRefusal);
  CHECK_THROWS_AS(per_exact_dense(DenseMatrix(3, std::vector<std::uint8_t>(2, 1))), InvalidInput);
}

TEST_CASE("per_exact_dense: enumeration and subset paths agree around the switch size") {
  // n = 8 is enumerated, n = 9 uses the subset recursion; a 9-column matrix
  // with one zero column equals the 8-column matrix with it removed
  std::mt19937_64 rng(5);
  for (int it = 0; it < 200; ++it) {
    DenseMatrix a(8, std::vector<std::uint8_t>(8));
    for (auto& row : a)
      for (auto& v : row) v = (rng() % 3) != 0;
    DenseMatrix b = a;
    for (auto& row : b) row.push_back(0);
    b.push_back(std::vector<std::uint8_t>(9, 0));
    b.back()[8] = 1;
    REQUIRE(per_exact_dense(a) == per_exact_dense(b));
  }
}

TEST_CASE("per_class_dp examples") {
  CHECK(per_class_dp(BlockRectMatrix(2, {5}, {}, {})) == 20);
  CHECK(per_class_dp(fixtures::from_one_based({{1, 1}, {1, 2}}, 2)) == 1);
  CHECK(per_class_dp(fixtures::a1()) == 222);
  ExactCount f200 = 1;
  for (int i = 2; i <= 200; ++i) f200 *= i;
  CHECK(per_class_dp(BlockRectMatrix(200, {200}, {}, {})) == f200);
}

TEST_CASE("per_class_dp equals per_exact_dense on every small instance") {
  std::size_t count = 0;
  for_each_small_blockmat(7, [&](const BlockRectMatrix& b) {
    ++count;
    REQUIRE(per_class_dp(b) == per_exact_dense(to_dense(b)));
  });
  CHECK(count == 401351);
}

TEST_CASE("per_class_dp equals per_exact_dense on random staircases up to n = 20") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 1000; ++it) {
    const int n = std::uniform_int_distribution<int>(1, 20)(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    const auto b = BlockRectMatrix::from_row_intervals(testing::random_staircase(rng, m, n), n);
    REQUIRE(per_class_dp(b) == per_exact_dense(to_dense(b)));
  }
}

TEST_CASE("count_perms_brute examples") {
  const BinaryDesign d{{0.5, 0.5}, {1, 0}};
  const double x[] = {0.3, 0.7};
  CHECK(count_perms_brute(x, d) == 1);
  const BinaryDesign ones{{1, 2, 3, 4}, {1, 1, 1, 1}};
  const double low[] = {0.1, 0.2, 0.3, 0.4};
  CHECK(count_perms_brute(low, ones) == 24);
  const BinaryDesign one{{0.5}, {1}};
  const double high[] = {0.9};
  CHECK(count_perms_brute(high, one) == 0);
  const BinaryDesign big{std::vector<double>(9, 0.5), std::vector<int>(9, 1)};
  const std::vector<double> x9(9, 0.1);
  CHECK_THROWS_AS(count_perms_brute(x9, big), OracleRefusal);
}

TEST_CASE("count_perms_brute equals the dense permanent of the sample matrix") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 10000; ++it) {
    const int n = std::uniform_int_distribution<int>(1, 7)(rng);
    BinaryDesign d;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
      d.t.push_back(u(rng));
      d.y.push_back(static_cast<int>(rng() & 1U));
      x[i] = u(rng);
    }
    REQUIRE(count_perms_brute(x, d) == per_exact_dense(dense_from_sample(x, d)));
  }
}

TEST_CASE("gen_small_blockmats") {
  SUBCASE("n_max = 1") {
    const auto all = gen_small_blockmats(1);
    REQUIRE(all.size() == 1);
    CHECK(to_dense(all[0]) == DenseMatrix{{1}});
  }
  SUBCASE("n_max = 2 contains the listed systems") {
    std::set<std::vector<std::pair<int, int>>> seen;
    for (const auto& b : gen_small_blockmats(2)) {
      std::vector<std::pair<int, int>> rows;
      for (const auto& r : b.row_intervals()) rows.emplace_back(r.lo + 1, r.hi + 1);
      seen.insert(rows);
    }
    CHECK(seen.count({{1, 1}, {1, 2}}));
    CHECK(seen.count({{1, 2}, {1, 2}}));
    CHECK(seen.count({{1, 1}, {2, 2}}));
    CHECK(seen.count({{1, 2}, {2, 2}}));
    CHECK_FALSE(seen.count({{1, 1}, {1, 1}}));  // leaves column 2 uncovered
  }
  SUBCASE("counts match direct enumeration, no duplicates") {
    for (int n = 1; n <= 5; ++n) {
      // all n-tuples of intervals with l and r non-decreasing that cover [1, n]
      std::vector<std::pair<int, int>> iv;
      for (int l = 0; l < n; ++l)
        for (int r = l; r < n; ++r) iv.emplace_back(l, r);
      std::size_t direct = 0;
      std::vector<int> idx(n, 0);
      for (;;) {
        bool ok = true;
        std::vector<bool> covered(n, false);
        for (int i = 0; i < n && ok; ++i) {
          if (i > 0 && (iv[idx[i]].first < iv[idx[i - 1]].first || iv[idx[i]].second < iv[idx[i - 1]].second))
            ok = false;
          for (int c = iv[idx[i]].first; c <= iv[idx[i]].second; ++c) covered[c] = true;
        }
        for (bool c : covered) ok = ok && c;
        direct += ok;
        int p = n - 1;
        while (p >= 0 && ++idx[p] == static_cast<int>(iv.size())) idx[p--] = 0;
        if (p < 0) break;
      }
      std::set<std::vector<std::pair<int, int>>> distinct;
      std::size_t generated = 0;
      for_each_small_blockmat(n, [&](const BlockRectMatrix& b) {
        if (b.cols() != n) return;
        ++generated;
        std::vector<std::pair<int, int>> rows;
        for (const auto& r : b.row_intervals()) rows.emplace_back(r.lo, r.hi);
        distinct.insert(rows);
        REQUIRE(b.rows() == n);
      });
      CHECK(generated == direct);
      CHECK(distinct.size() == generated);
    }
  }
  CHECK_THROWS(gen_small_blockmats(8));
}

TEST_CASE("log_count") {
  CHECK(log_count(0) == kNegInf);
  CHECK(log_count(1) == 0.0);
  ExactCount f = 1;
  for (int i = 2; i <= 300; ++i) f *= i;
  CHECK(log_count(f) == doctest::Approx(log_factorial(300)).epsilon(1e-13));
}
