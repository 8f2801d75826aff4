#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "perms/design.hpp"
#include "perms/oracle.hpp"

using namespace perms;

namespace {

BinaryDesign make(std::vector<double> t, std::vector<int> y) { return {std::move(t), std::move(y)}; }

bool contains(const CanonicalDesign& cd, std::size_t j, double v) {
  return j < cd.split ? v <= cd.threshold[j] : v > cd.threshold[j];
}

bool is_staircase(const std::vector<Interval>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].lo < rows[i - 1].lo || rows[i].hi < rows[i - 1].hi) return false;
  return true;
}

}  // namespace

TEST_CASE("canonicalize puts responses of one first, each part ascending") {
  SUBCASE("already sorted") {
    const auto cd = canonicalize(make({1, 2, 3}, {1, 1, 0}));
    CHECK(cd.order == std::vector<std::size_t>{0, 1, 2});
    CHECK(cd.split == 2);
  }
  SUBCASE("reordered") {
    const auto cd = canonicalize(make({3, 1}, {0, 1}));
    CHECK(cd.order == std::vector<std::size_t>{1, 0});
    CHECK(cd.threshold == std::vector<double>{1, 3});
    CHECK(cd.split == 1);
  }
  SUBCASE("toy design n = 100") {
    std::vector<double> t(100);
    std::vector<int> y(100);
    for (int i = 0; i < 100; ++i) {
      t[i] = i / 99.0;
      y[i] = i >= 50;
    }
    const auto cd = canonicalize(make(t, y));
    REQUIRE(cd.split == 50);
    for (std::size_t j = 0; j < 50; ++j) CHECK(cd.order[j] == 50 + j);
    for (std::size_t j = 50; j < 100; ++j) CHECK(cd.order[j] == j - 50);
  }
  SUBCASE("ties keep input order") {
    const auto cd = canonicalize(make({2, 1, 2, 1}, {0, 0, 0, 0}));
    CHECK(cd.order == std::vector<std::size_t>{1, 3, 0, 2});
  }
}

TEST_CASE("design validation") {
  CHECK_THROWS_AS(canonicalize(make({1, 2}, {1})), InvalidInput);
  CHECK_THROWS_AS(canonicalize(make({}, {})), InvalidInput);
  CHECK_THROWS_AS(canonicalize(make({std::nan("")}, {1})), InvalidInput);
  CHECK_THROWS_AS(canonicalize(make({std::numeric_limits<double>::infinity()}, {0})), InvalidInput);
  CHECK_THROWS_AS(canonicalize(make({0.5}, {2})), InvalidInput);
  const double x[] = {0.1};
  const auto cd = canonicalize(make({0.5, 0.6}, {1, 0}));
  CHECK_THROWS_AS(from_sample(x, cd), InvalidInput);
}

TEST_CASE("row_interval examples") {
  const auto cd = canonicalize(make({1, 2, 3}, {1, 1, 0}));
  CHECK(row_interval(1.5, cd) == Interval{1, 1});
  const auto ones = canonicalize(make({1, 2, 3}, {1, 1, 1}));
  CHECK(row_interval(0.0, ones) == Interval{0, 2});
  CHECK(row_interval(5.0, ones).empty());
}

TEST_CASE("row_interval equals brute-force membership and is contiguous") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 100000; ++it) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    BinaryDesign d;
    for (int i = 0; i < n; ++i) {
      d.t.push_back(std::uniform_int_distribution<int>(0, 6)(rng) * 0.5);
      d.y.push_back(static_cast<int>(rng() & 1U));
    }
    const auto cd = canonicalize(d);
    // half the probes sit exactly on a threshold
    const double v = (rng() & 1U) ? d.t[rng() % n] : std::uniform_real_distribution<double>(-0.5, 3.5)(rng);
    const Interval got = row_interval(v, cd);
    int lo = -1, hi = -2, members = 0;
    for (std::size_t j = 0; j < cd.size(); ++j) {
      if (!contains(cd, j, v)) continue;
      if (lo < 0) lo = static_cast<int>(j);
      hi = static_cast<int>(j);
      ++members;
    }
    REQUIRE(members == (members ? hi - lo + 1 : 0));  // contiguous
    if (members == 0)
      REQUIRE(got.empty());
    else
      REQUIRE(got == Interval{lo, hi});
  }
}

TEST_CASE("from_sample examples") {
  SUBCASE("toy n = 2") {
    const BinaryDesign d = make({0.5, 0.5}, {1, 0});
    const double x[] = {0.3, 0.7};
    const auto b = from_sample(x, canonicalize(d));
    REQUIRE(b);
    CHECK(b->rows() == 2);
    CHECK(b->blocks() == 2);
    CHECK(b->alpha() == std::vector<int>{1, 1});
    CHECK(to_dense(*b) == DenseMatrix{{1, 0}, {0, 1}});
  }
  SUBCASE("a value above every closed threshold gives zero") {
    const BinaryDesign d = make({0.2, 0.4, 0.6}, {1, 1, 1});
    const double x[] = {0.1, 0.9, 0.3};
    CHECK_FALSE(from_sample(x, canonicalize(d)));
  }
  SUBCASE("a set holding no value gives zero") {
    const BinaryDesign d = make({0.2, 0.9}, {0, 0});
    const double x[] = {0.1, 0.15};
    CHECK_FALSE(from_sample(x, canonicalize(d)));
  }
  SUBCASE("sample reproducing A1") {
    // closed sets hold the 4, 5, 5, 6 smallest values, open sets the 6, 3, 2 largest
    const BinaryDesign d = make({5.5, 1.5, 4.5, 5.5, 4.5, 6.5, 5.5}, {1, 0, 1, 0, 0, 1, 1});
    const double x[] = {7, 2, 5, 1, 4, 6, 3};
    const auto b = from_sample(x, canonicalize(d));
    REQUIRE(b);
    CHECK(*b == fixtures::a1());
    CHECK(b->rows() == 7);
    CHECK(b->blocks() == 5);
    CHECK(b->alpha() == std::vector<int>{1, 3, 1, 1, 1});
    CHECK(per_exact_dense(dense_from_sample(x, d)) == 222);
  }
  SUBCASE("input is not modified") {
    const BinaryDesign d = make({0.5, 0.2, 0.8}, {1, 0, 1});
    const std::vector<double> x = {0.9, 0.1, 0.4};
    const auto copy = x;
    (void)from_sample(x, canonicalize(d));
    CHECK(x == copy);
  }
}

TEST_CASE("to_dense examples and round trip") {
  CHECK(to_dense(BlockRectMatrix(2, {5}, {}, {})) == DenseMatrix(2, std::vector<std::uint8_t>(5, 1)));
  CHECK(to_dense(BlockRectMatrix(1, {1}, {}, {})) == DenseMatrix{{1}});
  const DenseMatrix a1 = {{1, 1, 1, 1, 0, 0, 0}, {1, 1, 1, 1, 1, 0, 0}, {1, 1, 1, 1, 1, 0, 0}, {1, 1, 1, 1, 1, 1, 0},
                          {0, 1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 1, 1, 1}, {0, 0, 0, 0, 0, 1, 1}};
  CHECK(to_dense(fixtures::a1()) == a1);
  for (const auto& b : gen_small_blockmats(5)) {
    const auto rows = b.row_intervals();
    REQUIRE(BlockRectMatrix::from_row_intervals(rows, b.cols()) == b);
    const auto dense = to_dense(b);
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) REQUIRE((dense[i][j] == 1) == (rows[i].lo <= j && j <= rows[i].hi));
  }
}

TEST_CASE("block matrix validation") {
  CHECK_THROWS_AS(BlockRectMatrix(2, {0}, {}, {}), InvalidInput);
  CHECK_THROWS_AS(BlockRectMatrix(2, {1, 1}, {3}, {0}), InvalidInput);
  const Interval not_staircase[] = {{1, 2}, {0, 2}};
  CHECK_THROWS_AS(BlockRectMatrix::from_row_intervals(not_staircase, 3), InvalidInput);
  const Interval uncovered[] = {{0, 0}, {2, 2}};
  CHECK_THROWS_AS(BlockRectMatrix::from_row_intervals(uncovered, 3), InvalidInput);
  CHECK(fixtures::a1().is_canonical());
}

TEST_CASE("from_sample preserves the permanent, exhaustively for n <= 7") {
  // every response pattern, and every placement of the n values in the n + 1
  // gaps around thresholds 1..n
  for (int n = 1; n <= 7; ++n) {
    std::vector<double> t(n);
    std::iota(t.begin(), t.end(), 1.0);
    std::vector<int> gaps(n, 0);
    std::mt19937_64 rng(n);
    std::size_t cases = 0;
    for (;;) {
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) x[i] = gaps[i] + 0.5;
      std::shuffle(x.begin(), x.end(), rng);
      for (unsigned mask = 0; mask < (1U << n); ++mask) {
        // response of the i-th smallest threshold is bit i; pairs listed in random order
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        BinaryDesign d;
        for (int i : perm) {
          d.t.push_back(t[i]);
          d.y.push_back((mask >> i) & 1U);
        }
        const ExactCount want = per_exact_dense(dense_from_sample(x, d));
        const auto b = from_sample(x, canonicalize(d));
        if (b) {
          REQUIRE(is_staircase(b->row_intervals()));
          REQUIRE(per_exact_dense(to_dense(*b)) == want);
        } else {
          REQUIRE(want == 0);
        }
        ++cases;
      }
      int i = n - 1;
      while (i >= 0 && gaps[i] == n) --i;
      if (i < 0) break;
      ++gaps[i];
      for (int j = i + 1; j < n; ++j) gaps[j] = gaps[i];
    }
    MESSAGE("n = " << n << ": " << cases << " cases");
  }
}

TEST_CASE("from_sample preserves the permanent with ties, random n <= 8") {
  std::mt19937_64 rng(3);
  for (int it = 0; it < 20000; ++it) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    BinaryDesign d;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
      d.t.push_back(std::uniform_int_distribution<int>(0, 4)(rng));
      d.y.push_back(static_cast<int>(rng() & 1U));
      x[i] = std::uniform_int_distribution<int>(0, 4)(rng);  // ties with thresholds and each other
    }
    const ExactCount want = count_perms_brute(x, d);
    REQUIRE(per_exact_dense(dense_from_sample(x, d)) == want);
    const auto b = from_sample(x, canonicalize(d));
    if (b)
      REQUIRE(per_exact_dense(to_dense(*b)) == want);
    else
      REQUIRE(want == 0);
  }
}

TEST_CASE("expand_bioassay") {
  SUBCASE("one level") {
    const auto d = expand_bioassay({{0.5}, {1}, {2}});
    CHECK(d.t == std::vector<double>{0.5, 0.5});
    CHECK(d.y == std::vector<int>{1, 0});
  }
  SUBCASE("all successes") {
    const auto d = expand_bioassay({{-1, 0, 1}, {2, 3, 1}, {2, 3, 1}});
    CHECK(d.size() == 6);
    CHECK(std::all_of(d.y.begin(), d.y.end(), [](int v) { return v == 1; }));
  }
  SUBCASE("500 trials") {
    BioassayTable tb;
    for (int j = 0; j < 10; ++j) {
      tb.level.push_back(-1 + j * (2.0 / 9));
      tb.successes.push_back(j * 3);
      tb.trials.push_back(50);
    }
    CHECK(expand_bioassay(tb).size() == 500);
  }
  SUBCASE("invalid tables") {
    CHECK_THROWS_AS(expand_bioassay({{0, 0}, {1, 1}, {2, 2}}), InvalidInput);  // duplicate level
    CHECK_THROWS_AS(expand_bioassay({{1, 0}, {1, 1}, {2, 2}}), InvalidInput);  // not increasing
    CHECK_THROWS_AS(expand_bioassay({{0}, {3}, {2}}), InvalidInput);
    CHECK_THROWS_AS(expand_bioassay({{0}, {0}, {0}}), InvalidInput);
  }
}
