#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "perms/log_math.hpp"
#include "perms/subpermanent_table.hpp"

using namespace perms;

TEST_CASE("table basic operations") {
  SubpermanentTable t;
  CHECK(t.empty());
  CHECK(t.log_total() == kNegInf);
  CHECK_FALSE(t.find(0, 0));
  t.add_log(2, 0, std::log(20.0));
  t.add_log(2, 0, std::log(5.0));
  t.add_log(1, 1, std::log(3.0));
  t.add_log(4, 4, kNegInf);  // zeros are not stored
  CHECK(t.size() == 2);
  CHECK(std::exp(*t.find(2, 0)) == doctest::Approx(25.0));
  CHECK(std::exp(t.log_total()) == doctest::Approx(28.0));
  t.set_log(2, 0, 0.0);
  CHECK(*t.find(2, 0) == doctest::Approx(0.0));
  t.clear();
  CHECK(t.empty());
  CHECK_FALSE(t.find(2, 0));
}

TEST_CASE("table growth keeps every entry and respects the load limit") {
  SubpermanentTable t(8);
  std::map<std::pair<int, int>, double> ref;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200000; ++i) {
    const int r = static_cast<int>(rng() % 700), s = static_cast<int>(rng() % 700);
    const double v = std::uniform_real_distribution<double>(-50, 50)(rng);
    t.add_log(r, s, v);
    auto [it, fresh] = ref.try_emplace({r, s}, v);
    if (!fresh) it->second = log_add_exp(it->second, v);
    REQUIRE(static_cast<double>(t.size()) <= 0.7 * static_cast<double>(t.capacity()));
  }
  REQUIRE(t.size() == ref.size());
  CHECK((t.capacity() & (t.capacity() - 1)) == 0);
  for (const auto& [k, v] : ref) REQUIRE(*t.find(k.first, k.second) == doctest::Approx(v).epsilon(1e-12));
  std::size_t seen = 0;
  t.for_each([&](const SubpermanentTable::Entry& e) {
    ++seen;
    REQUIRE(e.log_value == doctest::Approx(ref.at({e.r, e.s})).epsilon(1e-12));
  });
  CHECK(seen == ref.size());
}

TEST_CASE("table handles colliding key patterns") {
  // keys sharing low bits in r, in s, and long runs in s for one r
  for (int pattern = 0; pattern < 3; ++pattern) {
    SubpermanentTable t(8);
    std::vector<std::pair<int, int>> keys;
    for (int i = 0; i < 5000; ++i) {
      if (pattern == 0) keys.emplace_back(i << 12, 0);
      if (pattern == 1) keys.emplace_back(0, i << 12);
      if (pattern == 2) keys.emplace_back(i % 3, i);
    }
    for (std::size_t i = 0; i < keys.size(); ++i)
      t.add_log(keys[i].first, keys[i].second, 1e-3 * static_cast<double>(i));
    REQUIRE(t.size() == keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
      REQUIRE(*t.find(keys[i].first, keys[i].second) == doctest::Approx(1e-3 * static_cast<double>(i)));
    CHECK_FALSE(t.find(1, 1 << 30));
  }
}

TEST_CASE("table keeps a wide dynamic range") {
  SubpermanentTable t;
  t.add_log(0, 0, -5000.0);
  t.add_log(1, 0, 5000.0);  // forces a rescale
  t.add_log(2, 0, 4999.0);
  CHECK(*t.find(1, 0) == doctest::Approx(5000.0));
  CHECK(t.log_total() == doctest::Approx(log_add_exp(5000.0, 4999.0)));
  CHECK(t.log_total() > 5000.0);
  SubpermanentTable u;
  u.add_log(3, 3, -700.0);
  u.add_log(3, 4, -701.0);
  CHECK(u.log_total() == doctest::Approx(log_add_exp(-700.0, -701.0)));
}

TEST_CASE("table linear interface and normalisation") {
  SubpermanentTable t;
  t.clear_with_scale(10.0);
  t.add_linear(1, 2, 4.0);
  t.add_linear(1, 2, 4.0);
  t.add_linear(0, 0, 2.0);
  t.add_linear(5, 5, 0.0);  // ignored
  CHECK(t.size() == 2);
  t.normalize();
  CHECK(t.scale() == doctest::Approx(10.0 + std::log(8.0)));
  CHECK(*t.find(1, 2) == doctest::Approx(10.0 + std::log(8.0)));
  CHECK(*t.find(0, 0) == doctest::Approx(10.0 + std::log(2.0)));
  t.reserve(10000);
  const auto cap = t.capacity();
  for (int i = 0; i < 10000; ++i) t.add_linear(i, i, 1.0);
  CHECK(t.capacity() == cap);
}

TEST_CASE("a cleared table is reusable without stale entries") {
  SubpermanentTable t;
  for (int round = 0; round < 50; ++round) {
    t.clear();
    for (int i = 0; i <= round; ++i) t.add_log(round, i, 0.0);
    REQUIRE(t.size() == static_cast<std::size_t>(round + 1));
    REQUIRE(std::exp(t.log_total()) == doctest::Approx(round + 1.0));
    if (round > 0) REQUIRE_FALSE(t.find(round - 1, 0));
  }
}
