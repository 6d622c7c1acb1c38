#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "nova/error.hpp"
#include "nova/knowledge.hpp"
#include "nova/rng.hpp"

using namespace nova;

namespace {

// Brute-force normalization, independent of the library's compensated sum.
std::vector<double> brute_zipf(std::size_t n, double alpha) {
  std::vector<long double> w(n);
  long double total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = std::pow(static_cast<long double>(j + 1), -static_cast<long double>(alpha));
    total += w[j];
  }
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = static_cast<double>(w[j] / total);
  return p;
}

IdSet make_set(std::size_t cap, std::initializer_list<ArtifactId> ids) {
  IdSet s(cap);
  for (auto id : ids) s.insert(id);
  return s;
}

}  // namespace

TEST_CASE("zipf space: single artifact") {
  const auto s = build_zipf_space(1, 0, 2.0);
  REQUIRE(s.ideal_probs().size() == 1);
  CHECK(s.ideal_probs()[0] == 1.0);
  CHECK(s.tail() == TailKind::Proper);
}

TEST_CASE("zipf space: alpha = 1 normalizes and flags the improper tail") {
  const auto s = build_zipf_space(2, 0, 1.0);
  CHECK(s.ideal_probs()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.ideal_probs()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.tail() == TailKind::ImproperTail);
}

TEST_CASE("zipf space: alpha = 2 over three valid ranks") {
  const auto s = build_zipf_space(3, 2, 2.0);
  CHECK(s.n_total() == 5);
  CHECK(s.ideal_probs()[0] == doctest::Approx(36.0 / 49.0).epsilon(1e-14));
  CHECK(s.ideal_probs()[1] == doctest::Approx(9.0 / 49.0).epsilon(1e-14));
  CHECK(s.ideal_probs()[2] == doctest::Approx(4.0 / 49.0).epsilon(1e-14));
  CHECK(s.is_valid(2));
  CHECK_FALSE(s.is_valid(3));
  CHECK(s.ideal_prob(4) == 0.0);
}

TEST_CASE("zipf space: parameter errors") {
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
  };
  CHECK(kind_of([] { build_zipf_space(10, 0, 0.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { build_zipf_space(10, 0, -1.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { build_zipf_space(0, 5, 1.5); }) == ErrorKind::EmptyDomain);
  // The infinite-domain stand-in needs a normalizable tail.
  SpaceOptions opts;
  opts.infinite_mode_threshold = 100;
  CHECK(kind_of([&] { build_zipf_space(1000, 0, 1.0, opts); }) == ErrorKind::InvalidParameter);
  CHECK_NOTHROW(build_zipf_space(1000, 0, 1.5, opts));
}

TEST_CASE("zipf space: normalization, positivity and monotonicity") {
  for (double alpha : {0.3, 0.5, 1.0, 1.5, 2.0, 3.7}) {
    for (std::size_t n : {1u, 7u, 1000u, 100000u}) {
      const auto s = build_zipf_space(n, 3, alpha);
      const auto p = s.ideal_probs();
      long double total = 0;
      for (double x : p) total += x;
      CHECK(std::abs(static_cast<double>(total) - 1.0) <= 1e-9);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(p[j] > 0.0);
        if (j > 0) CHECK(p[j] <= p[j - 1]);
      }
      const auto oracle = brute_zipf(n, alpha);
      for (std::size_t j = 0; j < n; j += std::max<std::size_t>(1, n / 50)) {
        CHECK(p[j] == doctest::Approx(oracle[j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("zipf space: tail beyond rank m decays like 1/m for alpha = 2") {
  const std::size_t n = 100000;
  const auto s = build_zipf_space(n, 0, 2.0);
  const auto p = s.ideal_probs();
  // Suffix sums from the rare end.
  std::vector<double> beyond(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) beyond[j] = beyond[j + 1] + p[j];
  for (std::size_t m = 10; m <= n / 10; m = m * 3 / 2) {
    const double mass = beyond[m];  // ranks m+1..n
    CHECK(mass <= 2.0 / static_cast<double>(m));
    CHECK(mass >= 0.5 / static_cast<double>(m));
  }
}

TEST_CASE("knowledge space rejects malformed probability vectors") {
  CHECK_THROWS_AS(KnowledgeSpace(2, 0, 1.0, {0.7, 0.7}, TailKind::Proper), Error);
  CHECK_THROWS_AS(KnowledgeSpace(2, 0, 1.0, {0.4, 0.6}, TailKind::Proper), Error);
  CHECK_THROWS_AS(KnowledgeSpace(2, 0, 1.0, {1.0, 0.0}, TailKind::Proper), Error);
  CHECK_THROWS_AS(KnowledgeSpace(2, 0, 1.0, {1.0}, TailKind::Proper), Error);
  CHECK_NOTHROW(KnowledgeSpace(2, 1, 1.0, {0.5, 0.5}, TailKind::Proper));
}

TEST_CASE("conditional tail renormalizes the undiscovered mass") {
  const KnowledgeSpace s(3, 0, 1.0, {0.5, 0.3, 0.2}, TailKind::Proper);

  const auto t = conditional_tail(s, make_set(3, {0}));
  REQUIRE(t.support == std::vector<ArtifactId>{1, 2});
  CHECK(t.probs[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(t.probs[1] == doctest::Approx(0.4).epsilon(1e-14));

  const auto id = conditional_tail(s, IdSet(3));
  REQUIRE(id.probs.size() == 3);
  CHECK(id.probs[0] == doctest::Approx(0.5));
  CHECK(id.probs[1] == doctest::Approx(0.3));
  CHECK(id.probs[2] == doctest::Approx(0.2));

  const auto z = build_zipf_space(3, 0, 2.0);
  const auto zt = conditional_tail(z, make_set(3, {0}));
  CHECK(zt.probs[0] == doctest::Approx(9.0 / 13.0).epsilon(1e-14));
  CHECK(zt.probs[1] == doctest::Approx(4.0 / 13.0).epsilon(1e-14));
}

TEST_CASE("conditional tail of a fully discovered space is an error") {
  const auto s = build_zipf_space(3, 2, 1.5);
  try {
    conditional_tail(s, make_set(5, {0, 1, 2}));
    FAIL("expected EmptyTail");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyTail);
  }
}

TEST_CASE("conditional tail composes: A then B equals A union B") {
  const auto s = build_zipf_space(200, 10, 1.3);
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    IdSet a(s.n_total()), ab(s.n_total());
    std::vector<ArtifactId> b_ids;
    for (ArtifactId i = 0; i < 200; ++i) {
      const double u = rng.uniform();
      if (u < 0.2) {
        a.insert(i);
        ab.insert(i);
      } else if (u < 0.4) {
        b_ids.push_back(i);
        ab.insert(i);
      }
    }
    // First conditioning, then condition the resulting tail on B.
    const auto first = conditional_tail(s, a);
    std::vector<double> mass(200, 0.0);
    for (std::size_t k = 0; k < first.support.size(); ++k) mass[first.support[k]] = first.probs[k];
    IdSet b(200);
    for (auto id : b_ids) b.insert(id);
    const auto twice = conditional_tail(std::span<const double>(mass), b);
    const auto once = conditional_tail(s, ab);

    // Ids with zero mass in `first` drop out of the second support.
    REQUIRE(twice.support == once.support);
    for (std::size_t k = 0; k < once.probs.size(); ++k) CHECK(std::abs(twice.probs[k] - once.probs[k]) <= 1e-12);
  }
}

TEST_CASE("default lengths follow 1 + floor(log2(rank + 1))") {
  const auto s = build_zipf_space(8, 3, 1.5);
  const auto len = default_lengths(s);
  REQUIRE(len.size() == 11);
  const std::vector<double> expected_valid{2, 2, 3, 3, 3, 3, 4, 4};
  for (std::size_t j = 0; j < 8; ++j) CHECK(len[j] == expected_valid[j]);
  CHECK(len[0] == 2);  // rank 1
  CHECK(len[6] == 4);  // rank 7
  // Invalid ids use their local index.
  CHECK(len[8] == 2);
  CHECK(len[9] == 2);
  CHECK(len[10] == 3);
  CHECK(s.length(6) == 4);
}

TEST_CASE("lengths must be at least one") {
  auto s = build_zipf_space(2, 0, 1.5);
  CHECK_THROWS_AS(s.set_lengths({1.0, 0.5}), Error);
  CHECK_THROWS_AS(s.set_lengths({1.0}), Error);
  s.set_lengths({3.0, 1.0});
  CHECK(s.length(0) == 3.0);
}

TEST_CASE("id set bookkeeping") {
  IdSet s(4);
  CHECK(s.insert(2));
  CHECK_FALSE(s.insert(2));
  CHECK(s.size() == 1);
  CHECK(s.contains(2));
  CHECK_FALSE(s.contains(7));
  CHECK(s.erase(2));
  CHECK_FALSE(s.erase(2));
  CHECK(s.empty());
  CHECK_THROWS_AS(s.insert(4), Error);
  s.insert(3);
  s.insert(0);
  CHECK(s.to_vector() == std::vector<ArtifactId>{0, 3});
}
