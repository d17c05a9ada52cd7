#include "doctest.h"

#include "reservoir/lsh.hpp"

#include <bit>
#include <cmath>
#include <random>

using namespace reservoir;

namespace {

FeatureVector
random_vector(std::size_t dim, std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureVector v;
  v.values.resize(dim);
  for (auto& x : v.values) {
    x = n(rng);
  }
  return v;
}

// Every index within `radius` of `h`, by direct enumeration.
std::vector<std::uint32_t>
hamming_ball(std::uint32_t h, std::uint32_t radius, std::uint32_t k)
{
  std::vector<std::uint32_t> out;
  for (std::uint32_t d = 0; d <= radius; ++d) {
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << k); ++x) {
      if (static_cast<std::uint32_t>(std::popcount(static_cast<std::uint32_t>(x) ^ h)) == d) {
        out.push_back(static_cast<std::uint32_t>(x));
      }
    }
  }
  return out;
}

std::uint64_t
binomial(std::uint32_t n, std::uint32_t r)
{
  std::uint64_t c = 1;
  for (std::uint32_t i = 1; i <= r; ++i) {
    c = c * (n - r + i) / i;
  }
  return c;
}

} // namespace

TEST_CASE("index size follows bit width")
{
  CHECK(index_size_for_bits(1) == 1);
  CHECK(index_size_for_bits(8) == 1);
  CHECK(index_size_for_bits(9) == 2);
  CHECK(index_size_for_bits(16) == 2);
  CHECK(index_size_for_bits(17) == 3);
  CHECK(index_size_for_bits(32) == 4);
}

TEST_CASE("hash family config validation")
{
  CHECK_NOTHROW(HashFamilyConfig::make(5, 16, 8, 1).validate());
  auto c = HashFamilyConfig::make(1, 9, 8, 1);
  c.index_size_bytes = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(HashFamilyConfig::make(0, 8, 8, 1).validate(), ConfigError);
  CHECK_THROWS_AS(HashFamilyConfig::make(1, 33, 8, 1).validate(), ConfigError);
  CHECK_THROWS_AS(HashFamilyConfig::make(1, 8, 0, 1).validate(), ConfigError);
}

TEST_CASE("feature vector validation")
{
  CHECK_THROWS_AS(validate_feature_vector(FeatureVector{}), DegenerateInputError);
  CHECK_THROWS_AS(validate_feature_vector(FeatureVector{{1.0, NAN}}), DegenerateInputError);
  CHECK_THROWS_AS(validate_feature_vector(FeatureVector{{INFINITY}}), DegenerateInputError);
  CHECK_NOTHROW(validate_feature_vector(FeatureVector{{0.0, 0.0}}));
}

TEST_CASE("zero vector sets every bit")
{
  for (std::uint32_t k : {1u, 8u, 16u, 32u}) {
    HashFamily f(HashFamilyConfig::make(3, k, 16, 7));
    auto h = hash_vector(f, FeatureVector{std::vector<double>(16, 0.0)});
    REQUIRE(h.num_tables() == 3);
    for (auto idx : h.per_table) {
      CHECK(idx == static_cast<std::uint32_t>((std::uint64_t{1} << k) - 1));
    }
  }
}

TEST_CASE("hash is deterministic and scale invariant")
{
  std::mt19937_64 rng(3);
  HashFamily f(HashFamilyConfig::make(5, 16, 32, 11));
  HashFamily g(HashFamilyConfig::make(5, 16, 32, 11));
  for (int i = 0; i < 200; ++i) {
    auto v = random_vector(32, rng);
    auto h = hash_vector(f, v);
    CHECK(h == hash_vector(f, v));
    CHECK(h == hash_vector(g, v));
    for (double c : {2.0, 0.001, 1e6}) {
      FeatureVector w = v;
      for (auto& x : w.values) {
        x *= c;
      }
      CHECK(hash_vector(f, w) == h);
    }
  }
}

TEST_CASE("table index is the sign pattern, hyperplane 0 most significant")
{
  std::mt19937_64 rng(5);
  HashFamily f(HashFamilyConfig::make(2, 12, 10, 2));
  for (int i = 0; i < 50; ++i) {
    auto v = random_vector(10, rng);
    for (std::uint32_t t = 0; t < 2; ++t) {
      std::uint32_t expect = 0;
      for (std::uint32_t b = 0; b < 12; ++b) {
        auto hp = f.hyperplane(t, b);
        double dot = 0.0;
        for (std::size_t j = 0; j < 10; ++j) {
          dot += hp[j] * v.values[j];
        }
        expect = (expect << 1) | (dot >= 0.0 ? 1u : 0u);
      }
      CHECK(f.table_index(v.values, t) == expect);
      CHECK(expect < (1u << 12));
    }
  }
}

TEST_CASE("smaller families are prefixes of larger ones")
{
  std::mt19937_64 rng(9);
  HashFamily one(HashFamilyConfig::make(1, 16, 24, 4));
  HashFamily five(HashFamilyConfig::make(5, 16, 24, 4));
  for (int i = 0; i < 50; ++i) {
    auto v = random_vector(24, rng);
    CHECK(hash_vector(one, v).per_table[0] == hash_vector(five, v).per_table[0]);
  }
}

TEST_CASE("dimension mismatch is a configuration error")
{
  HashFamily f(HashFamilyConfig::make(1, 8, 4, 1));
  CHECK_THROWS_AS(hash_vector(f, FeatureVector{{1.0, 2.0}}), ConfigError);
}

TEST_CASE("hash encoding")
{
  CHECK(encode_hash(ConcatenatedHash{{110, 129, 15}, 1}) == "6E810F");
  CHECK(encode_hash(ConcatenatedHash{{0}, 1}) == "00");
  CHECK(encode_hash(ConcatenatedHash{{1, 256}, 4}) == "0000000100000100");
  CHECK(encode_hash(ConcatenatedHash{{0xABCD}, 2}) == "ABCD");

  CHECK(decode_hash("6E810F", 1, 3) == ConcatenatedHash{{110, 129, 15}, 1});
  CHECK(decode_hash("00", 1, 1) == ConcatenatedHash{{0}, 1});
  CHECK(decode_hash("6e810f", 1, 3) == ConcatenatedHash{{110, 129, 15}, 1});
  CHECK_THROWS_AS(decode_hash("6E810", 1, 3), MalformedNameError);
  CHECK_THROWS_AS(decode_hash("6E810G", 1, 3), MalformedNameError);
  CHECK_THROWS_AS(decode_hash("6E81", 1, 3), MalformedNameError);
}

TEST_CASE("encode and decode round trip")
{
  std::mt19937_64 rng(17);
  for (std::uint32_t size = 1; size <= 4; ++size) {
    for (std::uint32_t tables = 1; tables <= 10; ++tables) {
      ConcatenatedHash h;
      h.index_size_bytes = size;
      const std::uint64_t limit = std::uint64_t{1} << (8 * size);
      for (std::uint32_t t = 0; t < tables; ++t) {
        h.per_table.push_back(static_cast<std::uint32_t>(rng() % limit));
      }
      const auto hex = encode_hash(h);
      CHECK(hex.size() == tables * size * 2);
      CHECK(decode_hash(hex, size, tables) == h);
      CHECK(encode_hash(decode_hash(hex, size, tables)) == hex);
    }
  }
}

TEST_CASE("cosine similarity")
{
  FeatureVector a{{1.0, 2.0, 3.0}};
  FeatureVector neg{{-1.0, -2.0, -3.0}};
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK(cosine_similarity(a, neg) == doctest::Approx(-1.0));
  CHECK(cosine_similarity(FeatureVector{{1.0, 0.0}}, FeatureVector{{0.0, 1.0}}) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(a, FeatureVector{{0.0, 0.0, 0.0}}), DegenerateInputError);
  CHECK_THROWS_AS(cosine_similarity(a, FeatureVector{{1.0}}), DegenerateInputError);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    auto s = cosine_similarity(random_vector(8, rng), random_vector(8, rng));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("probe set matches the brute-force Hamming ball")
{
  CHECK(probe_set({0, 0}, 0, 2) == std::vector<BucketIndex>{{0, 0}});
  CHECK(probe_set({0, 0}, 1, 2) == std::vector<BucketIndex>{{0, 0}, {0, 1}, {0, 2}});
  for (std::uint32_t k : {1u, 3u, 6u, 8u}) {
    for (std::uint32_t r = 0; r <= k + 1; ++r) {
      for (std::uint32_t h : {0u, 1u, (1u << k) - 1, (1u << k) / 2}) {
        auto got = probe_set({4, h}, r, k);
        auto want = hamming_ball(h, r, k);
        REQUIRE(got.size() == want.size());
        std::uint64_t expect_size = 0;
        for (std::uint32_t d = 0; d <= std::min(r, k); ++d) {
          expect_size += binomial(k, d);
        }
        CHECK(got.size() == expect_size);
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].table == 4);
          CHECK(got[i].index == want[i]);
        }
      }
    }
  }
}

TEST_CASE("close pairs collide more than distant pairs")
{
  std::mt19937_64 rng(21);
  const std::size_t dim = 64;
  HashFamily f(HashFamilyConfig::make(1, 8, dim, 5));
  std::normal_distribution<double> noise(0.0, 1.0);
  int close_hits = 0;
  int close_pairs = 0;
  int far_hits = 0;
  int far_pairs = 0;
  while (close_pairs < 1000 || far_pairs < 1000) {
    auto a = random_vector(dim, rng);
    FeatureVector b = a;
    for (auto& x : b.values) {
      x += 0.2 * noise(rng);
    }
    auto c = random_vector(dim, rng);
    const double sab = cosine_similarity(a, b);
    const double sac = cosine_similarity(a, c);
    const auto ha = hash_vector(f, a);
    if (sab >= 0.95 && close_pairs < 1000) {
      ++close_pairs;
      close_hits += ha == hash_vector(f, b);
    }
    if (sac <= 0.0 && far_pairs < 1000) {
      ++far_pairs;
      far_hits += ha == hash_vector(f, c);
    }
  }
  CHECK(close_hits > far_hits);
}
