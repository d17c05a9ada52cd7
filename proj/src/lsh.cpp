#include "reservoir/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace reservoir {

void
validate_feature_vector(const FeatureVector& v)
{
  if (v.values.empty()) {
    throw DegenerateInputError("feature vector is empty");
  }
  for (double x : v.values) {
    if (!std::isfinite(x)) {
      throw DegenerateInputError("feature vector has a non-finite value");
    }
  }
}

std::uint32_t
index_size_for_bits(std::uint32_t bits_per_table)
{
  return (bits_per_table + 7) / 8;
}

HashFamilyConfig
HashFamilyConfig::make(std::uint32_t num_tables, std::uint32_t bits_per_table,
                       std::size_t dimension, std::uint64_t seed)
{
  HashFamilyConfig c;
  c.num_tables = num_tables;
  c.bits_per_table = bits_per_table;
  c.index_size_bytes = index_size_for_bits(bits_per_table);
  c.dimension = dimension;
  c.seed = seed;
  return c;
}

void
HashFamilyConfig::validate() const
{
  if (num_tables == 0) {
    throw ConfigError("num_tables must be at least 1");
  }
  if (bits_per_table < 1 || bits_per_table > 32) {
    throw ConfigError("bits_per_table must be in [1, 32], got " + std::to_string(bits_per_table));
  }
  if (index_size_bytes != index_size_for_bits(bits_per_table)) {
    throw ConfigError("index_size_bytes " + std::to_string(index_size_bytes) +
                      " does not match ceil(bits_per_table / 8) = " +
                      std::to_string(index_size_for_bits(bits_per_table)));
  }
  if (index_size_bytes > 4) {
    throw ConfigError("index_size_bytes must not exceed 4");
  }
  if (dimension == 0) {
    throw ConfigError("dimension must be positive");
  }
}

HashFamily::HashFamily(HashFamilyConfig config)
  : config_(config)
{
  config_.validate();
  const std::size_t dim = config_.dimension;
  const std::size_t planes = std::size_t{config_.num_tables} * config_.bits_per_table;
  hyperplanes_.resize(planes * dim);

  // Tables are drawn in order, so a family with fewer tables and the same seed
  // is a prefix of a larger one.
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t p = 0; p < planes; ++p) {
    auto plane = std::span<double>(hyperplanes_).subspan(p * dim, dim);
    double norm = 0.0;
    do {
      for (double& x : plane) {
        x = normal(rng);
      }
      norm = std::sqrt(std::inner_product(plane.begin(), plane.end(), plane.begin(), 0.0));
    } while (norm == 0.0);
    for (double& x : plane) {
      x /= norm;
    }
  }
}

std::span<const double>
HashFamily::hyperplane(std::uint32_t table, std::uint32_t bit) const
{
  const std::size_t p = std::size_t{table} * config_.bits_per_table + bit;
  return std::span<const double>(hyperplanes_).subspan(p * config_.dimension, config_.dimension);
}

std::uint32_t
HashFamily::table_index(std::span<const double> v, std::uint32_t table) const
{
  std::uint32_t index = 0;
  for (std::uint32_t bit = 0; bit < config_.bits_per_table; ++bit) {
    auto plane = hyperplane(table, bit);
    const double dot = std::inner_product(plane.begin(), plane.end(), v.begin(), 0.0);
    index = (index << 1) | (dot >= 0.0 ? 1u : 0u);
  }
  return index;
}

ConcatenatedHash
hash_vector(const HashFamily& family, const FeatureVector& v)
{
  const auto& cfg = family.config();
  if (v.dimension() != cfg.dimension) {
    throw ConfigError("vector dimension " + std::to_string(v.dimension()) +
                      " does not match hash family dimension " + std::to_string(cfg.dimension));
  }
  ConcatenatedHash h;
  h.index_size_bytes = cfg.index_size_bytes;
  h.per_table.reserve(cfg.num_tables);
  for (std::uint32_t t = 0; t < cfg.num_tables; ++t) {
    h.per_table.push_back(family.table_index(v.values, t));
  }
  return h;
}

std::string
encode_hash(const ConcatenatedHash& h)
{
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(h.per_table.size() * h.index_size_bytes * 2);
  for (std::uint32_t index : h.per_table) {
    for (int byte = static_cast<int>(h.index_size_bytes) - 1; byte >= 0; --byte) {
      const auto b = static_cast<std::uint8_t>((std::uint64_t{index} >> (8 * byte)) & 0xFF);
      out.push_back(kDigits[b >> 4]);
      out.push_back(kDigits[b & 0x0F]);
    }
  }
  return out;
}

namespace {

int
hex_value(char c)
{
  if (c >= '0' && c <= '9') {
    return c - '0';
  }
  if (c >= 'A' && c <= 'F') {
    return c - 'A' + 10;
  }
  if (c >= 'a' && c <= 'f') {
    return c - 'a' + 10;
  }
  return -1;
}

} // namespace

bool
is_hex_string(std::string_view s)
{
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return hex_value(c) >= 0; });
}

ConcatenatedHash
decode_hash(std::string_view hex, std::uint32_t index_size_bytes, std::uint32_t num_tables)
{
  if (index_size_bytes == 0 || index_size_bytes > 4) {
    throw MalformedNameError("index size must be in [1, 4] bytes");
  }
  const std::size_t width = std::size_t{index_size_bytes} * 2;
  if (hex.size() != width * num_tables) {
    throw MalformedNameError("hash component '" + std::string(hex) + "' has length " +
                             std::to_string(hex.size()) + ", expected " +
                             std::to_string(width * num_tables));
  }
  ConcatenatedHash h;
  h.index_size_bytes = index_size_bytes;
  h.per_table.reserve(num_tables);
  for (std::uint32_t t = 0; t < num_tables; ++t) {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < width; ++i) {
      const int d = hex_value(hex[t * width + i]);
      if (d < 0) {
        throw MalformedNameError("hash component '" + std::string(hex) +
                                 "' contains a non-hex character");
      }
      index = (index << 4) | static_cast<std::uint64_t>(d);
    }
    h.per_table.push_back(static_cast<std::uint32_t>(index));
  }
  return h;
}

double
cosine_similarity(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size()) {
    throw DegenerateInputError("cosine similarity of vectors with different dimensions");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("cosine similarity of a zero-norm vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double
cosine_similarity(const FeatureVector& a, const FeatureVector& b)
{
  return cosine_similarity(a.values, b.values);
}

namespace {

void
flip_combinations(std::uint32_t base, std::uint32_t bits, std::uint32_t first_bit,
                  std::uint32_t flips_left, std::vector<std::uint32_t>& out)
{
  if (flips_left == 0) {
    out.push_back(base);
    return;
  }
  for (std::uint32_t b = first_bit; b + flips_left <= bits; ++b) {
    flip_combinations(base ^ (1u << b), bits, b + 1, flips_left - 1, out);
  }
}

} // namespace

std::vector<BucketIndex>
probe_set(BucketIndex h, std::uint32_t probe_radius, std::uint32_t bits_per_table)
{
  const std::uint32_t mask =
    bits_per_table >= 32 ? 0xFFFFFFFFu : ((1u << bits_per_table) - 1u);
  const std::uint32_t base = h.index & mask;
  const std::uint32_t max_distance = std::min(probe_radius, bits_per_table);

  std::vector<BucketIndex> out;
  std::vector<std::uint32_t> ring;
  for (std::uint32_t d = 0; d <= max_distance; ++d) {
    ring.clear();
    flip_combinations(base, bits_per_table, 0, d, ring);
    std::sort(ring.begin(), ring.end());
    for (std::uint32_t index : ring) {
      out.push_back({h.table, index});
    }
  }
  return out;
}

} // namespace reservoir
