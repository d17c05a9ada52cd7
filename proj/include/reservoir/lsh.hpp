#pragma once

#include "reservoir/common.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reservoir {

/// Task input data. The label is ground truth, only read by metrics.
struct FeatureVector
{
  std::vector<double> values;
  std::int64_t label = 0;

  std::size_t
  dimension() const
  {
    return values.size();
  }
};

/// Throws DegenerateInputError when empty or containing non-finite values.
void
validate_feature_vector(const FeatureVector& v);

/// Bytes needed to hold a k-bit bucket index.
std::uint32_t
index_size_for_bits(std::uint32_t bits_per_table);

struct HashFamilyConfig
{
  std::uint32_t num_tables = 5;
  std::uint32_t bits_per_table = 16;
  std::uint32_t index_size_bytes = 2;
  std::size_t dimension = 128;
  std::uint64_t seed = 1;

  /// Fills index_size_bytes from bits_per_table.
  static HashFamilyConfig
  make(std::uint32_t num_tables, std::uint32_t bits_per_table, std::size_t dimension,
       std::uint64_t seed);

  void
  validate() const;

  std::uint64_t
  buckets_per_table() const
  {
    return std::uint64_t{1} << bits_per_table;
  }

  friend bool
  operator==(const HashFamilyConfig&, const HashFamilyConfig&) = default;
};

struct BucketIndex
{
  std::uint32_t table = 0;
  std::uint32_t index = 0;

  friend auto
  operator<=>(const BucketIndex&, const BucketIndex&) = default;
};

/// One bucket index per table, in table order.
struct ConcatenatedHash
{
  std::vector<std::uint32_t> per_table;
  std::uint32_t index_size_bytes = 1;

  std::size_t
  num_tables() const
  {
    return per_table.size();
  }

  BucketIndex
  at(std::uint32_t table) const
  {
    return {table, per_table.at(table)};
  }

  friend bool
  operator==(const ConcatenatedHash&, const ConcatenatedHash&) = default;
};

/// Random-hyperplane (sign pattern) hash family: L tables of k unit hyperplanes.
class HashFamily
{
public:
  explicit HashFamily(HashFamilyConfig config);

  const HashFamilyConfig&
  config() const
  {
    return config_;
  }

  /// Hyperplane `bit` of table `table`.
  std::span<const double>
  hyperplane(std::uint32_t table, std::uint32_t bit) const;

  /// k-bit sign pattern of v in one table; hyperplane 0 is the most significant bit.
  std::uint32_t
  table_index(std::span<const double> v, std::uint32_t table) const;

private:
  HashFamilyConfig config_;
  std::vector<double> hyperplanes_;
};

/// Bit i is set iff dot(v, hyperplane_i) >= 0.
ConcatenatedHash
hash_vector(const HashFamily& family, const FeatureVector& v);

/// Uppercase, big-endian, fixed width hex; index_size_bytes * 2 characters per table.
std::string
encode_hash(const ConcatenatedHash& h);

/// Inverse of encode_hash. Throws MalformedNameError on bad length or characters.
ConcatenatedHash
decode_hash(std::string_view hex, std::uint32_t index_size_bytes, std::uint32_t num_tables);

bool
is_hex_string(std::string_view s);

/// Throws DegenerateInputError for zero-norm inputs or mismatched dimensions.
double
cosine_similarity(const FeatureVector& a, const FeatureVector& b);

double
cosine_similarity(std::span<const double> a, std::span<const double> b);

/// All indices of the same table within Hamming distance `probe_radius` of h over
/// the low `bits_per_table` bits, ordered by distance, then by index.
std::vector<BucketIndex>
probe_set(BucketIndex h, std::uint32_t probe_radius, std::uint32_t bits_per_table);

inline constexpr std::uint32_t kDefaultProbeRadius = 1;

} // namespace reservoir
