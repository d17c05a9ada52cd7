#include "reservoir/packet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include <zlib.h>

namespace reservoir {

static_assert(std::endian::native == std::endian::little,
              "input serialization assumes a little-endian host");

const Name&
packet_name(const Packet& p)
{
  return std::visit([](const auto& pkt) -> const Name& { return pkt.name; }, p);
}

std::uint64_t
serialized_input_size(std::size_t dimension)
{
  return sizeof(std::uint32_t) + sizeof(std::int64_t) + dimension * sizeof(double);
}

std::vector<std::uint8_t>
serialize_input(const FeatureVector& v, std::uint64_t padded_size)
{
  const std::uint64_t raw = serialized_input_size(v.dimension());
  std::vector<std::uint8_t> out(std::max(raw, padded_size), 0);
  const auto dim = static_cast<std::uint32_t>(v.dimension());
  std::size_t offset = 0;
  std::memcpy(out.data() + offset, &dim, sizeof(dim));
  offset += sizeof(dim);
  std::memcpy(out.data() + offset, &v.label, sizeof(v.label));
  offset += sizeof(v.label);
  std::memcpy(out.data() + offset, v.values.data(), v.values.size() * sizeof(double));
  return out;
}

FeatureVector
deserialize_input(const std::vector<std::uint8_t>& bytes)
{
  std::uint32_t dim = 0;
  if (bytes.size() < sizeof(dim) + sizeof(std::int64_t)) {
    throw DegenerateInputError("serialized input is truncated");
  }
  FeatureVector v;
  std::size_t offset = 0;
  std::memcpy(&dim, bytes.data() + offset, sizeof(dim));
  offset += sizeof(dim);
  std::memcpy(&v.label, bytes.data() + offset, sizeof(v.label));
  offset += sizeof(v.label);
  if (bytes.size() < serialized_input_size(dim)) {
    throw DegenerateInputError("serialized input is truncated");
  }
  v.values.resize(dim);
  std::memcpy(v.values.data(), bytes.data() + offset, dim * sizeof(double));
  return v;
}

std::uint32_t
input_checksum(const FeatureVector& v)
{
  const auto bytes = serialize_input(v);
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

} // namespace reservoir
