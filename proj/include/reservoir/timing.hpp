#pragma once

#include "reservoir/common.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace reservoir {

/// Device-side LSH hashing cost by table count: 1 table 0.4 ms, 5 tables 1.7 ms,
/// 10 tables 3.3 ms. Other counts are interpolated linearly between neighbours
/// and extrapolated from the nearest segment.
Duration
lsh_hashing_delay(std::uint32_t num_tables);

/// EN nearest-neighbour search cost by table count and stored items:
///
///   items   1 table  5 tables  10 tables (ms)
///   20K     0.09     1.08      1.43
///   40K     0.10     1.70      2.21
///   60K     0.11     2.62      3.05
///   80K     0.13     3.25      3.61
///   100K    0.22     3.92      4.40
///
/// The row is the smallest one holding `stored_items` (capped at 100K); table
/// counts between columns are interpolated.
Duration
lsh_search_delay(std::uint32_t num_tables, std::size_t stored_items);

/// Fixed overrides for the two tables above.
struct LshTiming
{
  std::optional<Duration> hashing;
  std::optional<Duration> search;
  Duration noreuse_hashing{0};

  Duration
  hashing_delay(std::uint32_t num_tables) const
  {
    return hashing ? *hashing : lsh_hashing_delay(num_tables);
  }

  Duration
  search_delay(std::uint32_t num_tables, std::size_t stored_items) const
  {
    return search ? *search : lsh_search_delay(num_tables, stored_items);
  }
};

} // namespace reservoir
