#include "reservoir/timing.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace reservoir {

namespace {

constexpr std::array<double, 3> kTableCounts{1.0, 5.0, 10.0};
constexpr std::array<double, 3> kHashingMs{0.4, 1.7, 3.3};

constexpr std::array<std::size_t, 5> kSearchRows{20000, 40000, 60000, 80000, 100000};
constexpr std::array<std::array<double, 3>, 5> kSearchMs{{
  {0.09, 1.08, 1.43},
  {0.10, 1.70, 2.21},
  {0.11, 2.62, 3.05},
  {0.13, 3.25, 3.61},
  {0.22, 3.92, 4.40},
}};

double
interpolate(const std::array<double, 3>& ys, double tables)
{
  std::size_t seg = tables <= kTableCounts[1] ? 0 : 1;
  const double x0 = kTableCounts[seg];
  const double x1 = kTableCounts[seg + 1];
  const double y = ys[seg] + (ys[seg + 1] - ys[seg]) * (tables - x0) / (x1 - x0);
  return std::max(y, 0.0);
}

} // namespace

Duration
lsh_hashing_delay(std::uint32_t num_tables)
{
  return from_ms(interpolate(kHashingMs, static_cast<double>(num_tables)));
}

Duration
lsh_search_delay(std::uint32_t num_tables, std::size_t stored_items)
{
  std::size_t row = kSearchRows.size() - 1;
  for (std::size_t r = 0; r < kSearchRows.size(); ++r) {
    if (stored_items <= kSearchRows[r]) {
      row = r;
      break;
    }
  }
  return from_ms(interpolate(kSearchMs[row], static_cast<double>(num_tables)));
}

} // namespace reservoir
