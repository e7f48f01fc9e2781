#pragma once

#include <compare>
#include <cstdint>

namespace microrct {

using Dollars = std::int64_t;

struct Coord {
  int x = 0;
  int y = 0;
  auto operator<=>(const Coord&) const = default;
};

// Bucketed 2-D behavior descriptor. Values are multiples of their
// dimension's bucket size.
struct Descriptor {
  int a = 0;
  int b = 0;
  auto operator<=>(const Descriptor&) const = default;
};

}  // namespace microrct
