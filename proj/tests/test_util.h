#pragma once

#include <optional>

#include "microrct/catalog.h"
#include "microrct/mapelites.h"
#include "microrct/park.h"
#include "microrct/rng.h"

namespace microrct::testutil {

// Park with up to max_attractions randomly placed attractions; placement
// failures are simply skipped.
inline Park random_park(const Catalog& catalog, Rng& rng, int max_attractions = 8,
                        std::optional<Dollars> budget = std::nullopt) {
  Park park = make_park();
  int n = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_attractions) + 1));
  for (int i = 0; i < n; ++i) {
    const auto& type =
        catalog.types[static_cast<size_t>(
            catalog.mutatable[static_cast<size_t>(rng.bounded(catalog.mutatable.size()))])];
    attempt_add(park, type, catalog, budget, rng);
  }
  return park;
}

}  // namespace microrct::testutil
