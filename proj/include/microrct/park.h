#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "microrct/catalog.h"
#include "microrct/types.h"

namespace microrct {

inline constexpr int kParkSize = 30;
inline constexpr int kRingInset = 2;

enum class TileKind : std::uint8_t {
  Empty,
  MainPath,
  ConnectorPath,
  AttractionBody,
  AttractionEntrance,
  ParkEntrance,
};

// Vomit is an overlay flag rather than a tile kind: peeps vomit on the
// walkway, and main-path tiles stay immutable after construction.
struct Tile {
  TileKind kind = TileKind::Empty;
  bool vomit = false;
  bool operator==(const Tile&) const = default;
};

bool is_walkable(TileKind k);

struct PlacedAttraction {
  std::string type_id;
  Coord origin;    // footprint top-left
  int width = 1;   // footprint extent, copied from the catalog at placement
  int height = 1;
  Coord entrance;  // walkable tile adjacent to the footprint
  std::vector<Coord> connector;  // built path from entrance toward the main path
  bool operator==(const PlacedAttraction&) const = default;
};

// Set on parks evaluated by the search loop; lets tools re-run the exact
// simulation that produced the stored fitness.
struct EvalInfo {
  std::uint64_t sim_seed = 0;
  int generation = 0;
  int index = 0;
  bool operator==(const EvalInfo&) const = default;
};

// The chromosome: a fixed 30x30 grid with a ring walkway plus placed
// attractions. fitness/descriptor are unset until evaluated.
struct Park {
  std::vector<Tile> grid;  // row-major, kParkSize * kParkSize
  std::vector<PlacedAttraction> attractions;
  std::optional<Dollars> fitness;
  std::optional<Descriptor> descriptor;
  std::optional<EvalInfo> eval;

  Tile& at(int x, int y) { return grid[static_cast<size_t>(y) * kParkSize + x]; }
  const Tile& at(int x, int y) const { return grid[static_cast<size_t>(y) * kParkSize + x]; }
  static bool in_bounds(int x, int y) {
    return x >= 0 && x < kParkSize && y >= 0 && y < kParkSize;
  }
};

// Empty park: ring main path at inset 2, park entrance in the upper-left
// corner joined to the ring by a short spur. Deterministic.
Park make_park();

Coord park_entrance();
int main_path_tile_count();  // ring + spur, for layout checks

enum class PlaceResult {
  Placed,
  RejectedBounds,
  RejectedOverlap,
  RejectedNoRoute,
};

// Places one instance with footprint top-left at `origin`. Picks the first
// free perimeter tile (row-major) from which a connector route exists,
// marks footprint/entrance/connector tiles. On rejection the park is
// unchanged.
PlaceResult place_attraction(Park& park, const AttractionType& type, Coord origin);

// Shortest 4-connected route from `entrance` through empty tiles to any
// tile adjacent to the main path or an existing connector. Returns the
// route (excluding the entrance) and marks its tiles, or nullopt when no
// route exists. An entrance already adjacent to path yields an empty route.
std::optional<std::vector<Coord>> build_connector(Park& park, Coord entrance);

// Clears footprint and entrance tiles; connector tiles stay behind as
// walkable stubs. Throws std::out_of_range on a bad index.
void remove_attraction(Park& park, int index);

// 30 lines of 30 glyphs. Footprints use catalog glyphs, paths/entrances use
// fixed characters, vomit overlays everything.
std::string render_ascii(const Park& park, const Catalog& catalog);

Dollars build_cost(const Park& park, const Catalog& catalog);

// Flood fill over walkable tiles from the park entrance; true when every
// attraction entrance is reachable.
bool entrances_connected(const Park& park);

// Hash of the layout (grid kinds + attraction list). Ignores vomit overlay,
// fitness, descriptor and eval metadata.
std::uint64_t park_hash(const Park& park);

nlohmann::json park_to_json(const Park& park);
// Validates grid/attraction consistency against the catalog; throws
// ParseError on malformed or inconsistent documents.
Park park_from_json(const nlohmann::json& j, const Catalog& catalog);

void save_park(const std::filesystem::path& path, const Park& park);
Park load_park(const std::filesystem::path& path, const Catalog& catalog);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace microrct
