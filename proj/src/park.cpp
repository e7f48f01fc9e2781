#include "microrct/park.h"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace microrct {

namespace {

constexpr std::array<Coord, 4> kSteps = {{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};  // N, E, S, W

int tile_index(int x, int y) { return y * kParkSize + x; }

bool on_ring(int x, int y) {
  const int lo = kRingInset;
  const int hi = kParkSize - 1 - kRingInset;
  if (x < lo || x > hi || y < lo || y > hi) return false;
  return x == lo || x == hi || y == lo || y == hi;
}

// Perimeter tiles of a w×h footprint at origin, sorted row-major. These are
// the candidate entrance positions.
std::vector<Coord> footprint_perimeter(Coord origin, int w, int h) {
  std::vector<Coord> out;
  for (int x = origin.x; x < origin.x + w; ++x) {
    out.push_back({x, origin.y - 1});
    out.push_back({x, origin.y + h});
  }
  for (int y = origin.y; y < origin.y + h; ++y) {
    out.push_back({origin.x - 1, y});
    out.push_back({origin.x + w, y});
  }
  std::sort(out.begin(), out.end(), [](const Coord& a, const Coord& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return out;
}

bool adjacent_to_path(const Park& park, Coord c) {
  for (const auto& s : kSteps) {
    int nx = c.x + s.x;
    int ny = c.y + s.y;
    if (!Park::in_bounds(nx, ny)) continue;
    TileKind k = park.at(nx, ny).kind;
    if (k == TileKind::MainPath || k == TileKind::ConnectorPath) return true;
  }
  return false;
}

void append_coord(std::string& out, Coord c) {
  out += std::to_string(c.x);
  out += ',';
  out += std::to_string(c.y);
  out += ';';
}

}  // namespace

bool is_walkable(TileKind k) {
  switch (k) {
    case TileKind::MainPath:
    case TileKind::ConnectorPath:
    case TileKind::AttractionEntrance:
    case TileKind::ParkEntrance:
      return true;
    default:
      return false;
  }
}

Park make_park() {
  Park park;
  park.grid.assign(static_cast<size_t>(kParkSize) * kParkSize, Tile{});
  for (int y = 0; y < kParkSize; ++y) {
    for (int x = 0; x < kParkSize; ++x) {
      if (on_ring(x, y)) park.at(x, y).kind = TileKind::MainPath;
    }
  }
  park.at(0, 0).kind = TileKind::ParkEntrance;
  // Spur joining the corner entrance to the ring.
  park.at(1, 0).kind = TileKind::MainPath;
  park.at(2, 0).kind = TileKind::MainPath;
  park.at(2, 1).kind = TileKind::MainPath;
  return park;
}

Coord park_entrance() { return {0, 0}; }

int main_path_tile_count() {
  static const int count = [] {
    Park p = make_park();
    int n = 0;
    for (const auto& t : p.grid) {
      if (t.kind == TileKind::MainPath) ++n;
    }
    return n;
  }();
  return count;
}

std::optional<std::vector<Coord>> build_connector(Park& park, Coord entrance) {
  if (!Park::in_bounds(entrance.x, entrance.y)) return std::nullopt;
  if (adjacent_to_path(park, entrance)) return std::vector<Coord>{};

  const int n = kParkSize * kParkSize;
  std::vector<int> parent(static_cast<size_t>(n), -2);  // -2 unvisited, -1 root
  std::deque<Coord> queue;
  parent[static_cast<size_t>(tile_index(entrance.x, entrance.y))] = -1;
  queue.push_back(entrance);

  while (!queue.empty()) {
    Coord cur = queue.front();
    queue.pop_front();
    for (const auto& s : kSteps) {
      Coord next{cur.x + s.x, cur.y + s.y};
      if (!Park::in_bounds(next.x, next.y)) continue;
      int idx = tile_index(next.x, next.y);
      if (parent[static_cast<size_t>(idx)] != -2) continue;
      if (park.at(next.x, next.y).kind != TileKind::Empty) continue;
      parent[static_cast<size_t>(idx)] = tile_index(cur.x, cur.y);
      if (adjacent_to_path(park, next)) {
        std::vector<Coord> route;
        for (int at = idx; at != tile_index(entrance.x, entrance.y);
             at = parent[static_cast<size_t>(at)]) {
          route.push_back({at % kParkSize, at / kParkSize});
        }
        std::reverse(route.begin(), route.end());
        for (const auto& c : route) park.at(c.x, c.y).kind = TileKind::ConnectorPath;
        return route;
      }
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

PlaceResult place_attraction(Park& park, const AttractionType& type, Coord origin) {
  const int w = type.width;
  const int h = type.height;
  if (origin.x < 0 || origin.y < 0 || origin.x + w > kParkSize || origin.y + h > kParkSize) {
    return PlaceResult::RejectedBounds;
  }
  for (int y = origin.y; y < origin.y + h; ++y) {
    for (int x = origin.x; x < origin.x + w; ++x) {
      if (park.at(x, y).kind != TileKind::Empty) return PlaceResult::RejectedOverlap;
    }
  }

  for (int y = origin.y; y < origin.y + h; ++y) {
    for (int x = origin.x; x < origin.x + w; ++x) {
      park.at(x, y).kind = TileKind::AttractionBody;
    }
  }

  for (const auto& cand : footprint_perimeter(origin, w, h)) {
    if (!Park::in_bounds(cand.x, cand.y)) continue;
    if (park.at(cand.x, cand.y).kind != TileKind::Empty) continue;
    if (auto route = build_connector(park, cand)) {
      park.at(cand.x, cand.y).kind = TileKind::AttractionEntrance;
      park.attractions.push_back({type.id, origin, w, h, cand, std::move(*route)});
      return PlaceResult::Placed;
    }
  }

  for (int y = origin.y; y < origin.y + h; ++y) {
    for (int x = origin.x; x < origin.x + w; ++x) {
      park.at(x, y).kind = TileKind::Empty;
    }
  }
  return PlaceResult::RejectedNoRoute;
}

void remove_attraction(Park& park, int index) {
  if (index < 0 || static_cast<size_t>(index) >= park.attractions.size()) {
    throw std::out_of_range("remove_attraction: index " + std::to_string(index) + " of " +
                            std::to_string(park.attractions.size()));
  }
  const PlacedAttraction& a = park.attractions[static_cast<size_t>(index)];
  for (int y = a.origin.y; y < a.origin.y + a.height; ++y) {
    for (int x = a.origin.x; x < a.origin.x + a.width; ++x) {
      park.at(x, y).kind = TileKind::Empty;
    }
  }
  park.at(a.entrance.x, a.entrance.y).kind = TileKind::Empty;
  park.attractions.erase(park.attractions.begin() + index);
}

std::string render_ascii(const Park& park, const Catalog& catalog) {
  std::vector<std::string> cells(static_cast<size_t>(kParkSize) * kParkSize, ".");
  for (int y = 0; y < kParkSize; ++y) {
    for (int x = 0; x < kParkSize; ++x) {
      switch (park.at(x, y).kind) {
        case TileKind::Empty:
          break;
        case TileKind::MainPath:
          cells[static_cast<size_t>(tile_index(x, y))] = "#";
          break;
        case TileKind::ConnectorPath:
          cells[static_cast<size_t>(tile_index(x, y))] = ",";
          break;
        case TileKind::AttractionBody:
          cells[static_cast<size_t>(tile_index(x, y))] = "?";
          break;
        case TileKind::AttractionEntrance:
          cells[static_cast<size_t>(tile_index(x, y))] = "o";
          break;
        case TileKind::ParkEntrance:
          cells[static_cast<size_t>(tile_index(x, y))] = "@";
          break;
      }
    }
  }
  for (const auto& a : park.attractions) {
    const AttractionType* type = catalog.find(a.type_id);
    if (type == nullptr) continue;
    for (int y = a.origin.y; y < a.origin.y + a.height; ++y) {
      for (int x = a.origin.x; x < a.origin.x + a.width; ++x) {
        cells[static_cast<size_t>(tile_index(x, y))] = type->glyph;
      }
    }
  }
  for (int y = 0; y < kParkSize; ++y) {
    for (int x = 0; x < kParkSize; ++x) {
      if (park.at(x, y).vomit) cells[static_cast<size_t>(tile_index(x, y))] = "*";
    }
  }

  std::string out;
  for (int y = 0; y < kParkSize; ++y) {
    for (int x = 0; x < kParkSize; ++x) {
      out += cells[static_cast<size_t>(tile_index(x, y))];
    }
    out += '\n';
  }
  return out;
}

Dollars build_cost(const Park& park, const Catalog& catalog) {
  Dollars sum = 0;
  for (const auto& a : park.attractions) {
    const AttractionType* type = catalog.find(a.type_id);
    if (type == nullptr) {
      throw ParseError("build_cost: unknown attraction type '" + a.type_id + "'");
    }
    sum += total_cost(*type);
  }
  return sum;
}

bool entrances_connected(const Park& park) {
  std::vector<std::uint8_t> seen(park.grid.size(), 0);
  std::deque<Coord> queue;
  Coord start = park_entrance();
  seen[static_cast<size_t>(tile_index(start.x, start.y))] = 1;
  queue.push_back(start);
  while (!queue.empty()) {
    Coord cur = queue.front();
    queue.pop_front();
    for (const auto& s : kSteps) {
      Coord next{cur.x + s.x, cur.y + s.y};
      if (!Park::in_bounds(next.x, next.y)) continue;
      int idx = tile_index(next.x, next.y);
      if (seen[static_cast<size_t>(idx)]) continue;
      if (!is_walkable(park.at(next.x, next.y).kind)) continue;
      seen[static_cast<size_t>(idx)] = 1;
      queue.push_back(next);
    }
  }
  for (const auto& a : park.attractions) {
    if (!seen[static_cast<size_t>(tile_index(a.entrance.x, a.entrance.y))]) return false;
  }
  return true;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t park_hash(const Park& park) {
  std::string canon;
  canon.reserve(park.grid.size() + park.attractions.size() * 32);
  for (const auto& t : park.grid) {
    canon += static_cast<char>('0' + static_cast<int>(t.kind));
  }
  for (const auto& a : park.attractions) {
    canon += a.type_id;
    canon += '\n';
    append_coord(canon, a.origin);
    append_coord(canon, a.entrance);
    for (const auto& c : a.connector) append_coord(canon, c);
    canon += '\n';
  }
  return fnv1a64(canon);
}

nlohmann::json park_to_json(const Park& park) {
  nlohmann::json j;
  j["version"] = 1;
  j["size"] = kParkSize;

  nlohmann::json rle = nlohmann::json::array();
  size_t i = 0;
  while (i < park.grid.size()) {
    size_t run = 1;
    while (i + run < park.grid.size() && park.grid[i + run].kind == park.grid[i].kind) ++run;
    rle.push_back({static_cast<int>(park.grid[i].kind), run});
    i += run;
  }
  j["grid_rle"] = std::move(rle);

  nlohmann::json vomit = nlohmann::json::array();
  for (int y = 0; y < kParkSize; ++y) {
    for (int x = 0; x < kParkSize; ++x) {
      if (park.at(x, y).vomit) vomit.push_back({x, y});
    }
  }
  j["vomit"] = std::move(vomit);

  nlohmann::json attractions = nlohmann::json::array();
  for (const auto& a : park.attractions) {
    nlohmann::json ja;
    ja["type_id"] = a.type_id;
    ja["origin"] = {a.origin.x, a.origin.y};
    ja["entrance"] = {a.entrance.x, a.entrance.y};
    nlohmann::json conn = nlohmann::json::array();
    for (const auto& c : a.connector) conn.push_back({c.x, c.y});
    ja["connector"] = std::move(conn);
    attractions.push_back(std::move(ja));
  }
  j["attractions"] = std::move(attractions);

  if (park.fitness) j["fitness"] = *park.fitness;
  if (park.descriptor) j["descriptor"] = {park.descriptor->a, park.descriptor->b};
  if (park.eval) {
    j["eval"] = {{"sim_seed", park.eval->sim_seed},
                 {"generation", park.eval->generation},
                 {"index", park.eval->index}};
  }
  return j;
}

namespace {

Coord coord_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError("park document: expected [x, y] coordinate");
  }
  Coord c{j[0].get<int>(), j[1].get<int>()};
  if (!Park::in_bounds(c.x, c.y)) {
    throw ParseError("park document: coordinate out of bounds (" + std::to_string(c.x) + ", " +
                     std::to_string(c.y) + ")");
  }
  return c;
}

}  // namespace

Park park_from_json(const nlohmann::json& j, const Catalog& catalog) {
  if (!j.is_object()) throw ParseError("park document: not an object");
  if (j.value("version", 0) != 1) throw ParseError("park document: unsupported version");
  if (j.value("size", 0) != kParkSize) throw ParseError("park document: unsupported grid size");

  Park park;
  park.grid.assign(static_cast<size_t>(kParkSize) * kParkSize, Tile{});
  if (!j.contains("grid_rle") || !j["grid_rle"].is_array()) {
    throw ParseError("park document: missing grid_rle");
  }
  size_t pos = 0;
  for (const auto& run : j["grid_rle"]) {
    if (!run.is_array() || run.size() != 2) throw ParseError("park document: malformed rle run");
    int kind = run[0].get<int>();
    auto count = run[1].get<std::int64_t>();
    if (kind < 0 || kind > static_cast<int>(TileKind::ParkEntrance)) {
      throw ParseError("park document: tile kind out of range");
    }
    if (count <= 0 || pos + static_cast<size_t>(count) > park.grid.size()) {
      throw ParseError("park document: rle overruns grid");
    }
    for (std::int64_t k = 0; k < count; ++k) {
      park.grid[pos++].kind = static_cast<TileKind>(kind);
    }
  }
  if (pos != park.grid.size()) throw ParseError("park document: rle short of grid");

  for (const auto& jv : j.value("vomit", nlohmann::json::array())) {
    Coord c = coord_from_json(jv);
    park.at(c.x, c.y).vomit = true;
  }

  const Park reference = make_park();
  for (size_t i = 0; i < park.grid.size(); ++i) {
    bool fixed_ref = reference.grid[i].kind == TileKind::MainPath ||
                     reference.grid[i].kind == TileKind::ParkEntrance;
    bool fixed_here = park.grid[i].kind == TileKind::MainPath ||
                      park.grid[i].kind == TileKind::ParkEntrance;
    if (fixed_ref != fixed_here ||
        (fixed_ref && park.grid[i].kind != reference.grid[i].kind)) {
      throw ParseError("park document: main path layout does not match the fixed ring");
    }
  }

  for (const auto& ja : j.value("attractions", nlohmann::json::array())) {
    PlacedAttraction a;
    a.type_id = ja.value("type_id", std::string());
    const AttractionType* type = catalog.find(a.type_id);
    if (type == nullptr) {
      throw ParseError("park document: unknown attraction type '" + a.type_id + "'");
    }
    a.origin = coord_from_json(ja.at("origin"));
    a.width = type->width;
    a.height = type->height;
    a.entrance = coord_from_json(ja.at("entrance"));
    for (const auto& jc : ja.value("connector", nlohmann::json::array())) {
      a.connector.push_back(coord_from_json(jc));
    }
    if (a.origin.x + type->width > kParkSize || a.origin.y + type->height > kParkSize) {
      throw ParseError("park document: footprint out of bounds for '" + a.type_id + "'");
    }
    for (int y = a.origin.y; y < a.origin.y + type->height; ++y) {
      for (int x = a.origin.x; x < a.origin.x + type->width; ++x) {
        if (park.at(x, y).kind != TileKind::AttractionBody) {
          throw ParseError("park document: grid/attraction mismatch at footprint of '" +
                           a.type_id + "'");
        }
      }
    }
    if (park.at(a.entrance.x, a.entrance.y).kind != TileKind::AttractionEntrance) {
      throw ParseError("park document: entrance tile mismatch for '" + a.type_id + "'");
    }
    for (const auto& c : a.connector) {
      if (park.at(c.x, c.y).kind != TileKind::ConnectorPath) {
        throw ParseError("park document: connector tile mismatch for '" + a.type_id + "'");
      }
    }
    park.attractions.push_back(std::move(a));
  }

  if (j.contains("fitness")) park.fitness = j["fitness"].get<Dollars>();
  if (j.contains("descriptor")) {
    const auto& jd = j["descriptor"];
    if (!jd.is_array() || jd.size() != 2) throw ParseError("park document: malformed descriptor");
    park.descriptor = Descriptor{jd[0].get<int>(), jd[1].get<int>()};
  }
  if (j.contains("eval")) {
    const auto& je = j["eval"];
    EvalInfo info;
    info.sim_seed = je.value("sim_seed", 0ull);
    info.generation = je.value("generation", 0);
    info.index = je.value("index", 0);
    park.eval = info;
  }
  return park;
}

void save_park(const std::filesystem::path& path, const Park& park) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write park file '" + path.string() + "'");
  out << park_to_json(park).dump(2) << "\n";
}

Park load_park(const std::filesystem::path& path, const Catalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open park file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("park file '" + path.string() + "': " + e.what());
  }
  return park_from_json(j, catalog);
}

}  // namespace microrct
