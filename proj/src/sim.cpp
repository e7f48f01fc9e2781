#include "microrct/sim.h"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <ostream>

namespace microrct {

namespace {

constexpr int kTiles = kParkSize * kParkSize;
constexpr std::array<int, 4> kStepDx = {0, 1, 0, -1};  // N, E, S, W
constexpr std::array<int, 4> kStepDy = {-1, 0, 1, 0};

int tile_index(Coord c) { return c.y * kParkSize + c.x; }
Coord tile_coord(int idx) { return {idx % kParkSize, idx / kParkSize}; }

int clamp_happiness(int v) { return std::clamp(v, 0, kHappinessMax); }
int clamp_nausea(int v) { return std::clamp(v, 0, kNauseaMax); }

// Depth-first route from `from` to `to` over walkable tiles, fixed N/E/S/W
// expansion order with per-journey visited marks. The route excludes `from`
// and ends at `to`; empty when already there. Deliberately not a shortest
// path: the stack at the moment the target is reached is the route.
bool dfs_route(const World& world, int from, int to, std::vector<std::uint16_t>& route,
               std::vector<std::uint8_t>& visited,
               std::vector<std::pair<std::uint16_t, std::uint8_t>>& stack) {
  route.clear();
  if (from == to) return true;
  std::fill(visited.begin(), visited.end(), 0);
  stack.clear();
  visited[static_cast<size_t>(from)] = 1;
  stack.push_back({static_cast<std::uint16_t>(from), 0});

  while (!stack.empty()) {
    auto& [cur, dir] = stack.back();
    if (dir == 4) {
      stack.pop_back();
      continue;
    }
    int d = dir++;
    Coord c = tile_coord(cur);
    int nx = c.x + kStepDx[static_cast<size_t>(d)];
    int ny = c.y + kStepDy[static_cast<size_t>(d)];
    if (!Park::in_bounds(nx, ny)) continue;
    int next = ny * kParkSize + nx;
    if (visited[static_cast<size_t>(next)] || !world.walkable[static_cast<size_t>(next)]) continue;
    visited[static_cast<size_t>(next)] = 1;
    stack.push_back({static_cast<std::uint16_t>(next), 0});
    if (next == to) {
      route.reserve(stack.size() - 1);
      for (size_t i = 1; i < stack.size(); ++i) route.push_back(stack[i].first);
      return true;
    }
  }
  return false;
}

// Nearest target by squared straight-line distance to the entrance tile;
// ties keep the lowest attraction index. -1 when nothing qualifies.
int nearest_target(const World& world, Coord pos, int tolerance, bool first_aid_only) {
  int best = -1;
  long long best_dist = 0;
  for (size_t i = 0; i < world.targets.size(); ++i) {
    const World::Target& t = world.targets[i];
    if (first_aid_only) {
      if (!t.first_aid) continue;
    } else if (t.intensity > tolerance) {
      continue;
    }
    Coord e = tile_coord(t.tile);
    long long dx = e.x - pos.x;
    long long dy = e.y - pos.y;
    long long dist = dx * dx + dy * dy;
    if (best < 0 || dist < best_dist) {
      best = static_cast<int>(i);
      best_dist = dist;
    }
  }
  return best;
}

void apply_interaction(Peep& peep, const Catalog& catalog, World& world, int target_index) {
  const World::Target& t = world.targets[static_cast<size_t>(target_index)];
  const AttractionType& type = catalog.types[static_cast<size_t>(t.type_index)];

  peep.money_spent += type.ticket_price;
  world.revenue += type.ticket_price;
  world.income_by_type[static_cast<size_t>(t.type_index)] += type.ticket_price;

  peep.nausea = clamp_nausea(peep.nausea + type.nausea);

  bool facility = type.category == Category::Shop || type.category == Category::Toilet ||
                  type.category == Category::FirstAid;
  if (facility || type.intensity <= peep.intensity_tolerance) {
    peep.happiness_target = clamp_happiness(peep.happiness_target + type.excitement / 4);
  } else {
    peep.happiness_target =
        clamp_happiness(peep.happiness_target - (type.intensity - peep.intensity_tolerance));
  }

  if (type.category == Category::FirstAid) peep.nausea = 0;
  peep.state = PeepState::Interacting;
}

void mark_vomit(World& world, int tile) {
  ++world.vomit_count;
  if (!world.vomit[static_cast<size_t>(tile)]) {
    world.vomit[static_cast<size_t>(tile)] = 1;
    world.vomit_tiles.push_back(static_cast<std::uint16_t>(tile));
  }
}

void notice_dirt(Peep& peep, const World& world) {
  if (world.vomit_tiles.empty()) return;
  const int r = world.config.sight_radius;
  auto consider = [&](int tile) {
    size_t word = static_cast<size_t>(tile) / 64;
    std::uint64_t bit = 1ull << (static_cast<size_t>(tile) % 64);
    if (peep.seen_vomit[word] & bit) return;
    peep.seen_vomit[word] |= bit;
    peep.happiness_target = clamp_happiness(peep.happiness_target - world.config.dirt_penalty);
  };

  const size_t window = static_cast<size_t>(2 * r + 1) * static_cast<size_t>(2 * r + 1);
  if (world.vomit_tiles.size() <= window) {
    for (std::uint16_t tile : world.vomit_tiles) {
      Coord c = tile_coord(tile);
      if (std::abs(c.x - peep.pos.x) <= r && std::abs(c.y - peep.pos.y) <= r) consider(tile);
    }
  } else {
    for (int y = std::max(0, peep.pos.y - r); y <= std::min(kParkSize - 1, peep.pos.y + r); ++y) {
      for (int x = std::max(0, peep.pos.x - r); x <= std::min(kParkSize - 1, peep.pos.x + r);
           ++x) {
        int tile = y * kParkSize + x;
        if (world.vomit[static_cast<size_t>(tile)]) consider(tile);
      }
    }
  }
}

}  // namespace

std::string_view peep_state_name(PeepState s) {
  switch (s) {
    case PeepState::Idle:
      return "idle";
    case PeepState::Walking:
      return "walking";
    case PeepState::Interacting:
      return "interacting";
  }
  return "unknown";
}

World make_world(const Park& park, const Catalog& catalog, const SimConfig& config) {
  World world;
  world.config = config;
  world.walkable.resize(static_cast<size_t>(kTiles));
  world.vomit.assign(static_cast<size_t>(kTiles), 0);
  for (int i = 0; i < kTiles; ++i) {
    world.walkable[static_cast<size_t>(i)] = is_walkable(park.grid[static_cast<size_t>(i)].kind);
  }
  for (const auto& a : park.attractions) {
    int type_index = catalog.index_of(a.type_id);
    if (type_index < 0) {
      throw ParseError("simulate: unknown attraction type '" + a.type_id + "'");
    }
    const AttractionType& type = catalog.types[static_cast<size_t>(type_index)];
    World::Target t;
    t.tile = static_cast<std::uint16_t>(tile_index(a.entrance));
    t.type_index = type_index;
    t.intensity = type.intensity;
    t.first_aid = type.category == Category::FirstAid;
    world.has_first_aid = world.has_first_aid || t.first_aid;
    world.targets.push_back(t);
  }
  world.income_by_type.assign(catalog.types.size(), 0);
  world.visited.assign(static_cast<size_t>(kTiles), 0);
  return world;
}

Peep spawn_peep(Coord entrance, const SimConfig& config, Rng& rng) {
  Peep p;
  p.pos = entrance;
  p.happiness = rng.uniform_int(kSpawnHappinessMin, kSpawnHappinessMax);
  p.happiness_target = p.happiness;
  p.nausea = 0;
  p.intensity_tolerance = rng.uniform_int(config.tolerance_min, config.tolerance_max);
  p.seen_vomit.assign((static_cast<size_t>(kTiles) + 63) / 64, 0);
  return p;
}

bool peep_tick(Peep& peep, const Park& park, const Catalog& catalog, World& world, Rng& rng) {
  (void)park;
  const SimConfig& config = world.config;

  // 1. Goal selection. Walking peeps stay committed to their route; idle and
  // just-interacted peeps pick again.
  if (peep.state != PeepState::Walking) {
    bool first_aid_only = peep.nausea > config.vomit_threshold && world.has_first_aid;
    int here = tile_index(peep.pos);
    int goal;
    if (peep.cache_goal != -2 && peep.cache_tile == here && peep.cache_flag == first_aid_only) {
      goal = peep.cache_goal;
    } else {
      goal = nearest_target(world, peep.pos, peep.intensity_tolerance, first_aid_only);
      peep.cache_tile = here;
      peep.cache_flag = first_aid_only;
      peep.cache_goal = goal;
    }
    peep.goal = goal;
    peep.state = PeepState::Idle;
    if (goal >= 0) {
      int target_tile = world.targets[static_cast<size_t>(goal)].tile;
      if (dfs_route(world, here, target_tile, peep.route, world.visited, world.stack)) {
        peep.route_pos = 0;
        peep.state = PeepState::Walking;
      } else {
        peep.goal = -1;
      }
    }
  }

  // 2. One step along the route; 3. interaction on arrival, same tick.
  if (peep.state == PeepState::Walking) {
    if (peep.route_pos < peep.route.size()) {
      peep.pos = tile_coord(peep.route[peep.route_pos]);
      ++peep.route_pos;
    }
    if (peep.route_pos >= peep.route.size()) {
      apply_interaction(peep, catalog, world, peep.goal);
    }
  }

  // 4. Happiness relaxes toward its target, one step per tick, no overshoot.
  if (peep.happiness < peep.happiness_target) {
    peep.happiness = std::min(peep.happiness + config.happiness_step, peep.happiness_target);
  } else if (peep.happiness > peep.happiness_target) {
    peep.happiness = std::max(peep.happiness - config.happiness_step, peep.happiness_target);
  }

  // 5. Vomit chance only above the threshold, strictly.
  bool vomited = false;
  if (peep.nausea > config.vomit_threshold) {
    double p = static_cast<double>(peep.nausea - config.vomit_threshold) /
               static_cast<double>(config.vomit_base_divisor);
    if (rng.chance(p)) {
      mark_vomit(world, tile_index(peep.pos));
      vomited = true;
    }
  }

  // 6. Dirt in sight lowers the target, once per vomit tile per peep.
  notice_dirt(peep, world);

  return vomited;
}

SimResult simulate(const Park& park, const Catalog& catalog, const SimConfig& config,
                   const TraceFn* trace) {
  World world = make_world(park, catalog, config);
  Rng rng(config.rng_seed);

  std::vector<Peep> peeps;
  peeps.reserve(static_cast<size_t>(config.peep_count));
  for (int i = 0; i < config.peep_count; ++i) {
    peeps.push_back(spawn_peep(park_entrance(), config, rng));
  }

  for (int tick = 0; tick < config.ticks; ++tick) {
    for (size_t i = 0; i < peeps.size(); ++i) {
      bool vomited = peep_tick(peeps[i], park, catalog, world, rng);
      if (trace != nullptr && *trace) {
        (*trace)(tick, static_cast<int>(i), peeps[i], vomited);
      }
    }
  }

  SimResult result;
  result.revenue = world.revenue;
  result.vomit_count = world.vomit_count;
  if (!peeps.empty()) {
    long long total = 0;
    for (const auto& p : peeps) total += p.happiness;
    result.mean_happiness = static_cast<double>(total) / static_cast<double>(peeps.size());
  }
  for (size_t i = 0; i < world.income_by_type.size(); ++i) {
    if (world.income_by_type[i] != 0) {
      result.per_attraction_income[catalog.types[i].id] = world.income_by_type[i];
    }
  }
  for (std::uint16_t tile : world.vomit_tiles) {
    result.vomit_tiles.push_back(tile_coord(tile));
  }
  result.final_peeps = std::move(peeps);
  return result;
}

void write_trace_header(std::ostream& os) {
  os << "tick,peep,x,y,state,happiness,nausea,spent,vomited\n";
}

void write_trace_line(std::ostream& os, int tick, int peep_index, const Peep& p, bool vomited) {
  os << tick << ',' << peep_index << ',' << p.pos.x << ',' << p.pos.y << ','
     << peep_state_name(p.state) << ',' << p.happiness << ',' << p.nausea << ',' << p.money_spent
     << ',' << (vomited ? 1 : 0) << "\n";
}

}  // namespace microrct
