#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "microrct/catalog.h"
#include "microrct/park.h"
#include "microrct/rng.h"
#include "microrct/types.h"

namespace microrct {

// Spawn happiness range; happiness itself is capped at 256 and nausea at 255.
inline constexpr int kSpawnHappinessMin = 113;
inline constexpr int kSpawnHappinessMax = 144;
inline constexpr int kHappinessMax = 256;
inline constexpr int kNauseaMax = 255;

struct SimConfig {
  int peep_count = 100;
  int ticks = 1000;
  std::uint64_t rng_seed = 0;
  int vomit_threshold = 128;
  int happiness_step = 2;
  int vomit_base_divisor = 512;
  int sight_radius = 4;
  int dirt_penalty = 8;
  int tolerance_min = 20;
  int tolerance_max = 60;
};

enum class PeepState : std::uint8_t { Idle, Walking, Interacting };

std::string_view peep_state_name(PeepState s);

struct Peep {
  Coord pos;
  int happiness = 0;
  int happiness_target = 0;
  int nausea = 0;
  int intensity_tolerance = 0;
  Dollars money_spent = 0;
  PeepState state = PeepState::Idle;

  // Journey state: current goal (attraction index) and the depth-first
  // route toward its entrance.
  int goal = -1;
  std::vector<std::uint16_t> route;
  std::size_t route_pos = 0;

  // Goal selection is a pure function of (tile, nausea flag) once the park
  // is fixed, so the last answer is memoized.
  int cache_tile = -1;
  bool cache_flag = false;
  int cache_goal = -2;  // -2 = empty cache, -1 = nothing acceptable

  std::vector<std::uint64_t> seen_vomit;  // bitset over tiles, for the dirt rule
};

// Per-simulation mutable state shared by all peeps.
struct World {
  struct Target {
    std::uint16_t tile = 0;  // entrance tile index
    int type_index = -1;
    int intensity = 0;
    bool first_aid = false;
  };

  SimConfig config;
  std::vector<std::uint8_t> walkable;
  std::vector<std::uint8_t> vomit;        // grid flags
  std::vector<std::uint16_t> vomit_tiles;  // distinct tiles, creation order
  std::vector<Target> targets;             // one per placed attraction
  bool has_first_aid = false;

  Dollars revenue = 0;
  int vomit_count = 0;
  std::vector<Dollars> income_by_type;  // indexed like catalog.types

  // DFS scratch, reused across journeys.
  std::vector<std::uint8_t> visited;
  std::vector<std::pair<std::uint16_t, std::uint8_t>> stack;
};

World make_world(const Park& park, const Catalog& catalog, const SimConfig& config);

Peep spawn_peep(Coord entrance, const SimConfig& config, Rng& rng);

// One tick for one peep, in order: goal selection, walking, interaction on
// arrival, happiness relaxation, vomit check, dirt. Returns whether the
// peep vomited this tick.
bool peep_tick(Peep& peep, const Park& park, const Catalog& catalog, World& world, Rng& rng);

struct SimResult {
  Dollars revenue = 0;
  double mean_happiness = 0.0;  // final tick; 0 when there are no peeps
  int vomit_count = 0;
  std::map<std::string, Dollars> per_attraction_income;
  std::vector<Coord> vomit_tiles;
  std::vector<Peep> final_peeps;
};

// Called after each peep's tick: (tick, peep index, peep, vomited).
using TraceFn = std::function<void(int, int, const Peep&, bool)>;

// Runs exactly config.ticks ticks over a fixed population spawned at the
// park entrance. Deterministic in (park, catalog, config).
SimResult simulate(const Park& park, const Catalog& catalog, const SimConfig& config,
                   const TraceFn* trace = nullptr);

// Text trace format used by the CLI --trace flag and the replay tests.
void write_trace_header(std::ostream& os);
void write_trace_line(std::ostream& os, int tick, int peep_index, const Peep& p, bool vomited);

}  // namespace microrct
