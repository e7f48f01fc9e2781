#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "microrct/behavior.h"
#include "microrct/catalog.h"
#include "microrct/park.h"
#include "microrct/rng.h"
#include "microrct/sim.h"
#include "microrct/types.h"

namespace microrct {

enum class InitSize { Small, Medium };

std::string_view init_size_name(InitSize s);
InitSize parse_init_size(std::string_view s);  // throws ParseError

struct EvoConfig {
  int population = 50;        // n
  int generations = 200;      // g
  SimConfig sim;              // carries t (ticks) and the peep knobs
  int mutation_min = 1;       // m drawn uniformly in [mutation_min, mutation_max]
  int mutation_max = 4;
  double secondary_prob = 0.1;         // p
  int secondary_cap = 10;              // S
  double secondary_parent_prob = 0.2;  // q
  InitSize init_size = InitSize::Small;
  std::optional<Dollars> budget;       // nullopt = cost constraint disabled
  std::pair<DimensionSpec, DimensionSpec> dims = {
      default_dimension(Metric::Excitement), default_dimension(Metric::Intensity)};
  std::uint64_t master_seed = 0;
  bool fitness_subtracts_cost = false;
  int workers = 1;  // parallel fitness evaluations within a generation
};

inline constexpr int kPlacementRetries = 32;

struct EliteCell {
  Park elite;
  std::deque<Park> secondary;  // capped reservoir, oldest evicted first
};

struct EliteMap {
  std::pair<DimensionSpec, DimensionSpec> dims;
  std::map<Descriptor, EliteCell> cells;
};

enum class Placement { NewElite, Replaced, Secondary, Discarded };

// Archive update for one evaluated park: empty cell is claimed, a strictly
// fitter park replaces the elite, anything else enters the secondary
// population with probability `secondary_prob`.
Placement offer(EliteMap& map, Park park, double secondary_prob, int secondary_cap, Rng& rng);

// Samples an origin uniformly over the grid, up to kPlacementRetries times,
// and respects the budget when set. Returns whether the add happened.
bool attempt_add(Park& park, const AttractionType& type, const Catalog& catalog,
                 std::optional<Dollars> budget, Rng& rng);

// n parks with 0-4 (small) or 8-12 (medium) attraction draws each; failed
// placements are counted into *shortfall when provided.
std::vector<Park> init_population(const EvoConfig& config, const Catalog& catalog, Rng& rng,
                                  long long* shortfall = nullptr);

// Copy with m layout changes. Small regime removes with probability
// 1/(N_mutatable+1) and otherwise adds (replacing an existing attraction
// when the add finds no room); medium regime adds or removes evenly.
Park mutate(const Park& park, const EvoConfig& config, const Catalog& catalog, Rng& rng);

// Uniform over occupied cells; the cell's elite with probability 1-q, else
// a uniform secondary member.
const Park& sample_parent(const EliteMap& map, double secondary_parent_prob, Rng& rng,
                          Descriptor* cell = nullptr);

std::vector<Park> next_generation(const EliteMap& map, const EvoConfig& config,
                                  const Catalog& catalog, Rng& rng);

struct ReplayEntry {
  int generation = 0;
  Descriptor desc;
  Dollars fitness = 0;
  std::uint64_t hash = 0;
};

// Line format: gen,dim_a,dim_b,fitness,park_hash
std::string replay_line(const ReplayEntry& e);
ReplayEntry parse_replay_line(std::string_view line);  // throws ParseError

struct RunStats {
  long long evaluations = 0;
  long long init_shortfall = 0;
};

struct RunResult {
  EliteMap map;
  std::vector<ReplayEntry> log;
  RunStats stats;
};

struct RunObserver {
  // Called once per evaluated park, in offer order.
  std::function<void(const Park&, const ReplayEntry&)> on_evaluated;
};

std::uint64_t eval_seed(std::uint64_t master_seed, int generation, int index);

// Evaluates in place: simulates with the given seed, sets fitness and
// descriptor. Returns the simulation result.
SimResult evaluate_park(Park& park, const Catalog& catalog, const EvoConfig& config,
                        std::uint64_t seed);

// The full loop: init, simulate, offer, reinitialize, for g generations.
// Deterministic in (config, catalog) including the replay log.
RunResult run(const EvoConfig& config, const Catalog& catalog,
              const RunObserver* observer = nullptr);

}  // namespace microrct
