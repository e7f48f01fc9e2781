#include "microrct/mapelites.h"

#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace microrct {

namespace {

// Label separating the evolution-side stream (init, mutation, sampling,
// secondary-population coin flips) from the per-evaluation sim streams.
constexpr std::uint64_t kEvoStream = 0xE0BADF00Dull;

std::uint64_t parse_u64_field(std::string_view field, std::string_view what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("replay log: bad " + std::string(what) + " '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_i64_field(std::string_view field, std::string_view what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("replay log: bad " + std::string(what) + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string_view init_size_name(InitSize s) {
  return s == InitSize::Small ? "small" : "medium";
}

InitSize parse_init_size(std::string_view s) {
  if (s == "small") return InitSize::Small;
  if (s == "medium") return InitSize::Medium;
  throw ParseError("unknown init size '" + std::string(s) + "' (expected small or medium)");
}

Placement offer(EliteMap& map, Park park, double secondary_prob, int secondary_cap, Rng& rng) {
  if (!park.fitness || !park.descriptor) {
    throw std::logic_error("offer: park has no fitness/descriptor");
  }
  Descriptor key = *park.descriptor;
  auto it = map.cells.find(key);
  if (it == map.cells.end()) {
    EliteCell cell;
    cell.elite = std::move(park);
    map.cells.emplace(key, std::move(cell));
    return Placement::NewElite;
  }
  EliteCell& cell = it->second;
  if (*park.fitness > *cell.elite.fitness) {
    cell.elite = std::move(park);
    return Placement::Replaced;
  }
  if (rng.chance(secondary_prob)) {
    cell.secondary.push_back(std::move(park));
    while (static_cast<int>(cell.secondary.size()) > secondary_cap) {
      cell.secondary.pop_front();
    }
    return Placement::Secondary;
  }
  return Placement::Discarded;
}

bool attempt_add(Park& park, const AttractionType& type, const Catalog& catalog,
                 std::optional<Dollars> budget, Rng& rng) {
  if (budget && build_cost(park, catalog) + total_cost(type) > *budget) return false;
  for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
    Coord origin{static_cast<int>(rng.bounded(kParkSize)),
                 static_cast<int>(rng.bounded(kParkSize))};
    if (place_attraction(park, type, origin) == PlaceResult::Placed) return true;
  }
  return false;
}

std::vector<Park> init_population(const EvoConfig& config, const Catalog& catalog, Rng& rng,
                                  long long* shortfall) {
  const int lo = config.init_size == InitSize::Small ? 0 : 8;
  const int hi = config.init_size == InitSize::Small ? 4 : 12;
  std::vector<Park> pop;
  pop.reserve(static_cast<size_t>(config.population));
  for (int i = 0; i < config.population; ++i) {
    Park park = make_park();
    int draws = rng.uniform_int(lo, hi);
    for (int d = 0; d < draws; ++d) {
      int type_index =
          catalog.mutatable[static_cast<size_t>(rng.bounded(catalog.mutatable.size()))];
      const AttractionType& type = catalog.types[static_cast<size_t>(type_index)];
      if (!attempt_add(park, type, catalog, config.budget, rng) && shortfall != nullptr) {
        ++*shortfall;
      }
    }
    pop.push_back(std::move(park));
  }
  return pop;
}

Park mutate(const Park& park, const EvoConfig& config, const Catalog& catalog, Rng& rng) {
  Park child = park;
  child.fitness.reset();
  child.descriptor.reset();
  child.eval.reset();

  const auto n_types = static_cast<std::uint64_t>(catalog.mutatable.size());
  const int m = rng.uniform_int(config.mutation_min, config.mutation_max);

  for (int change = 0; change < m; ++change) {
    bool remove;
    int add_type_index = -1;
    if (config.init_size == InitSize::Small) {
      // One draw covers both outcomes: n_types add choices plus one remove
      // slot, giving the 1-in-(N+1) removal odds.
      auto r = rng.bounded(n_types + 1);
      remove = r == n_types;
      if (!remove) add_type_index = catalog.mutatable[static_cast<size_t>(r)];
    } else {
      remove = rng.bounded(2) == 1;
      if (!remove) {
        add_type_index = catalog.mutatable[static_cast<size_t>(rng.bounded(n_types))];
      }
    }

    if (remove) {
      if (!child.attractions.empty()) {
        remove_attraction(child,
                          static_cast<int>(rng.bounded(child.attractions.size())));
      }
      continue;
    }

    const AttractionType& type = catalog.types[static_cast<size_t>(add_type_index)];
    if (attempt_add(child, type, catalog, config.budget, rng)) continue;

    // No space (or no budget) for the add: the small-growth regime replaces
    // an existing attraction instead.
    if (config.init_size == InitSize::Small && !child.attractions.empty()) {
      remove_attraction(child, static_cast<int>(rng.bounded(child.attractions.size())));
      attempt_add(child, type, catalog, config.budget, rng);
    }
  }
  return child;
}

const Park& sample_parent(const EliteMap& map, double secondary_parent_prob, Rng& rng,
                          Descriptor* cell) {
  if (map.cells.empty()) throw std::logic_error("sample_parent: empty map");
  auto it = map.cells.begin();
  std::advance(it, static_cast<long>(rng.bounded(map.cells.size())));
  if (cell != nullptr) *cell = it->first;
  const EliteCell& c = it->second;
  if (!c.secondary.empty() && rng.chance(secondary_parent_prob)) {
    return c.secondary[static_cast<size_t>(rng.bounded(c.secondary.size()))];
  }
  return c.elite;
}

std::vector<Park> next_generation(const EliteMap& map, const EvoConfig& config,
                                  const Catalog& catalog, Rng& rng) {
  if (map.cells.empty()) return init_population(config, catalog, rng, nullptr);
  std::vector<Park> pop;
  pop.reserve(static_cast<size_t>(config.population));
  for (int i = 0; i < config.population; ++i) {
    pop.push_back(mutate(sample_parent(map, config.secondary_parent_prob, rng, nullptr), config,
                         catalog, rng));
  }
  return pop;
}

std::string replay_line(const ReplayEntry& e) {
  std::string line = std::to_string(e.generation);
  line += ',';
  line += std::to_string(e.desc.a);
  line += ',';
  line += std::to_string(e.desc.b);
  line += ',';
  line += std::to_string(e.fitness);
  line += ',';
  line += std::to_string(e.hash);
  return line;
}

ReplayEntry parse_replay_line(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (fields.size() != 5) {
    throw ParseError("replay log: expected 5 comma-separated fields, got " +
                     std::to_string(fields.size()));
  }
  ReplayEntry e;
  e.generation = static_cast<int>(parse_i64_field(fields[0], "generation"));
  e.desc.a = static_cast<int>(parse_i64_field(fields[1], "dim_a"));
  e.desc.b = static_cast<int>(parse_i64_field(fields[2], "dim_b"));
  e.fitness = parse_i64_field(fields[3], "fitness");
  e.hash = parse_u64_field(fields[4], "park_hash");
  return e;
}

std::uint64_t eval_seed(std::uint64_t master_seed, int generation, int index) {
  return Rng::mix(master_seed, static_cast<std::uint64_t>(generation),
                  static_cast<std::uint64_t>(index));
}

SimResult evaluate_park(Park& park, const Catalog& catalog, const EvoConfig& config,
                        std::uint64_t seed) {
  if (config.budget && build_cost(park, catalog) > *config.budget) {
    throw std::logic_error("evaluate_park: budget invariant violated");
  }
  SimConfig sim = config.sim;
  sim.rng_seed = seed;
  SimResult result = simulate(park, catalog, sim, nullptr);
  Dollars fitness = result.revenue;
  if (config.fitness_subtracts_cost) fitness -= build_cost(park, catalog);
  park.fitness = fitness;
  park.descriptor = make_descriptor(config.dims.first, config.dims.second, park, catalog, result);
  return result;
}

namespace {

void evaluate_generation(std::vector<Park>& pop, const Catalog& catalog, const EvoConfig& config,
                         int generation) {
  auto eval_one = [&](int i) {
    std::uint64_t seed = eval_seed(config.master_seed, generation, i);
    evaluate_park(pop[static_cast<size_t>(i)], catalog, config, seed);
    pop[static_cast<size_t>(i)].eval = EvalInfo{seed, generation, i};
  };

  const int n = static_cast<int>(pop.size());
  if (config.workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) eval_one(i);
    return;
  }

  std::atomic<int> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      int i = cursor.fetch_add(1);
      if (i >= n) return;
      try {
        eval_one(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  int thread_count = std::min(config.workers, n);
  threads.reserve(static_cast<size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

RunResult run(const EvoConfig& config, const Catalog& catalog, const RunObserver* observer) {
  RunResult out;
  out.map.dims = config.dims;
  if (config.generations <= 0 || config.population <= 0) return out;

  Rng evo(Rng::mix(config.master_seed, kEvoStream));
  std::vector<Park> pop = init_population(config, catalog, evo, &out.stats.init_shortfall);

  for (int gen = 0; gen < config.generations; ++gen) {
    evaluate_generation(pop, catalog, config, gen);
    for (size_t i = 0; i < pop.size(); ++i) {
      ReplayEntry entry{gen, *pop[i].descriptor, *pop[i].fitness, park_hash(pop[i])};
      out.log.push_back(entry);
      if (observer != nullptr && observer->on_evaluated) observer->on_evaluated(pop[i], entry);
      offer(out.map, std::move(pop[i]), config.secondary_prob, config.secondary_cap, evo);
      ++out.stats.evaluations;
    }
    if (gen + 1 < config.generations) {
      pop = next_generation(out.map, config, catalog, evo);
    }
  }
  return out;
}

}  // namespace microrct
