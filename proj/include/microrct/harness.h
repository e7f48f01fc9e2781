#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "microrct/catalog.h"
#include "microrct/mapelites.h"

namespace microrct {

std::string dims_dir_name(const std::pair<DimensionSpec, DimensionSpec>& dims);
std::string cost_dir_name(bool cost_enabled);

// One cell of a serialized elite map; `park` holds the park document.
struct MapFileCell {
  Descriptor desc;
  Dollars fitness = 0;
  std::uint64_t hash = 0;
  nlohmann::json park;
};

// On-disk form of an elite map or a hyperelite aggregate.
struct MapFile {
  std::pair<DimensionSpec, DimensionSpec> dims;
  std::optional<std::uint64_t> seed;       // single runs
  std::vector<std::uint64_t> source_seeds; // aggregates
  std::vector<MapFileCell> cells;          // sorted by descriptor
};

MapFile map_file_from_run(const EliteMap& map, std::uint64_t seed);
MapFile load_map_file(const std::filesystem::path& elite_map_json, const Catalog& catalog);

// Per-cell max fitness across runs; ties keep the lowest seed. Inputs may
// arrive in any order. Throws ParseError on a dimension mismatch.
MapFile aggregate(std::vector<MapFile> runs);

// Mean elite fitness over occupied cells (0 for an empty map). Occupied
// cells are the denominator: static-dimension maps have infeasible cells,
// so a full-grid denominator would be ill-defined.
double qd_score(const MapFile& map);

// Rectangular grid over the occupied bounding box: columns are dim_a
// buckets ascending, rows dim_b descending, empty cells blank.
std::string heatmap_csv(const MapFile& map);
// PGM (P2) with fitness mapped linearly onto brightness; empty cells black.
std::string heatmap_pgm(const MapFile& map);

// Writes elite_map.json, parks/ (documents plus ASCII renders),
// heatmap.csv/.pgm and summary.json.
void write_map_dir(const MapFile& map, const std::filesystem::path& dir, const Catalog& catalog);

struct RunRequest {
  EvoConfig evo;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool trace_elites = false;  // re-simulate final elites and write traces/
};

struct RunOutcome {
  bool ok = false;
  std::string error;
  double qd = 0.0;
  std::size_t cells = 0;
  Dollars best_fitness = 0;
};

// Runs one search and writes the run directory (elite map, replay log,
// renders, heatmaps, summary).
RunOutcome execute_run(const RunRequest& request, const Catalog& catalog);

struct SetupSpec {
  std::string label;
  std::pair<DimensionSpec, DimensionSpec> dims;
  bool cost_enabled = false;
  InitSize init_size = InitSize::Small;
  std::vector<std::uint64_t> seeds;  // empty = matrix-level seeds
};

struct MatrixConfig {
  EvoConfig base;
  Dollars budget_amount = 15000;
  std::vector<std::uint64_t> seeds;
  std::vector<SetupSpec> setups;
  std::filesystem::path out_root;
  int workers = 1;  // concurrent runs
};

// Plain key-value text with [section] blocks, one per setup; '#' comments.
MatrixConfig parse_matrix_file(const std::filesystem::path& path);

struct MatrixRunRecord {
  std::string setup;
  std::uint64_t seed = 0;
  std::string dir;
  RunOutcome outcome;
};

struct MatrixReport {
  std::vector<MatrixRunRecord> runs;
  int failures = 0;
};

// Executes every setup x seed combination under
// out_root/<dims>/<cost>/<size>/<seed>/. Failures are recorded per run and
// leave the other runs untouched.
MatrixReport run_matrix(const MatrixConfig& config, const Catalog& catalog);

void write_matrix_report(const MatrixReport& report, const std::filesystem::path& path);

std::filesystem::path run_dir_for(const std::filesystem::path& root,
                                  const std::pair<DimensionSpec, DimensionSpec>& dims,
                                  bool cost_enabled, InitSize init_size, std::uint64_t seed);

}  // namespace microrct
