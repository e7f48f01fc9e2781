#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "microrct/behavior.h"
#include "microrct/catalog.h"
#include "microrct/harness.h"
#include "microrct/mapelites.h"
#include "microrct/park.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRunFailure = 2;

std::filesystem::path default_out_root() {
  if (const char* env = std::getenv("MICRORCT_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

const microrct::Catalog& catalog_for(const std::string& path, microrct::Catalog& storage) {
  if (path.empty()) return microrct::default_catalog();
  storage = microrct::load_catalog(path);
  return storage;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace microrct;

  CLI::App app{"MicroRCT park evolution"};
  app.require_subcommand(1);

  std::string catalog_path;
  app.add_option("--catalog", catalog_path, "attraction catalog TSV (default: built-in)");

  // run
  auto* cmd_run = app.add_subcommand("run", "run one search, or a whole matrix with --matrix");
  std::string matrix_path;
  std::vector<std::string> dims_names = {"excitement", "intensity"};
  std::string cost_flag = "off";
  std::string init_size_name_flag = "small";
  std::uint64_t seed = 0;
  int generations = 200;
  int pop_size = 50;
  int ticks = 1000;
  int peeps = 100;
  std::optional<long long> budget_flag;
  std::string out_flag;
  int workers = 1;
  bool trace = false;
  bool subtract_cost = false;
  cmd_run->add_option("--matrix", matrix_path, "matrix config file; runs every setup x seed");
  cmd_run->add_option("--dims", dims_names, "two behavior metrics (e.g. excitement intensity)")
      ->expected(2);
  cmd_run->add_option("--cost", cost_flag, "cost constraint on|off (default off)");
  cmd_run->add_option("--init-size", init_size_name_flag, "initial park size small|medium");
  cmd_run->add_option("--seed", seed, "master seed");
  cmd_run->add_option("--generations", generations, "generations (default 200)");
  cmd_run->add_option("--pop-size", pop_size, "population size (default 50)");
  cmd_run->add_option("--ticks", ticks, "simulation ticks per evaluation (default 1000)");
  cmd_run->add_option("--peeps", peeps, "peeps per simulation (default 100)");
  cmd_run->add_option("--budget", budget_flag,
                      "budget in dollars; implies --cost on (default 15000 when cost is on)");
  cmd_run->add_option("--out", out_flag, "output root (default $MICRORCT_OUT or ./out)");
  cmd_run->add_option("--workers", workers, "parallel evaluations (matrix: parallel runs)");
  cmd_run->add_flag("--trace", trace, "write per-elite simulation traces");
  cmd_run->add_flag("--subtract-cost", subtract_cost, "fitness = revenue minus build cost");

  // aggregate
  auto* cmd_aggregate =
      app.add_subcommand("aggregate", "fold elite maps into one hyperelite map");
  std::vector<std::string> aggregate_inputs;
  std::string aggregate_out;
  cmd_aggregate->add_option("maps", aggregate_inputs, "elite_map.json files")->required();
  cmd_aggregate->add_option("--out", aggregate_out, "output directory")->required();

  // qd
  auto* cmd_qd = app.add_subcommand("qd", "print the QD score of an elite map");
  std::string qd_input;
  cmd_qd->add_option("map", qd_input, "elite_map.json")->required();

  // render
  auto* cmd_render = app.add_subcommand("render", "print the ASCII render of a park file");
  std::string render_input;
  cmd_render->add_option("park", render_input, "park JSON document")->required();

  // heatmap
  auto* cmd_heatmap = app.add_subcommand("heatmap", "emit fitness heatmaps for an elite map");
  std::string heatmap_input;
  std::string heatmap_out;
  cmd_heatmap->add_option("map", heatmap_input, "elite_map.json")->required();
  cmd_heatmap->add_option("--out", heatmap_out,
                          "directory for heatmap.csv/.pgm (default: print CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    Catalog catalog_storage;
    const Catalog& catalog = catalog_for(catalog_path, catalog_storage);

    if (cmd_run->parsed()) {
      if (!matrix_path.empty()) {
        MatrixConfig config = parse_matrix_file(matrix_path);
        if (!out_flag.empty()) config.out_root = out_flag;
        if (config.out_root.empty()) config.out_root = default_out_root();
        if (cmd_run->count("--workers") > 0) config.workers = workers;

        MatrixReport report = run_matrix(config, catalog);
        write_matrix_report(report, config.out_root / "matrix_report.json");
        for (const auto& r : report.runs) {
          if (r.outcome.ok) {
            std::cout << r.dir << ": cells=" << r.outcome.cells << " qd=" << r.outcome.qd
                      << " best=" << r.outcome.best_fitness << "\n";
          } else {
            std::cout << r.dir << ": FAILED: " << r.outcome.error << "\n";
          }
        }
        std::cout << "report: " << (config.out_root / "matrix_report.json").generic_string()
                  << "\n";
        if (report.failures > 0) {
          std::cerr << report.failures << " run(s) failed\n";
          return kExitRunFailure;
        }
        return kExitOk;
      }

      RunRequest request;
      request.evo.dims = {default_dimension(parse_metric(dims_names[0])),
                          default_dimension(parse_metric(dims_names[1]))};
      bool cost_enabled = false;
      if (cost_flag == "on") {
        cost_enabled = true;
      } else if (cost_flag != "off") {
        throw ParseError("--cost wants on or off, got '" + cost_flag + "'");
      }
      if (budget_flag) cost_enabled = true;
      if (cost_enabled) request.evo.budget = budget_flag.value_or(15000);
      request.evo.init_size = parse_init_size(init_size_name_flag);
      request.evo.generations = generations;
      request.evo.population = pop_size;
      request.evo.sim.ticks = ticks;
      request.evo.sim.peep_count = peeps;
      request.evo.workers = workers;
      request.evo.fitness_subtracts_cost = subtract_cost;
      request.seed = seed;
      std::filesystem::path root =
          out_flag.empty() ? default_out_root() : std::filesystem::path(out_flag);
      request.dir =
          run_dir_for(root, request.evo.dims, cost_enabled, request.evo.init_size, seed);
      request.trace_elites = trace;

      RunOutcome outcome = execute_run(request, catalog);
      if (!outcome.ok) {
        std::cerr << "run failed: " << outcome.error << "\n";
        return kExitRunFailure;
      }
      std::cout << request.dir.generic_string() << ": cells=" << outcome.cells
                << " qd=" << outcome.qd << " best=" << outcome.best_fitness << "\n";
      return kExitOk;
    }

    if (cmd_aggregate->parsed()) {
      std::vector<MapFile> maps;
      maps.reserve(aggregate_inputs.size());
      for (const auto& path : aggregate_inputs) {
        maps.push_back(load_map_file(path, catalog));
      }
      MapFile hyper = aggregate(std::move(maps));
      write_map_dir(hyper, aggregate_out, catalog);
      std::cout << aggregate_out << ": cells=" << hyper.cells.size()
                << " qd=" << qd_score(hyper) << "\n";
      return kExitOk;
    }

    if (cmd_qd->parsed()) {
      MapFile map = load_map_file(qd_input, catalog);
      std::cout << qd_score(map) << "\n";
      return kExitOk;
    }

    if (cmd_render->parsed()) {
      Park park = load_park(render_input, catalog);
      std::cout << render_ascii(park, catalog);
      return kExitOk;
    }

    if (cmd_heatmap->parsed()) {
      MapFile map = load_map_file(heatmap_input, catalog);
      if (heatmap_out.empty()) {
        std::cout << heatmap_csv(map);
      } else {
        std::filesystem::create_directories(heatmap_out);
        std::ofstream csv(std::filesystem::path(heatmap_out) / "heatmap.csv",
                          std::ios::binary);
        csv << heatmap_csv(map);
        std::ofstream pgm(std::filesystem::path(heatmap_out) / "heatmap.pgm",
                          std::ios::binary);
        pgm << heatmap_pgm(map);
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  return kExitConfigError;
}
