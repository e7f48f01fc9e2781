#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "microrct/behavior.h"
#include "microrct/catalog.h"
#include "microrct/harness.h"
#include "microrct/mapelites.h"
#include "microrct/park.h"
#include "test_util.h"

using namespace microrct;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MapFileCell make_cell(Descriptor desc, Dollars fitness, const Catalog& catalog, Rng& rng) {
  Park park = testutil::random_park(catalog, rng, 3);
  park.fitness = fitness;
  park.descriptor = desc;
  MapFileCell cell;
  cell.desc = desc;
  cell.fitness = fitness;
  cell.hash = park_hash(park);
  cell.park = park_to_json(park);
  return cell;
}

MapFile make_map(const std::vector<std::pair<Descriptor, Dollars>>& cells,
                 std::uint64_t seed, const Catalog& catalog) {
  MapFile map;
  map.dims = {default_dimension(Metric::Excitement), default_dimension(Metric::Intensity)};
  map.seed = seed;
  Rng rng(seed * 31 + 7);
  for (const auto& [desc, fitness] : cells) {
    map.cells.push_back(make_cell(desc, fitness, catalog, rng));
  }
  std::sort(map.cells.begin(), map.cells.end(),
            [](const MapFileCell& a, const MapFileCell& b) { return a.desc < b.desc; });
  return map;
}

EvoConfig tiny_evo() {
  EvoConfig config;
  config.population = 4;
  config.generations = 2;
  config.sim.peep_count = 5;
  config.sim.ticks = 20;
  return config;
}

}  // namespace

TEST_CASE("directory naming") {
  std::pair<DimensionSpec, DimensionSpec> dims = {default_dimension(Metric::Excitement),
                                                  default_dimension(Metric::Intensity)};
  CHECK(dims_dir_name(dims) == "excitement_x_intensity");
  dims = {default_dimension(Metric::Happiness), default_dimension(Metric::Vomit)};
  CHECK(dims_dir_name(dims) == "happiness_x_vomit");
  CHECK(cost_dir_name(true) == "cost_on");
  CHECK(cost_dir_name(false) == "cost_off");

  fs::path dir = run_dir_for("root", dims, true, InitSize::Medium, 9);
  CHECK(dir == fs::path("root") / "happiness_x_vomit" / "cost_on" / "medium" / "seed_9");
}

TEST_CASE("qd score averages occupied cells") {
  const Catalog& catalog = default_catalog();
  CHECK(qd_score(MapFile{}) == 0.0);

  MapFile one = make_map({{{0, 0}, 15000}}, 1, catalog);
  CHECK(qd_score(one) == doctest::Approx(15000.0));

  MapFile two = make_map({{{0, 0}, 10000}, {{5, 0}, 20000}}, 1, catalog);
  CHECK(qd_score(two) == doctest::Approx(15000.0));
}

TEST_CASE("map files round-trip through a run directory") {
  const Catalog& catalog = default_catalog();
  MapFile map = make_map({{{5, 0}, 120}, {{10, 5}, 340}, {{15, 5}, 90}}, 3, catalog);

  fs::path dir = fresh_dir("microrct_test_mapdir");
  write_map_dir(map, dir, catalog);

  CHECK(fs::exists(dir / "elite_map.json"));
  CHECK(fs::exists(dir / "heatmap.csv"));
  CHECK(fs::exists(dir / "heatmap.pgm"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "parks" / "cell_5_0.json"));
  CHECK(fs::exists(dir / "parks" / "cell_5_0.txt"));
  CHECK(fs::exists(dir / "parks" / "cell_10_5.json"));
  CHECK(fs::exists(dir / "parks" / "cell_15_5.json"));

  MapFile back = load_map_file(dir / "elite_map.json", catalog);
  CHECK(back.dims == map.dims);
  REQUIRE(back.seed.has_value());
  CHECK(*back.seed == 3);
  REQUIRE(back.cells.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.cells[i].desc == map.cells[i].desc);
    CHECK(back.cells[i].fitness == map.cells[i].fitness);
    CHECK(back.cells[i].hash == map.cells[i].hash);
  }

  nlohmann::json summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("cells").get<size_t>() == 3);
  CHECK(summary.at("qd_score").get<double>() == doctest::Approx((120.0 + 340.0 + 90.0) / 3));
  CHECK(summary.at("best_fitness").get<Dollars>() == 340);

  SUBCASE("tampered park files are rejected") {
    nlohmann::json doc = nlohmann::json::parse(slurp(dir / "parks" / "cell_5_0.json"));
    doc["fitness"] = doc["fitness"].get<Dollars>() + 1;
    std::ofstream out(dir / "parks" / "cell_5_0.json", std::ios::binary);
    out << doc.dump(2) << "\n";
    out.close();
    CHECK_THROWS_AS(load_map_file(dir / "elite_map.json", catalog), ParseError);
  }

  fs::remove_all(dir);
}

TEST_CASE("aggregation folds runs cell by cell") {
  const Catalog& catalog = default_catalog();

  SUBCASE("a single run aggregates to itself") {
    MapFile a = make_map({{{0, 0}, 100}, {{5, 5}, 200}}, 4, catalog);
    MapFile out = aggregate({a});
    REQUIRE(out.cells.size() == 2);
    CHECK(out.cells[0].fitness == 100);
    CHECK(out.cells[1].fitness == 200);
    CHECK(out.source_seeds == std::vector<std::uint64_t>{4});
    CHECK_FALSE(out.seed.has_value());
  }

  SUBCASE("cells take the union and keep the best") {
    MapFile a = make_map({{{0, 0}, 100}, {{5, 5}, 200}}, 1, catalog);
    MapFile b = make_map({{{0, 0}, 150}, {{10, 0}, 50}}, 2, catalog);
    MapFile out = aggregate({a, b});
    REQUIRE(out.cells.size() == 3);
    CHECK(out.cells[0].desc == Descriptor{0, 0});
    CHECK(out.cells[0].fitness == 150);
    CHECK(out.cells[1].desc == Descriptor{5, 5});
    CHECK(out.cells[1].fitness == 200);
    CHECK(out.cells[2].desc == Descriptor{10, 0});
    CHECK(out.cells[2].fitness == 50);
    CHECK(out.source_seeds == std::vector<std::uint64_t>{1, 2});
  }

  SUBCASE("ties keep the lowest seed") {
    MapFile a = make_map({{{0, 0}, 100}}, 9, catalog);
    MapFile b = make_map({{{0, 0}, 100}}, 2, catalog);
    std::uint64_t expected = b.cells[0].hash;
    MapFile out = aggregate({a, b});
    REQUIRE(out.cells.size() == 1);
    CHECK(out.cells[0].hash == expected);
  }

  SUBCASE("input order is irrelevant") {
    MapFile a = make_map({{{0, 0}, 100}, {{5, 5}, 200}}, 1, catalog);
    MapFile b = make_map({{{0, 0}, 150}, {{10, 0}, 50}}, 2, catalog);
    MapFile ab = aggregate({a, b});
    MapFile ba = aggregate({b, a});
    REQUIRE(ab.cells.size() == ba.cells.size());
    for (size_t i = 0; i < ab.cells.size(); ++i) {
      CHECK(ab.cells[i].desc == ba.cells[i].desc);
      CHECK(ab.cells[i].fitness == ba.cells[i].fitness);
      CHECK(ab.cells[i].hash == ba.cells[i].hash);
    }
    CHECK(ab.source_seeds == ba.source_seeds);
  }

  SUBCASE("aggregates can be re-aggregated") {
    MapFile a = make_map({{{0, 0}, 100}}, 1, catalog);
    MapFile b = make_map({{{0, 0}, 150}}, 2, catalog);
    MapFile c = make_map({{{0, 0}, 120}}, 3, catalog);
    MapFile out = aggregate({aggregate({a, b}), c});
    REQUIRE(out.cells.size() == 1);
    CHECK(out.cells[0].fitness == 150);
    CHECK(out.source_seeds == std::vector<std::uint64_t>{1, 2, 3});
  }

  SUBCASE("dimension mismatches are refused") {
    MapFile a = make_map({{{0, 0}, 100}}, 1, catalog);
    MapFile b = make_map({{{0, 0}, 150}}, 2, catalog);
    b.dims.second = default_dimension(Metric::Vomit);
    CHECK_THROWS_AS(aggregate({a, b}), ParseError);
    CHECK_THROWS_AS(aggregate({}), ParseError);
  }
}

TEST_CASE("heatmap rendering") {
  const Catalog& catalog = default_catalog();

  SUBCASE("csv lays out the bounding box") {
    MapFile map = make_map({{{5, 0}, 120}, {{10, 5}, 340}, {{15, 5}, 90}}, 1, catalog);
    std::string csv = heatmap_csv(map);
    std::string expected =
        "intensity\\excitement,5,10,15\n"
        "5,,340,90\n"
        "0,120,,\n";
    CHECK(csv == expected);
  }

  SUBCASE("a single cell renders a one by one grid") {
    MapFile map = make_map({{{5, 10}, 7}}, 1, catalog);
    CHECK(heatmap_csv(map) == "intensity\\excitement,5\n10,7\n");
  }

  SUBCASE("an empty map renders only the header") {
    MapFile map;
    map.dims = {default_dimension(Metric::Excitement), default_dimension(Metric::Intensity)};
    CHECK(heatmap_csv(map) == "intensity\\excitement\n");
    CHECK(heatmap_pgm(map).find("0 0") != std::string::npos);
  }

  SUBCASE("pgm brightness follows fitness") {
    MapFile map = make_map({{{0, 0}, 0}, {{5, 0}, 500}, {{10, 0}, 1000}}, 1, catalog);
    std::string pgm = heatmap_pgm(map);
    std::istringstream is(pgm);
    std::string magic;
    is >> magic;
    CHECK(magic == "P2");
    is.ignore();
    while (is.peek() == '#') is.ignore(10000, '\n');
    int w = 0;
    int h = 0;
    int maxval = 0;
    is >> w >> h >> maxval;
    CHECK(w == 3);
    CHECK(h == 1);
    CHECK(maxval == 255);
    int a = -1;
    int b = -1;
    int c = -1;
    is >> a >> b >> c;
    CHECK(a == 1);        // lowest fitness is occupied, so barely above black
    CHECK(b == 1 + 127);  // halfway up
    CHECK(c == 255);
    CHECK(is.good());
  }

  SUBCASE("equal fitness everywhere renders full brightness") {
    MapFile map = make_map({{{0, 0}, 42}, {{5, 0}, 42}}, 1, catalog);
    std::string pgm = heatmap_pgm(map);
    std::istringstream is(pgm);
    std::string magic;
    is >> magic;
    is.ignore();
    while (is.peek() == '#') is.ignore(10000, '\n');
    int w = 0;
    int h = 0;
    int maxval = 0;
    int a = -1;
    int b = -1;
    is >> w >> h >> maxval >> a >> b;
    CHECK(a == 255);
    CHECK(b == 255);
  }
}

TEST_CASE("execute_run writes a complete run directory") {
  const Catalog& catalog = default_catalog();
  fs::path dir = fresh_dir("microrct_test_run");

  RunRequest request;
  request.evo = tiny_evo();
  request.seed = 11;
  request.dir = dir;
  RunOutcome outcome = execute_run(request, catalog);
  REQUIRE(outcome.ok);
  CHECK(outcome.cells > 0);

  CHECK(fs::exists(dir / "elite_map.json"));
  CHECK(fs::exists(dir / "replay.log"));
  CHECK(fs::exists(dir / "run.json"));
  CHECK(fs::exists(dir / "heatmap.csv"));
  CHECK(fs::exists(dir / "heatmap.pgm"));
  CHECK(fs::exists(dir / "summary.json"));

  MapFile map = load_map_file(dir / "elite_map.json", catalog);
  CHECK(map.cells.size() == outcome.cells);
  CHECK(qd_score(map) == doctest::Approx(outcome.qd));

  // The replay log ends in the archived elites.
  std::istringstream log(slurp(dir / "replay.log"));
  std::map<Descriptor, std::pair<Dollars, std::uint64_t>> best;
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    ReplayEntry e = parse_replay_line(line);
    ++lines;
    auto it = best.find(e.desc);
    if (it == best.end() || e.fitness > it->second.first) {
      best[e.desc] = {e.fitness, e.hash};
    }
  }
  CHECK(lines == request.evo.population * request.evo.generations);
  REQUIRE(best.size() == map.cells.size());
  for (const auto& cell : map.cells) {
    CHECK(best.at(cell.desc).first == cell.fitness);
    CHECK(best.at(cell.desc).second == cell.hash);
  }

  nlohmann::json run_doc = nlohmann::json::parse(slurp(dir / "run.json"));
  CHECK(run_doc.at("seed").get<std::uint64_t>() == 11);
  CHECK(run_doc.at("generations").get<int>() == 2);
  CHECK(run_doc.at("evaluations").get<long long>() == 8);

  SUBCASE("rerunning reproduces every byte") {
    std::string map_bytes = slurp(dir / "elite_map.json");
    std::string log_bytes = slurp(dir / "replay.log");
    fs::path dir2 = fresh_dir("microrct_test_run2");
    RunRequest again = request;
    again.dir = dir2;
    REQUIRE(execute_run(again, catalog).ok);
    CHECK(slurp(dir2 / "elite_map.json") == map_bytes);
    CHECK(slurp(dir2 / "replay.log") == log_bytes);
    fs::remove_all(dir2);
  }

  SUBCASE("elite traces are optional") {
    fs::path dir3 = fresh_dir("microrct_test_run3");
    RunRequest traced = request;
    traced.dir = dir3;
    traced.trace_elites = true;
    REQUIRE(execute_run(traced, catalog).ok);
    REQUIRE(fs::exists(dir3 / "traces"));
    size_t traces = 0;
    for (const auto& entry : fs::directory_iterator(dir3 / "traces")) {
      ++traces;
      std::string body = slurp(entry.path());
      CHECK(body.rfind("tick,peep,", 0) == 0);
    }
    CHECK(traces == outcome.cells);
    fs::remove_all(dir3);
  }

  fs::remove_all(dir);
}

TEST_CASE("matrix config parsing") {
  fs::path dir = fresh_dir("microrct_test_matrix_cfg");
  fs::path cfg = dir / "matrix.cfg";

  SUBCASE("a full file parses") {
    std::ofstream out(cfg);
    out << "# desk-scale sweep\n"
        << "out = runs\n"
        << "seeds = 1 2 3\n"
        << "generations = 5\n"
        << "population = 6\n"
        << "ticks = 30\n"
        << "peeps = 7\n"
        << "budget = 12000\n"
        << "workers = 2\n"
        << "\n"
        << "[exc_int_on_small]\n"
        << "dims = excitement intensity\n"
        << "cost = on\n"
        << "init = small\n"
        << "\n"
        << "[hap_vom_off_medium]\n"
        << "dims = happiness vomit\n"
        << "cost = off\n"
        << "init = medium\n"
        << "seeds = 9\n";
    out.close();

    MatrixConfig config = parse_matrix_file(cfg);
    CHECK(config.out_root == fs::path("runs"));
    CHECK(config.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(config.base.generations == 5);
    CHECK(config.base.population == 6);
    CHECK(config.base.sim.ticks == 30);
    CHECK(config.base.sim.peep_count == 7);
    CHECK(config.budget_amount == 12000);
    CHECK(config.workers == 2);
    REQUIRE(config.setups.size() == 2);

    CHECK(config.setups[0].label == "exc_int_on_small");
    CHECK(config.setups[0].dims.first.metric == Metric::Excitement);
    CHECK(config.setups[0].dims.second.metric == Metric::Intensity);
    CHECK(config.setups[0].cost_enabled);
    CHECK(config.setups[0].init_size == InitSize::Small);
    CHECK(config.setups[0].seeds.empty());

    CHECK(config.setups[1].label == "hap_vom_off_medium");
    CHECK(config.setups[1].dims.first.metric == Metric::Happiness);
    CHECK_FALSE(config.setups[1].cost_enabled);
    CHECK(config.setups[1].init_size == InitSize::Medium);
    CHECK(config.setups[1].seeds == std::vector<std::uint64_t>{9});
  }

  SUBCASE("unknown keys are refused") {
    std::ofstream out(cfg);
    out << "seeds = 1\nbogus = 2\n[s]\ndims = excitement intensity\n";
    out.close();
    CHECK_THROWS_AS(parse_matrix_file(cfg), ParseError);
  }

  SUBCASE("setups are required") {
    std::ofstream out(cfg);
    out << "seeds = 1\n";
    out.close();
    CHECK_THROWS_AS(parse_matrix_file(cfg), ParseError);
  }

  SUBCASE("seeds are required somewhere") {
    std::ofstream out(cfg);
    out << "[s]\ndims = excitement intensity\n";
    out.close();
    CHECK_THROWS_AS(parse_matrix_file(cfg), ParseError);
  }

  SUBCASE("bad metric names are refused") {
    std::ofstream out(cfg);
    out << "seeds = 1\n[s]\ndims = excitement sparkle\n";
    out.close();
    CHECK_THROWS_AS(parse_matrix_file(cfg), ParseError);
  }

  fs::remove_all(dir);
}

TEST_CASE("matrix execution covers every setup and seed") {
  const Catalog& catalog = default_catalog();
  fs::path root = fresh_dir("microrct_test_matrix_run");

  MatrixConfig config;
  config.base = tiny_evo();
  config.budget_amount = 5000;
  config.seeds = {1, 2};
  config.out_root = root / "runs";
  config.workers = 2;

  SetupSpec on;
  on.label = "exc_int_on";
  on.dims = {default_dimension(Metric::Excitement), default_dimension(Metric::Intensity)};
  on.cost_enabled = true;
  SetupSpec off = on;
  off.label = "exc_int_off";
  off.cost_enabled = false;
  off.init_size = InitSize::Medium;
  config.setups = {on, off};

  MatrixReport report = run_matrix(config, catalog);
  CHECK(report.failures == 0);
  REQUIRE(report.runs.size() == 4);

  std::set<std::string> dirs;
  for (const auto& record : report.runs) {
    CHECK(record.outcome.ok);
    dirs.insert(record.dir);
    CHECK(fs::exists(fs::path(record.dir) / "elite_map.json"));
    CHECK(fs::exists(fs::path(record.dir) / "replay.log"));
  }
  CHECK(dirs.size() == 4);
  fs::path expect = run_dir_for(config.out_root, on.dims, true, InitSize::Small, 1);
  CHECK(dirs.count(expect.string()) == 1);

  write_matrix_report(report, root / "runs" / "matrix_report.json");
  nlohmann::json doc = nlohmann::json::parse(slurp(root / "runs" / "matrix_report.json"));
  CHECK(doc.at("runs").size() == 4);
  CHECK(doc.at("failures").get<int>() == 0);

  SUBCASE("reruns are reproducible") {
    std::map<std::string, std::string> bytes;
    for (const auto& record : report.runs) {
      bytes[record.dir] = slurp(fs::path(record.dir) / "elite_map.json") +
                          slurp(fs::path(record.dir) / "replay.log");
    }
    MatrixReport again = run_matrix(config, catalog);
    CHECK(again.failures == 0);
    for (const auto& record : again.runs) {
      CHECK(bytes.at(record.dir) ==
            slurp(fs::path(record.dir) / "elite_map.json") +
                slurp(fs::path(record.dir) / "replay.log"));
    }
  }

  fs::remove_all(root);
}
