#include "microrct/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "microrct/behavior.h"
#include "microrct/sim.h"

namespace microrct {

namespace {

std::string cell_stem(Descriptor d) {
  return "cell_" + std::to_string(d.a) + "_" + std::to_string(d.b);
}

nlohmann::json dims_to_json(const std::pair<DimensionSpec, DimensionSpec>& dims) {
  return {{"a",
           {{"metric", std::string(metric_name(dims.first.metric))},
            {"bucket_size", dims.first.bucket_size}}},
          {"b",
           {{"metric", std::string(metric_name(dims.second.metric))},
            {"bucket_size", dims.second.bucket_size}}}};
}

DimensionSpec dim_from_json(const nlohmann::json& j) {
  DimensionSpec spec;
  spec.metric = parse_metric(j.at("metric").get<std::string>());
  spec.bucket_size = j.at("bucket_size").get<int>();
  if (spec.bucket_size <= 0) throw ParseError("map file: bucket_size must be positive");
  return spec;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Matrix config tokenizer: "key = value" lines plus [section] headers.
struct MatrixLine {
  int number = 0;
  std::string section;  // empty for the global block
  std::string key;
  std::string value;
};

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_on_off(const std::string& v, std::string_view what, int line) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ParseError("matrix config line " + std::to_string(line) + ": bad " + std::string(what) +
                   " '" + v + "' (expected on/off)");
}

}  // namespace

std::string dims_dir_name(const std::pair<DimensionSpec, DimensionSpec>& dims) {
  return std::string(metric_name(dims.first.metric)) + "_x_" +
         std::string(metric_name(dims.second.metric));
}

std::string cost_dir_name(bool cost_enabled) { return cost_enabled ? "cost_on" : "cost_off"; }

std::filesystem::path run_dir_for(const std::filesystem::path& root,
                                  const std::pair<DimensionSpec, DimensionSpec>& dims,
                                  bool cost_enabled, InitSize init_size, std::uint64_t seed) {
  return root / dims_dir_name(dims) / cost_dir_name(cost_enabled) /
         std::string(init_size_name(init_size)) / ("seed_" + std::to_string(seed));
}

MapFile map_file_from_run(const EliteMap& map, std::uint64_t seed) {
  MapFile file;
  file.dims = map.dims;
  file.seed = seed;
  for (const auto& [desc, cell] : map.cells) {
    MapFileCell c;
    c.desc = desc;
    c.fitness = cell.elite.fitness.value_or(0);
    c.hash = park_hash(cell.elite);
    c.park = park_to_json(cell.elite);
    file.cells.push_back(std::move(c));
  }
  return file;
}

MapFile load_map_file(const std::filesystem::path& elite_map_json, const Catalog& catalog) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(elite_map_json));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("map file '" + elite_map_json.string() + "': " + e.what());
  }
  if (j.value("version", 0) != 1) {
    throw ParseError("map file '" + elite_map_json.string() + "': unsupported version");
  }

  MapFile file;
  file.dims.first = dim_from_json(j.at("dims").at("a"));
  file.dims.second = dim_from_json(j.at("dims").at("b"));
  if (j.contains("seed")) file.seed = j["seed"].get<std::uint64_t>();
  for (const auto& s : j.value("source_seeds", nlohmann::json::array())) {
    file.source_seeds.push_back(s.get<std::uint64_t>());
  }

  const std::filesystem::path base = elite_map_json.parent_path();
  for (const auto& jc : j.value("cells", nlohmann::json::array())) {
    MapFileCell cell;
    const auto& jd = jc.at("desc");
    cell.desc = {jd.at(0).get<int>(), jd.at(1).get<int>()};
    cell.fitness = jc.at("fitness").get<Dollars>();
    cell.hash = jc.at("park_hash").get<std::uint64_t>();

    std::string park_file = jc.at("park_file").get<std::string>();
    nlohmann::json jp;
    try {
      jp = nlohmann::json::parse(read_text_file(base / park_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("park file '" + (base / park_file).string() + "': " + e.what());
    }
    Park park = park_from_json(jp, catalog);
    if (park_hash(park) != cell.hash) {
      throw ParseError("map file '" + elite_map_json.string() + "': park hash mismatch for " +
                       cell_stem(cell.desc));
    }
    if (park.fitness && *park.fitness != cell.fitness) {
      throw ParseError("map file '" + elite_map_json.string() + "': fitness mismatch for " +
                       cell_stem(cell.desc));
    }
    if (park.descriptor && !(*park.descriptor == cell.desc)) {
      throw ParseError("map file '" + elite_map_json.string() + "': descriptor mismatch for " +
                       cell_stem(cell.desc));
    }
    cell.park = std::move(jp);
    file.cells.push_back(std::move(cell));
  }
  std::sort(file.cells.begin(), file.cells.end(),
            [](const MapFileCell& a, const MapFileCell& b) { return a.desc < b.desc; });
  return file;
}

MapFile aggregate(std::vector<MapFile> runs) {
  if (runs.empty()) throw ParseError("aggregate: no input maps");
  const auto dims = runs.front().dims;
  for (const auto& r : runs) {
    if (!(r.dims.first == dims.first) || !(r.dims.second == dims.second)) {
      throw ParseError("aggregate: dimension mismatch across input maps");
    }
  }

  auto run_seed = [](const MapFile& r) {
    if (r.seed) return *r.seed;
    if (!r.source_seeds.empty()) {
      return *std::min_element(r.source_seeds.begin(), r.source_seeds.end());
    }
    return std::numeric_limits<std::uint64_t>::max();
  };

  struct Best {
    const MapFileCell* cell = nullptr;
    std::uint64_t seed = 0;
  };
  std::map<Descriptor, Best> best;
  std::set<std::uint64_t> seeds;
  for (const auto& r : runs) {
    std::uint64_t seed = run_seed(r);
    if (r.seed) seeds.insert(*r.seed);
    for (auto s : r.source_seeds) seeds.insert(s);
    for (const auto& c : r.cells) {
      auto [it, inserted] = best.emplace(c.desc, Best{&c, seed});
      if (inserted) continue;
      if (c.fitness > it->second.cell->fitness ||
          (c.fitness == it->second.cell->fitness && seed < it->second.seed)) {
        it->second = Best{&c, seed};
      }
    }
  }

  MapFile out;
  out.dims = dims;
  out.source_seeds.assign(seeds.begin(), seeds.end());
  for (const auto& [desc, b] : best) out.cells.push_back(*b.cell);
  return out;
}

double qd_score(const MapFile& map) {
  if (map.cells.empty()) return 0.0;
  double total = 0.0;
  for (const auto& c : map.cells) total += static_cast<double>(c.fitness);
  return total / static_cast<double>(map.cells.size());
}

namespace {

struct HeatmapGrid {
  int a_min = 0, a_max = 0, b_min = 0, b_max = 0;
  int a_step = 1, b_step = 1;
  std::map<Descriptor, Dollars> fitness;
  bool empty = true;
};

HeatmapGrid heatmap_grid(const MapFile& map) {
  HeatmapGrid g;
  g.a_step = map.dims.first.bucket_size;
  g.b_step = map.dims.second.bucket_size;
  for (const auto& c : map.cells) {
    if (g.empty) {
      g.a_min = g.a_max = c.desc.a;
      g.b_min = g.b_max = c.desc.b;
      g.empty = false;
    } else {
      g.a_min = std::min(g.a_min, c.desc.a);
      g.a_max = std::max(g.a_max, c.desc.a);
      g.b_min = std::min(g.b_min, c.desc.b);
      g.b_max = std::max(g.b_max, c.desc.b);
    }
    g.fitness[c.desc] = c.fitness;
  }
  return g;
}

}  // namespace

std::string heatmap_csv(const MapFile& map) {
  HeatmapGrid g = heatmap_grid(map);
  std::ostringstream os;
  os << metric_name(map.dims.second.metric) << "\\" << metric_name(map.dims.first.metric);
  if (g.empty) {
    os << "\n";
    return os.str();
  }
  for (int a = g.a_min; a <= g.a_max; a += g.a_step) os << "," << a;
  os << "\n";
  for (int b = g.b_max; b >= g.b_min; b -= g.b_step) {
    os << b;
    for (int a = g.a_min; a <= g.a_max; a += g.a_step) {
      os << ",";
      auto it = g.fitness.find(Descriptor{a, b});
      if (it != g.fitness.end()) os << it->second;
    }
    os << "\n";
  }
  return os.str();
}

std::string heatmap_pgm(const MapFile& map) {
  HeatmapGrid g = heatmap_grid(map);
  std::ostringstream os;
  os << "P2\n";
  if (g.empty) {
    os << "0 0\n255\n";
    return os.str();
  }
  Dollars lo = map.cells.front().fitness;
  Dollars hi = lo;
  for (const auto& c : map.cells) {
    lo = std::min(lo, c.fitness);
    hi = std::max(hi, c.fitness);
  }
  int width = (g.a_max - g.a_min) / g.a_step + 1;
  int height = (g.b_max - g.b_min) / g.b_step + 1;
  os << "# " << metric_name(map.dims.first.metric) << " ascending x "
     << metric_name(map.dims.second.metric) << " descending\n";
  os << width << " " << height << "\n255\n";
  for (int b = g.b_max; b >= g.b_min; b -= g.b_step) {
    bool first = true;
    for (int a = g.a_min; a <= g.a_max; a += g.a_step) {
      if (!first) os << " ";
      first = false;
      auto it = g.fitness.find(Descriptor{a, b});
      if (it == g.fitness.end()) {
        os << 0;
      } else if (hi == lo) {
        os << 255;
      } else {
        double frac = static_cast<double>(it->second - lo) / static_cast<double>(hi - lo);
        os << 1 + static_cast<int>(std::lround(frac * 254.0));
      }
    }
    os << "\n";
  }
  return os.str();
}

void write_map_dir(const MapFile& map, const std::filesystem::path& dir, const Catalog& catalog) {
  std::filesystem::create_directories(dir / "parks");

  nlohmann::json j;
  j["version"] = 1;
  j["dims"] = dims_to_json(map.dims);
  if (map.seed) j["seed"] = *map.seed;
  if (!map.source_seeds.empty()) j["source_seeds"] = map.source_seeds;

  nlohmann::json cells = nlohmann::json::array();
  Dollars best = 0;
  for (const auto& c : map.cells) {
    std::string stem = cell_stem(c.desc);
    write_text_file(dir / "parks" / (stem + ".json"), c.park.dump(2) + "\n");

    Park park = park_from_json(c.park, catalog);
    write_text_file(dir / "parks" / (stem + ".txt"), render_ascii(park, catalog));

    nlohmann::json jc;
    jc["desc"] = {c.desc.a, c.desc.b};
    jc["fitness"] = c.fitness;
    jc["park_hash"] = c.hash;
    jc["park_file"] = "parks/" + stem + ".json";
    cells.push_back(std::move(jc));
    best = std::max(best, c.fitness);
  }
  j["cells"] = std::move(cells);
  write_text_file(dir / "elite_map.json", j.dump(2) + "\n");

  write_text_file(dir / "heatmap.csv", heatmap_csv(map));
  write_text_file(dir / "heatmap.pgm", heatmap_pgm(map));

  nlohmann::json summary;
  summary["version"] = 1;
  summary["dims"] = dims_to_json(map.dims);
  if (map.seed) summary["seed"] = *map.seed;
  if (!map.source_seeds.empty()) summary["source_seeds"] = map.source_seeds;
  summary["cells"] = map.cells.size();
  summary["qd_score"] = qd_score(map);
  summary["best_fitness"] = best;
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
}

RunOutcome execute_run(const RunRequest& request, const Catalog& catalog) {
  RunOutcome out;
  try {
    EvoConfig config = request.evo;
    config.master_seed = request.seed;

    RunResult result = run(config, catalog, nullptr);

    MapFile file = map_file_from_run(result.map, request.seed);
    write_map_dir(file, request.dir, catalog);

    std::string log_text;
    for (const auto& e : result.log) {
      log_text += replay_line(e);
      log_text += '\n';
    }
    write_text_file(request.dir / "replay.log", log_text);

    nlohmann::json run_info;
    run_info["version"] = 1;
    run_info["seed"] = request.seed;
    run_info["generations"] = config.generations;
    run_info["population"] = config.population;
    run_info["ticks"] = config.sim.ticks;
    run_info["peeps"] = config.sim.peep_count;
    run_info["init_size"] = std::string(init_size_name(config.init_size));
    if (config.budget) run_info["budget"] = *config.budget;
    run_info["evaluations"] = result.stats.evaluations;
    run_info["init_shortfall"] = result.stats.init_shortfall;
    write_text_file(request.dir / "run.json", run_info.dump(2) + "\n");

    if (request.trace_elites) {
      std::filesystem::create_directories(request.dir / "traces");
      for (const auto& [desc, cell] : result.map.cells) {
        if (!cell.elite.eval) continue;
        SimConfig sim = config.sim;
        sim.rng_seed = cell.elite.eval->sim_seed;
        std::ostringstream trace_text;
        write_trace_header(trace_text);
        TraceFn fn = [&](int tick, int peep, const Peep& p, bool vomited) {
          write_trace_line(trace_text, tick, peep, p, vomited);
        };
        simulate(cell.elite, catalog, sim, &fn);
        write_text_file(request.dir / "traces" / (cell_stem(desc) + ".csv"), trace_text.str());
      }
    }

    out.ok = true;
    out.qd = qd_score(file);
    out.cells = file.cells.size();
    for (const auto& c : file.cells) out.best_fitness = std::max(out.best_fitness, c.fitness);
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

MatrixConfig parse_matrix_file(const std::filesystem::path& path) {
  std::string text = read_text_file(path);

  MatrixConfig config;
  SetupSpec* current = nullptr;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string raw = (eol == std::string::npos) ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError("matrix config line " + std::to_string(line_no) +
                         ": unterminated section header");
      }
      std::string label = trim(line.substr(1, line.size() - 2));
      if (label.empty()) {
        throw ParseError("matrix config line " + std::to_string(line_no) + ": empty section name");
      }
      SetupSpec setup;
      setup.label = label;
      config.setups.push_back(std::move(setup));
      current = &config.setups.back();
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("matrix config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("matrix config line " + std::to_string(line_no) + ": expected key = value");
    }

    auto to_ll = [&](const std::string& v) {
      try {
        size_t used = 0;
        long long n = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
      } catch (const std::exception&) {
        throw ParseError("matrix config line " + std::to_string(line_no) + ": bad integer '" + v +
                         "'");
      }
    };
    auto to_double = [&](const std::string& v) {
      try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
      } catch (const std::exception&) {
        throw ParseError("matrix config line " + std::to_string(line_no) + ": bad number '" + v +
                         "'");
      }
    };
    auto to_seeds = [&](const std::string& v) {
      std::vector<std::uint64_t> seeds;
      for (const auto& tok : split_ws(v)) {
        seeds.push_back(static_cast<std::uint64_t>(to_ll(tok)));
      }
      if (seeds.empty()) {
        throw ParseError("matrix config line " + std::to_string(line_no) + ": empty seed list");
      }
      return seeds;
    };

    if (current == nullptr) {
      if (key == "out") {
        config.out_root = value;
      } else if (key == "seeds") {
        config.seeds = to_seeds(value);
      } else if (key == "generations") {
        config.base.generations = static_cast<int>(to_ll(value));
      } else if (key == "population") {
        config.base.population = static_cast<int>(to_ll(value));
      } else if (key == "ticks") {
        config.base.sim.ticks = static_cast<int>(to_ll(value));
      } else if (key == "peeps") {
        config.base.sim.peep_count = static_cast<int>(to_ll(value));
      } else if (key == "budget") {
        config.budget_amount = to_ll(value);
      } else if (key == "workers") {
        config.workers = static_cast<int>(to_ll(value));
      } else if (key == "mutation_min") {
        config.base.mutation_min = static_cast<int>(to_ll(value));
      } else if (key == "mutation_max") {
        config.base.mutation_max = static_cast<int>(to_ll(value));
      } else if (key == "secondary_prob") {
        config.base.secondary_prob = to_double(value);
      } else if (key == "secondary_cap") {
        config.base.secondary_cap = static_cast<int>(to_ll(value));
      } else if (key == "secondary_parent_prob") {
        config.base.secondary_parent_prob = to_double(value);
      } else if (key == "subtract_cost") {
        config.base.fitness_subtracts_cost = parse_on_off(value, "subtract_cost", line_no);
      } else {
        throw ParseError("matrix config line " + std::to_string(line_no) + ": unknown key '" +
                         key + "'");
      }
      continue;
    }

    if (key == "dims") {
      auto names = split_ws(value);
      if (names.size() != 2) {
        throw ParseError("matrix config line " + std::to_string(line_no) +
                         ": dims wants two metric names");
      }
      current->dims = {default_dimension(parse_metric(names[0])),
                       default_dimension(parse_metric(names[1]))};
    } else if (key == "cost") {
      current->cost_enabled = parse_on_off(value, "cost", line_no);
    } else if (key == "init") {
      current->init_size = parse_init_size(value);
    } else if (key == "seeds") {
      current->seeds = to_seeds(value);
    } else {
      throw ParseError("matrix config line " + std::to_string(line_no) + ": unknown setup key '" +
                       key + "'");
    }
  }

  if (config.setups.empty()) {
    throw ParseError("matrix config '" + path.string() + "': no [setup] sections");
  }
  if (config.seeds.empty()) {
    for (const auto& s : config.setups) {
      if (s.seeds.empty()) {
        throw ParseError("matrix config '" + path.string() + "': setup '" + s.label +
                         "' has no seeds and no global seeds are set");
      }
    }
  }
  return config;
}

MatrixReport run_matrix(const MatrixConfig& config, const Catalog& catalog) {
  struct Job {
    SetupSpec setup;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& setup : config.setups) {
    const auto& seeds = setup.seeds.empty() ? config.seeds : setup.seeds;
    for (auto seed : seeds) jobs.push_back({setup, seed});
  }

  MatrixReport report;
  report.runs.resize(jobs.size());

  auto run_one = [&](size_t i) {
    const Job& job = jobs[i];
    RunRequest request;
    request.evo = config.base;
    request.evo.dims = job.setup.dims;
    request.evo.init_size = job.setup.init_size;
    request.evo.budget =
        job.setup.cost_enabled ? std::optional<Dollars>(config.budget_amount) : std::nullopt;
    request.seed = job.seed;
    request.dir = run_dir_for(config.out_root, job.setup.dims, job.setup.cost_enabled,
                              job.setup.init_size, job.seed);

    MatrixRunRecord record;
    record.setup = job.setup.label;
    record.seed = job.seed;
    record.dir = request.dir.generic_string();
    record.outcome = execute_run(request, catalog);
    report.runs[i] = std::move(record);
  };

  if (config.workers <= 1 || jobs.size() <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> cursor{0};
    auto worker = [&] {
      while (true) {
        size_t i = cursor.fetch_add(1);
        if (i >= jobs.size()) return;
        run_one(i);
      }
    };
    std::vector<std::thread> threads;
    size_t thread_count = std::min(static_cast<size_t>(config.workers), jobs.size());
    threads.reserve(thread_count);
    for (size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (const auto& r : report.runs) {
    if (!r.outcome.ok) ++report.failures;
  }
  return report;
}

void write_matrix_report(const MatrixReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["failures"] = report.failures;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    nlohmann::json jr;
    jr["setup"] = r.setup;
    jr["seed"] = r.seed;
    jr["dir"] = r.dir;
    jr["ok"] = r.outcome.ok;
    if (r.outcome.ok) {
      jr["qd_score"] = r.outcome.qd;
      jr["cells"] = r.outcome.cells;
      jr["best_fitness"] = r.outcome.best_fitness;
    } else {
      jr["error"] = r.outcome.error;
    }
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace microrct
