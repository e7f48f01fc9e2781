#include "microrct/behavior.h"

#include <cmath>
#include <map>
#include <stdexcept>

namespace microrct {

namespace {

const std::pair<Metric, std::string_view> kMetricNames[] = {
    {Metric::Nausea, "nausea"},       {Metric::Excitement, "excitement"},
    {Metric::Intensity, "intensity"}, {Metric::Diversity, "diversity"},
    {Metric::Happiness, "happiness"}, {Metric::Vomit, "vomit"},
    {Metric::Revenue, "revenue"},
};

}  // namespace

std::string_view metric_name(Metric m) {
  for (const auto& [metric, name] : kMetricNames) {
    if (metric == m) return name;
  }
  return "unknown";
}

Metric parse_metric(std::string_view s) {
  for (const auto& [metric, name] : kMetricNames) {
    if (name == s) return metric;
  }
  throw ParseError("unknown metric '" + std::string(s) + "'");
}

bool is_static_metric(Metric m) {
  switch (m) {
    case Metric::Nausea:
    case Metric::Excitement:
    case Metric::Intensity:
    case Metric::Diversity:
      return true;
    default:
      return false;
  }
}

int default_bucket_size(Metric m) {
  switch (m) {
    case Metric::Happiness:
    case Metric::Vomit:
      return 10;
    default:
      return 5;
  }
}

DimensionSpec default_dimension(Metric m) { return {m, default_bucket_size(m)}; }

double shannon_diversity(std::span<const int> counts) {
  long long total = 0;
  for (int c : counts) {
    if (c > 0) total += c;
  }
  if (total == 0) return 0.0;
  double entropy = 0.0;
  for (int c : counts) {
    if (c <= 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    entropy -= p * std::log2(p);
  }
  return entropy * 10.0;
}

StaticMetrics static_metrics(const Park& park, const Catalog& catalog) {
  StaticMetrics m;
  if (park.attractions.empty()) return m;

  std::vector<int> counts(catalog.types.size(), 0);
  long long excitement = 0;
  long long intensity = 0;
  long long nausea = 0;
  for (const auto& a : park.attractions) {
    int idx = catalog.index_of(a.type_id);
    if (idx < 0) throw ParseError("static_metrics: unknown attraction type '" + a.type_id + "'");
    const AttractionType& t = catalog.types[static_cast<size_t>(idx)];
    excitement += t.excitement;
    intensity += t.intensity;
    nausea += t.nausea;
    ++counts[static_cast<size_t>(idx)];
  }
  auto n = static_cast<double>(park.attractions.size());
  m.mean_excitement = static_cast<double>(excitement) / n;
  m.mean_intensity = static_cast<double>(intensity) / n;
  m.mean_nausea = static_cast<double>(nausea) / n;
  m.diversity = shannon_diversity(counts);
  return m;
}

RuntimeMetrics runtime_metrics(const SimResult& result) {
  RuntimeMetrics m;
  m.happiness = static_cast<int>(std::floor(result.mean_happiness));
  m.vomit = result.vomit_count;
  m.revenue = result.revenue;
  return m;
}

int bucket(double value, const DimensionSpec& spec) {
  return static_cast<int>(std::floor(value / spec.bucket_size)) * spec.bucket_size;
}

double measure(Metric m, const Park& park, const Catalog& catalog, const SimResult* result) {
  switch (m) {
    case Metric::Nausea:
      return static_metrics(park, catalog).mean_nausea;
    case Metric::Excitement:
      return static_metrics(park, catalog).mean_excitement;
    case Metric::Intensity:
      return static_metrics(park, catalog).mean_intensity;
    case Metric::Diversity:
      return static_metrics(park, catalog).diversity;
    default:
      break;
  }
  if (result == nullptr) {
    throw std::invalid_argument("measure: runtime metric needs a simulation result");
  }
  RuntimeMetrics rm = runtime_metrics(*result);
  switch (m) {
    case Metric::Happiness:
      return rm.happiness;
    case Metric::Vomit:
      return rm.vomit;
    case Metric::Revenue:
      return static_cast<double>(rm.revenue);
    default:
      throw std::invalid_argument("measure: unknown metric");
  }
}

Descriptor make_descriptor(const DimensionSpec& dim_a, const DimensionSpec& dim_b,
                           const Park& park, const Catalog& catalog, const SimResult& result) {
  // The static means get recomputed at most twice here; parks are small
  // enough that caching is not worth the coupling.
  return {bucket(measure(dim_a.metric, park, catalog, &result), dim_a),
          bucket(measure(dim_b.metric, park, catalog, &result), dim_b)};
}

}  // namespace microrct
