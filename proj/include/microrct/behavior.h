#pragma once

#include <span>
#include <string_view>

#include "microrct/catalog.h"
#include "microrct/park.h"
#include "microrct/sim.h"
#include "microrct/types.h"

namespace microrct {

// Static metrics come from the layout alone; runtime metrics need a
// simulation result.
enum class Metric {
  Nausea,
  Excitement,
  Intensity,
  Diversity,
  Happiness,
  Vomit,
  Revenue,
};

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view s);  // throws ParseError
bool is_static_metric(Metric m);

struct DimensionSpec {
  Metric metric = Metric::Excitement;
  int bucket_size = 5;
  bool operator==(const DimensionSpec&) const = default;
};

// Excitement/Intensity/Diversity bucket by 5, Happiness/Vomit by 10.
int default_bucket_size(Metric m);
DimensionSpec default_dimension(Metric m);

struct StaticMetrics {
  double mean_excitement = 0.0;
  double mean_intensity = 0.0;
  double mean_nausea = 0.0;
  double diversity = 0.0;
};

// Means over placed instances plus Shannon-entropy ride diversity. An empty
// park measures zero on everything.
StaticMetrics static_metrics(const Park& park, const Catalog& catalog);

// Entropy of a species-count multiset in bits, scaled by 10.
double shannon_diversity(std::span<const int> counts);

struct RuntimeMetrics {
  int happiness = 0;  // mean happiness rounded down
  int vomit = 0;
  Dollars revenue = 0;
};

RuntimeMetrics runtime_metrics(const SimResult& result);

// Rounds down to a multiple of the bucket size.
int bucket(double value, const DimensionSpec& spec);

double measure(Metric m, const Park& park, const Catalog& catalog, const SimResult* result);

Descriptor make_descriptor(const DimensionSpec& dim_a, const DimensionSpec& dim_b,
                           const Park& park, const Catalog& catalog, const SimResult& result);

}  // namespace microrct
