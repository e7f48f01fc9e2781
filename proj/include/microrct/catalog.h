#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "microrct/types.h"

namespace microrct {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Category {
  Coaster,
  GentleRide,
  ThrillRide,
  WaterRide,
  TransportRide,
  Shop,
  Toilet,
  FirstAid,
};

std::string_view category_name(Category c);
Category parse_category(std::string_view s);  // throws ParseError

// One row of the attraction catalog. Stats are per type; every placed
// instance of a type behaves identically.
struct AttractionType {
  std::string id;
  std::string name;
  Category category = Category::Shop;
  int excitement = 0;
  int intensity = 0;
  int nausea = 0;  // the only stat allowed below zero
  int cost_per_tile = 0;
  int width = 1;
  int height = 1;
  int ticket_price = 0;
  std::string glyph;  // exactly one UTF-8 code point

  bool operator==(const AttractionType&) const = default;
};

// Construction cost of one instance: cost_per_tile times footprint area.
Dollars total_cost(const AttractionType& t);

struct Catalog {
  std::string version;
  std::vector<AttractionType> types;  // file order; mutation sampling depends on it
  // Indices of types eligible for mutation adds (everything except first aid).
  std::vector<int> mutatable;

  const AttractionType* find(std::string_view id) const;
  int index_of(std::string_view id) const;  // -1 when absent

  bool operator==(const Catalog& o) const {
    return version == o.version && types == o.types;
  }
};

// Parses the tab-separated catalog format. `source` names the input in
// error messages ("file.tsv:12: ...").
Catalog parse_catalog(std::string_view text, std::string_view source);

Catalog load_catalog(const std::filesystem::path& path);

// The bundled catalog compiled into the library (identical to the repo's
// data/attractions.tsv).
const Catalog& default_catalog();

std::string catalog_to_tsv(const Catalog& c);
void save_catalog(const std::filesystem::path& path, const Catalog& c);

}  // namespace microrct
