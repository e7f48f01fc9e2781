#include "microrct/catalog.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace microrct {

namespace detail {
extern const char* kDefaultCatalogTsv;  // generated from data/attractions.tsv
}

namespace {

constexpr std::string_view kHeader =
    "id\tname\tcategory\texcitement\tintensity\tnausea\tcost_per_tile\twidth\theight\tticket_price\tglyph";

const std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::Coaster, "coaster"},
    {Category::GentleRide, "gentle_ride"},
    {Category::ThrillRide, "thrill_ride"},
    {Category::WaterRide, "water_ride"},
    {Category::TransportRide, "transport_ride"},
    {Category::Shop, "shop"},
    {Category::Toilet, "toilet"},
    {Category::FirstAid, "first_aid"},
};

std::string location(std::string_view source, int line) {
  std::ostringstream os;
  os << source << ":" << line << ": ";
  return os.str();
}

int parse_int(std::string_view field, std::string_view source, int line, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(location(source, line) + "non-integer " + std::string(what) + " '" +
                     std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

// Number of UTF-8 code points, or -1 on malformed input.
int utf8_length(std::string_view s) {
  int count = 0;
  size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    } else {
      return -1;
    }
    if (i + len > s.size()) return -1;
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return -1;
    }
    i += len;
    ++count;
  }
  return count;
}

}  // namespace

std::string_view category_name(Category c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "unknown";
}

Category parse_category(std::string_view s) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (name == s) return cat;
  }
  throw ParseError("unknown category '" + std::string(s) + "'");
}

Dollars total_cost(const AttractionType& t) {
  return static_cast<Dollars>(t.cost_per_tile) * t.width * t.height;
}

const AttractionType* Catalog::find(std::string_view id) const {
  int i = index_of(id);
  return i < 0 ? nullptr : &types[static_cast<size_t>(i)];
}

int Catalog::index_of(std::string_view id) const {
  for (size_t i = 0; i < types.size(); ++i) {
    if (types[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

Catalog parse_catalog(std::string_view text, std::string_view source) {
  Catalog catalog;
  catalog.version = "1";

  std::map<std::string, int> seen_ids;
  std::map<std::string, int> seen_glyphs;
  bool header_seen = false;
  int line_no = 0;
  size_t pos = 0;

  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kVersionTag = "# version:";
      if (line.substr(0, kVersionTag.size()) == kVersionTag) {
        std::string_view v = line.substr(kVersionTag.size());
        while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
        catalog.version = std::string(v);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kHeader) {
        throw ParseError(location(source, line_no) + "expected header row '" +
                         std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    auto fields = split_tabs(line);
    if (fields.size() != 11) {
      throw ParseError(location(source, line_no) + "expected 11 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }

    AttractionType t;
    t.id = std::string(fields[0]);
    t.name = std::string(fields[1]);
    try {
      t.category = parse_category(fields[2]);
    } catch (const ParseError& e) {
      throw ParseError(location(source, line_no) + e.what());
    }
    t.excitement = parse_int(fields[3], source, line_no, "excitement");
    t.intensity = parse_int(fields[4], source, line_no, "intensity");
    t.nausea = parse_int(fields[5], source, line_no, "nausea");
    t.cost_per_tile = parse_int(fields[6], source, line_no, "cost_per_tile");
    t.width = parse_int(fields[7], source, line_no, "width");
    t.height = parse_int(fields[8], source, line_no, "height");
    t.ticket_price = parse_int(fields[9], source, line_no, "ticket_price");
    t.glyph = std::string(fields[10]);

    if (t.id.empty()) throw ParseError(location(source, line_no) + "empty id");
    if (t.excitement < 0)
      throw ParseError(location(source, line_no) + "excitement must be >= 0");
    if (t.intensity < 0)
      throw ParseError(location(source, line_no) + "intensity must be >= 0");
    if (t.cost_per_tile <= 0)
      throw ParseError(location(source, line_no) + "cost_per_tile must be > 0");
    if (t.width < 1 || t.height < 1)
      throw ParseError(location(source, line_no) + "footprint must be at least 1x1");
    if (t.ticket_price < 0)
      throw ParseError(location(source, line_no) + "ticket_price must be >= 0");
    if (utf8_length(t.glyph) != 1)
      throw ParseError(location(source, line_no) + "glyph must be a single character, got '" +
                       t.glyph + "'");

    if (auto [it, inserted] = seen_ids.emplace(t.id, line_no); !inserted) {
      throw ParseError(location(source, line_no) + "duplicate id '" + t.id + "' (first seen on line " +
                       std::to_string(it->second) + ")");
    }
    if (auto [it, inserted] = seen_glyphs.emplace(t.glyph, line_no); !inserted) {
      throw ParseError(location(source, line_no) + "duplicate glyph '" + t.glyph +
                       "' (first seen on line " + std::to_string(it->second) + ")");
    }

    catalog.types.push_back(std::move(t));
  }

  if (catalog.types.empty()) {
    throw ParseError(std::string(source) + ": catalog must contain at least one attraction type");
  }

  for (size_t i = 0; i < catalog.types.size(); ++i) {
    if (catalog.types[i].category != Category::FirstAid) {
      catalog.mutatable.push_back(static_cast<int>(i));
    }
  }
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open catalog file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str(), path.string());
}

const Catalog& default_catalog() {
  static const Catalog catalog = parse_catalog(detail::kDefaultCatalogTsv, "<builtin>");
  return catalog;
}

std::string catalog_to_tsv(const Catalog& c) {
  std::ostringstream os;
  os << "# version: " << c.version << "\n";
  os << kHeader << "\n";
  for (const auto& t : c.types) {
    os << t.id << '\t' << t.name << '\t' << category_name(t.category) << '\t' << t.excitement
       << '\t' << t.intensity << '\t' << t.nausea << '\t' << t.cost_per_tile << '\t' << t.width
       << '\t' << t.height << '\t' << t.ticket_price << '\t' << t.glyph << "\n";
  }
  return os.str();
}

void save_catalog(const std::filesystem::path& path, const Catalog& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write catalog file '" + path.string() + "'");
  out << catalog_to_tsv(c);
}

}  // namespace microrct
