#include "shotlgcp/shot_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "shotlgcp/error.hpp"

namespace shotlgcp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_flag(const std::string& text, bool& out) {
  if (text == "0") {
    out = false;
    return true;
  }
  if (text == "1") {
    out = true;
    return true;
  }
  return false;
}

} // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

ShotTable read_shot_csv(std::istream& in, RowPolicy policy) {
  ShotTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("shot CSV is empty (a header row is required)");
  }
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* required : {"game_id", "x", "y", "made", "home", "strong"}) {
    if (!column.contains(required)) {
      throw DataError(std::string("shot CSV header lacks column '") + required + "'");
    }
  }
  const bool has_distance = column.contains("distance");

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    auto reject = [&](std::string reason) {
      if (policy == RowPolicy::Strict) {
        throw DataError("line " + std::to_string(line_no) + ": " + reason);
      }
      table.rejected.push_back({line_no, std::move(reason)});
    };
    if (fields.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, found " +
             std::to_string(fields.size()));
      continue;
    }
    RawShot shot;
    shot.game_id = fields[column["game_id"]];
    bool made = false;
    if (shot.game_id.empty()) {
      reject("empty game_id");
      continue;
    }
    if (!parse_double(fields[column["x"]], shot.location.x) ||
        !parse_double(fields[column["y"]], shot.location.y)) {
      reject("coordinates are not finite numbers");
      continue;
    }
    if (!parse_flag(fields[column["made"]], made) || !parse_flag(fields[column["home"]], shot.home) ||
        !parse_flag(fields[column["strong"]], shot.strong)) {
      reject("made/home/strong must be 0 or 1");
      continue;
    }
    shot.outcome = made ? ShotType::Made : ShotType::Missed;
    if (has_distance && !fields[column["distance"]].empty()) {
      double d = 0.0;
      if (!parse_double(fields[column["distance"]], d) || d < 0.0) {
        reject("distance is not a non-negative number");
        continue;
      }
      shot.distance = d;
    }
    table.shots.push_back(std::move(shot));
  }
  return table;
}

ShotTable read_shot_csv(const std::filesystem::path& path, RowPolicy policy) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open shot CSV " + path.string());
  }
  return read_shot_csv(in, policy);
}

void write_shot_csv(const Dataset& data, std::ostream& out) {
  out << "game_id,x,y,made,home,strong\n";
  char buf[64];
  for (const auto& g : data.games) {
    for (const auto& s : g.shots) {
      std::snprintf(buf, sizeof(buf), "%.9f,%.9f", s.location.x, s.location.y);
      out << g.game_id << ',' << buf << ',' << index_of(s.outcome) << ',' << (g.home ? 1 : 0)
          << ',' << (g.strong ? 1 : 0) << '\n';
    }
  }
}

nlohmann::json dataset_sidecar(const Dataset& data) {
  nlohmann::json doc;
  doc["region"] = {{"x_min", data.region.x_min},
                   {"x_max", data.region.x_max},
                   {"y_min", data.region.y_min},
                   {"y_max", data.region.y_max}};
  doc["encoding"] = data.scheme.name();
  doc["p"] = data.p();
  doc["filter"] = {{"apply_distance", data.filter.apply_distance},
                   {"max_distance", data.filter.max_distance},
                   {"min_distance", data.filter.min_distance},
                   {"basket", {data.filter.basket.x, data.filter.basket.y}}};
  doc["filter_counts"] = {{"too_far", data.provenance.too_far},
                          {"too_close", data.provenance.too_close},
                          {"outside_region", data.provenance.outside_region},
                          {"malformed", data.provenance.malformed}};
  auto& games = doc["games"] = nlohmann::json::array();
  for (const auto& g : data.games) {
    games.push_back({{"game_id", g.game_id},
                     {"home", g.home ? 1 : 0},
                     {"strong", g.strong ? 1 : 0},
                     {"shots", g.shots.size()}});
  }
  return doc;
}

DatasetSidecar DatasetSidecar::from_json(const nlohmann::json& doc) {
  try {
    DatasetSidecar sc;
    const auto& r = doc.at("region");
    sc.region = {r.at("x_min").get<double>(), r.at("x_max").get<double>(),
                 r.at("y_min").get<double>(), r.at("y_max").get<double>()};
    sc.scheme = CovariateScheme::parse(doc.at("encoding").get<std::string>());
    FilterRules rules;
    if (doc.contains("filter")) {
      const auto& f = doc.at("filter");
      rules.apply_distance = f.at("apply_distance").get<bool>();
      rules.max_distance = f.at("max_distance").get<double>();
      rules.min_distance = f.at("min_distance").get<double>();
      rules.basket = {f.at("basket").at(0).get<double>(), f.at("basket").at(1).get<double>()};
    }
    sc.rules = rules;
    if (doc.contains("filter_counts")) {
      const auto& c = doc.at("filter_counts");
      sc.provenance = {c.at("too_far").get<long>(), c.at("too_close").get<long>(),
                       c.at("outside_region").get<long>(), c.at("malformed").get<long>()};
    }
    for (const auto& g : doc.at("games")) {
      sc.games.push_back({g.at("game_id").get<std::string>(), g.at("home").get<int>() != 0,
                          g.at("strong").get<int>() != 0});
    }
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed dataset sidecar: ") + e.what());
  }
}

void write_dataset(const Dataset& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw DataError("cannot write " + csv_path.string());
  write_shot_csv(data, csv);
  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw DataError("cannot write " + sidecar_path.string());
  side << dataset_sidecar(data).dump(2) << '\n';
  if (!csv || !side) throw DataError("write failed for " + csv_path.string());
}

std::filesystem::path sidecar_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

DatasetLoad load_dataset(const std::filesystem::path& csv_path, const Region& region,
                         const CovariateScheme& scheme, const FilterRules& rules,
                         RowPolicy policy) {
  auto table = read_shot_csv(csv_path, policy);
  const auto side_path = sidecar_path_for(csv_path);
  DatasetLoad load;
  if (std::filesystem::exists(side_path)) {
    std::ifstream in(side_path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("cannot parse " + side_path.string() + ": " + e.what());
    }
    const auto sc = DatasetSidecar::from_json(doc);
    if (sc.scheme.dimension() != scheme.dimension() || !(sc.scheme == scheme)) {
      throw ConfigError("dataset encoding '" + sc.scheme.name() + "' (p=" +
                        std::to_string(sc.scheme.dimension()) + ") does not match configured '" +
                        scheme.name() + "' (p=" + std::to_string(scheme.dimension()) + ")");
    }
    load.data = filter_shots(table.shots, sc.region, sc.scheme, sc.rules, sc.games,
                             sc.provenance.malformed + static_cast<long>(table.rejected.size()));
    load.data.provenance.too_far += sc.provenance.too_far;
    load.data.provenance.too_close += sc.provenance.too_close;
    load.data.provenance.outside_region += sc.provenance.outside_region;
  } else {
    load.data = filter_shots(table.shots, region, scheme, rules, {},
                             static_cast<long>(table.rejected.size()));
  }
  load.rejected = std::move(table.rejected);
  if (load.data.games.empty()) {
    throw DataError("no games found in " + csv_path.string());
  }
  return load;
}

} // namespace shotlgcp
