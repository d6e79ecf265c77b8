#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "shotlgcp/data_model.hpp"

namespace shotlgcp {

struct RowRejection {
  long line = 0;
  std::string reason;
};

struct ShotTable {
  std::vector<RawShot> shots;
  std::vector<RowRejection> rejected;
};

enum class RowPolicy { Strict, Lenient };

/// Reads `game_id,x,y,made,home,strong` (header required, column order free,
/// an optional `distance` column is honoured). Malformed rows are collected
/// in `rejected`; with RowPolicy::Strict the first one raises DataError.
ShotTable read_shot_csv(std::istream& in, RowPolicy policy = RowPolicy::Lenient);
ShotTable read_shot_csv(const std::filesystem::path& path, RowPolicy policy = RowPolicy::Lenient);

/// Writes the shot CSV with coordinates at 1e-9 ft resolution.
void write_shot_csv(const Dataset& data, std::ostream& out);

/// Sidecar describing region, encoding, filter counts and the game list.
nlohmann::json dataset_sidecar(const Dataset& data);

struct DatasetSidecar {
  Region region;
  CovariateScheme scheme;
  FilterRules rules;
  FilterCounts provenance;
  std::vector<GameInfo> games;

  static DatasetSidecar from_json(const nlohmann::json& doc);
};

/// Writes `<stem>.csv` and `<stem>.json`.
void write_dataset(const Dataset& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path);

/// Loads a shot CSV plus its sidecar (if present) into a Dataset. Without a
/// sidecar the region, scheme and filter rules come from the arguments.
struct DatasetLoad {
  Dataset data;
  std::vector<RowRejection> rejected;
};

DatasetLoad load_dataset(const std::filesystem::path& csv_path, const Region& region,
                         const CovariateScheme& scheme, const FilterRules& rules,
                         RowPolicy policy = RowPolicy::Lenient);

/// Path of the sidecar that accompanies a CSV: data.csv -> data.json.
std::filesystem::path sidecar_path_for(const std::filesystem::path& csv_path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

} // namespace shotlgcp
