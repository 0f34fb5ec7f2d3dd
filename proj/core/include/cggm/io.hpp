#pragma once

#include "cggm/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cggm {

class IoError : public Error {
 public:
  using Error::Error;
};

/// {"p": .., "q": .., "weights": [..], "classes": [{"lambda": [[..]], "theta": [[..]]}]}
/// with row-major nested arrays.
nlohmann::json mixture_to_json(const MixtureParams& params);

/// Parses and validates; throws InvalidArgument / DimensionError / NotPositiveDefinite.
MixtureParams mixture_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

/// Comma separated, '.' decimal, mandatory header row, no index column.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values);
/// Preformatted cells, e.g. for tables with text columns.
void write_csv_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);
/// Header "<prefix>1,<prefix>2,...".
void write_matrix_csv(const std::filesystem::path& path, const Matrix& values,
                      const std::string& column_prefix);
CsvTable read_csv(const std::filesystem::path& path);

void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels);
/// Reads the single "label" column back as integers.
std::vector<int> read_labels_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace cggm
