#include "cggm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cggm {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw InvalidArgument("matrix must be a nonempty array of arrays");
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw DimensionError("matrix rows have unequal lengths");
    }
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InvalidArgument("matrix entries must be numbers");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

nlohmann::json mixture_to_json(const MixtureParams& params) {
  nlohmann::json j;
  j["p"] = params.p();
  j["q"] = params.q();
  j["weights"] = std::vector<double>(params.weights.data(), params.weights.data() + params.k());
  auto classes = nlohmann::json::array();
  for (const auto& c : params.classes) {
    classes.push_back({{"lambda", matrix_to_json(c.lambda)}, {"theta", matrix_to_json(c.theta)}});
  }
  j["classes"] = std::move(classes);
  return j;
}

MixtureParams mixture_from_json(const nlohmann::json& j) {
  try {
    const auto p = j.at("p").get<Index>();
    const auto q = j.at("q").get<Index>();
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto& cls = j.at("classes");
    if (!cls.is_array()) throw InvalidArgument("'classes' must be an array");
    std::vector<ClassParams> classes;
    for (const auto& c : cls) {
      auto cp = ClassParams::make(matrix_from_json(c.at("lambda")), matrix_from_json(c.at("theta")));
      if (cp.p() != p || cp.q() != q) throw DimensionError("class shape disagrees with (p, q)");
      classes.push_back(std::move(cp));
    }
    Vector weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
    return MixtureParams::make(std::move(classes), std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed mixture JSON: ") + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& values) {
  if (static_cast<Index>(header.size()) != values.cols()) {
    throw DimensionError("CSV header width differs from data width");
  }
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(i, c));
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_csv_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw DimensionError("CSV row width differs from header");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& values,
                      const std::string& column_prefix) {
  std::vector<std::string> header;
  for (Index c = 0; c < values.cols(); ++c) header.push_back(column_prefix + std::to_string(c + 1));
  write_csv(path, header, values);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  CsvTable table;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    for (auto& cell : split(line)) table.header.push_back(trim(cell));
    break;
  }
  if (table.header.empty()) throw IoError("'" + path.string() + "' has no header row");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table.header.size()) + " fields");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(trim(c), path, line_no));
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      table.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
  return table;
}

void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  out << "label\n";
  for (int l : labels) out << l << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.header.size() != 1) throw IoError("'" + path.string() + "' must have one column");
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(table.values.rows()));
  for (Index i = 0; i < table.values.rows(); ++i) {
    const double v = table.values(i, 0);
    if (v != std::round(v)) throw IoError("labels must be integers");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace cggm
