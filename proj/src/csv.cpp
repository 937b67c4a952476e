#include "shuffled/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace shuffled {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(trim(field));
  return fields;
}

double parse_number(const std::string& text, std::size_t row, std::size_t column) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw CsvError("cannot parse '" + text + "' as a number", row, column);
  }
  if (!std::isfinite(value)) throw CsvError("non-finite value '" + text + "'", row, column);
  return value;
}

}  // namespace

CsvError::CsvError(const std::string& message, std::size_t row, std::size_t column)
    : std::runtime_error("CSV row " + std::to_string(row) +
                         (column > 0 ? ", column " + std::to_string(column) : std::string()) +
                         ": " + message),
      row_(row),
      column_(column) {}

CsvDataset read_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("missing header row", 1, 0);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_fields(line);

  std::optional<std::size_t> label_index;
  std::optional<std::size_t> replication_index;
  std::vector<std::size_t> feature_index;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == options.label_column) {
      if (label_index) throw CsvError("duplicate label column '" + header[c] + "'", 1, c + 1);
      label_index = c;
    } else if (options.replication_column && header[c] == *options.replication_column) {
      replication_index = c;
    } else {
      feature_index.push_back(c);
      feature_names.push_back(header[c]);
    }
  }
  if (!label_index) throw CsvError("no label column named '" + options.label_column + "'", 1, 0);
  if (options.replication_column && !replication_index) {
    throw CsvError("no replication column named '" + *options.replication_column + "'", 1, 0);
  }
  if (feature_index.empty()) throw CsvError("no feature columns", 1, 0);

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::vector<int> ids;
  std::map<long long, int> dense_ids;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw CsvError("expected " + std::to_string(header.size()) + " fields, found " +
                         std::to_string(fields.size()),
                     row, std::min(fields.size(), header.size()) + 1);
    }
    std::vector<double> values;
    values.reserve(feature_index.size());
    for (std::size_t c : feature_index) values.push_back(parse_number(fields[c], row, c + 1));
    rows.push_back(std::move(values));
    labels.push_back(parse_number(fields[*label_index], row, *label_index + 1));
    if (replication_index) {
      const double raw = parse_number(fields[*replication_index], row, *replication_index + 1);
      if (raw != std::floor(raw)) {
        throw CsvError("replication id '" + fields[*replication_index] + "' is not an integer",
                       row, *replication_index + 1);
      }
      const auto key = static_cast<long long>(raw);
      auto [it, inserted] = dense_ids.emplace(key, static_cast<int>(dense_ids.size()));
      ids.push_back(it->second);
    } else {
      ids.push_back(0);
    }
  }
  if (rows.empty()) throw CsvError("no data rows", row, 0);

  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_index.size()));
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    y[static_cast<Eigen::Index>(i)] = labels[i];
  }
  return CsvDataset{Dataset(std::move(x), std::move(y), std::move(ids)), std::move(feature_names),
                    options.label_column, options.replication_column};
}

CsvDataset read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in, options);
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buffer, ptr);
}

std::vector<std::string> default_feature_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

void write_csv(std::ostream& out, const CsvDataset& data) {
  const Dataset& ds = data.dataset;
  if (data.feature_names.size() != ds.dim()) {
    throw std::invalid_argument("write_csv: feature name count does not match dimension");
  }
  for (const auto& name : data.feature_names) out << name << ',';
  out << data.label_name;
  if (data.replication_name) out << ',' << *data.replication_name;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < ds.features().cols(); ++j) {
      out << format_double(ds.features()(row, j)) << ',';
    }
    out << format_double(ds.labels()[row]);
    if (data.replication_name) out << ',' << ds.replication_ids()[i];
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, data);
}

}  // namespace shuffled
