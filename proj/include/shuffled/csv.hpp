#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shuffled/core.hpp"

namespace shuffled {

/// Malformed CSV input. `row` is 1-based and counts the header as row 1;
/// `column` is 1-based, 0 when the problem is not tied to a column.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& message, std::size_t row, std::size_t column);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

struct CsvOptions {
  std::string label_column = "y";
  /// When unset, all rows form one replication.
  std::optional<std::string> replication_column;
};

/// A dataset together with the column names it was read from.
struct CsvDataset {
  Dataset dataset;
  std::vector<std::string> feature_names;
  std::string label_name = "y";
  std::optional<std::string> replication_name;
};

/// Parses the header-first, comma-separated dialect. Every column other than
/// the label and replication columns is a feature. Replication values must be
/// integers; they are densified to [0, R) in order of first appearance.
CsvDataset read_csv(std::istream& in, const CsvOptions& options);
CsvDataset read_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Writes features, then the label, then the replication column (only when
/// `replication_name` is set). Numbers use the shortest representation that
/// round-trips exactly.
void write_csv(std::ostream& out, const CsvDataset& data);
void write_csv(const std::filesystem::path& path, const CsvDataset& data);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Default feature names x1..xd.
std::vector<std::string> default_feature_names(std::size_t d);

}  // namespace shuffled
