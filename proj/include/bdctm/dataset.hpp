#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdctm {

enum class ColumnKind { Count, Ordinal, Continuous, Group };

std::string_view column_kind_name(ColumnKind kind);

/// One typed column. Counts hold nonnegative integers, ordinal columns the
/// category index 1..c+1, group columns the level index 1..G into `levels`.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<double> values;
  std::vector<std::string> levels;  ///< ordinal / group level labels

  int code(std::size_t row) const { return static_cast<int>(values[row]); }
};

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  /// Ordinal: declared level order (lowest first). Empty means the file
  /// holds integer codes 1..categories directly.
  std::vector<std::string> levels;
  int categories = 0;
};

using Schema = std::vector<ColumnSchema>;

class Dataset {
 public:
  Dataset() = default;

  std::size_t rows() const { return rows_; }
  const std::vector<Column>& columns() const { return columns_; }

  bool has(std::string_view name) const;
  /// Throws DataError when the column does not exist.
  const Column& column(std::string_view name) const;

  /// Appends a column; its length must match the existing rows.
  void add(Column col);

  /// Row subset in the given order. Level tables are kept unchanged.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Parse RFC-4180 style CSV (header row, comma separator, double-quote
/// quoting, CRLF or LF line ends) into string records.
std::vector<std::vector<std::string>> read_csv_records(std::istream& in);

/// Typed ingest. Columns not named in the schema are ignored. Missing
/// values, type mismatches and undeclared ordinal levels raise DataError
/// naming the row (1-based, header excluded) and the column.
Dataset parse_csv(std::istream& in, const Schema& schema);
Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema);

/// Quote a CSV field when needed.
std::string csv_escape(std::string_view field);
/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double v);

}  // namespace bdctm
