#include "bdctm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "bdctm/error.hpp"

namespace bdctm {

std::string_view column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Count:
      return "count";
    case ColumnKind::Ordinal:
      return "ordinal";
    case ColumnKind::Continuous:
      return "continuous";
    case ColumnKind::Group:
      return "group";
  }
  return "continuous";
}

bool Dataset::has(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

const Column& Dataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw DataError("dataset has no column '" + std::string(name) + "'");
}

void Dataset::add(Column col) {
  if (has(col.name)) throw DataError("duplicate column '" + col.name + "'");
  if (!columns_.empty() && col.values.size() != rows_) {
    throw DataError("column '" + col.name + "' has " + std::to_string(col.values.size()) +
                    " rows, expected " + std::to_string(rows_));
  }
  rows_ = col.values.size();
  columns_.push_back(std::move(col));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  for (const auto& c : columns_) {
    Column sub{c.name, c.kind, {}, c.levels};
    sub.values.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= rows_) throw DataError("subset: row index out of range");
      sub.values.push_back(c.values[r]);
    }
    out.columns_.push_back(std::move(sub));
  }
  out.rows_ = rows.size();
  return out;
}

std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char ch;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line yields a single empty field; skip it.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(ch);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN"; }

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

[[noreturn]] void cell_error(std::size_t row, const std::string& col, const std::string& what) {
  throw DataError("row " + std::to_string(row) + ", column '" + col + "': " + what);
}

std::vector<std::string> natural_order(const std::set<std::string>& labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  bool numeric = true;
  for (const auto& l : out) {
    double v;
    if (!parse_number(l, v)) {
      numeric = false;
      break;
    }
  }
  if (numeric) {
    std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
      double x = 0, y = 0;
      parse_number(a, x);
      parse_number(b, y);
      return x < y;
    });
  }
  return out;
}

}  // namespace

Dataset parse_csv(std::istream& in, const Schema& schema) {
  const auto records = read_csv_records(in);
  if (records.empty()) throw DataError("CSV: missing header row");
  const auto& header = records.front();
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) index[trim(header[j])] = j;

  Dataset data;
  const std::size_t n = records.size() - 1;
  for (const auto& cs : schema) {
    auto it = index.find(cs.name);
    if (it == index.end()) throw DataError("CSV: missing column '" + cs.name + "'");
    const std::size_t j = it->second;
    Column col{cs.name, cs.kind, {}, {}};
    col.values.resize(n);

    std::vector<std::string> raw(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto& rec = records[r + 1];
      if (j >= rec.size()) cell_error(r + 1, cs.name, "missing value (short row)");
      raw[r] = trim(rec[j]);
      if (is_missing(raw[r])) cell_error(r + 1, cs.name, "missing value");
    }

    switch (cs.kind) {
      case ColumnKind::Continuous:
        for (std::size_t r = 0; r < n; ++r) {
          double v;
          if (!parse_number(raw[r], v) || !std::isfinite(v)) {
            cell_error(r + 1, cs.name, "expected a number, got '" + raw[r] + "'");
          }
          col.values[r] = v;
        }
        break;
      case ColumnKind::Count:
        for (std::size_t r = 0; r < n; ++r) {
          double v;
          if (!parse_number(raw[r], v) || !std::isfinite(v)) {
            cell_error(r + 1, cs.name, "expected a count, got '" + raw[r] + "'");
          }
          if (v < 0.0 || v != std::floor(v)) {
            cell_error(r + 1, cs.name, "count must be a nonnegative integer, got '" + raw[r] + "'");
          }
          col.values[r] = v;
        }
        break;
      case ColumnKind::Ordinal: {
        col.levels = cs.levels;
        if (cs.levels.empty()) {
          if (cs.categories < 2) {
            throw DataError("ordinal column '" + cs.name + "' needs declared levels or a category count");
          }
          for (int k = 1; k <= cs.categories; ++k) col.levels.push_back(std::to_string(k));
        }
        for (std::size_t r = 0; r < n; ++r) {
          auto pos = std::find(col.levels.begin(), col.levels.end(), raw[r]);
          if (pos == col.levels.end()) cell_error(r + 1, cs.name, "undeclared ordinal level '" + raw[r] + "'");
          col.values[r] = static_cast<double>(pos - col.levels.begin() + 1);
        }
        break;
      }
      case ColumnKind::Group: {
        std::set<std::string> labels(raw.begin(), raw.end());
        col.levels = natural_order(labels);
        std::map<std::string, int> code;
        for (std::size_t k = 0; k < col.levels.size(); ++k) code[col.levels[k]] = static_cast<int>(k) + 1;
        for (std::size_t r = 0; r < n; ++r) col.values[r] = code[raw[r]];
        break;
      }
    }
    data.add(std::move(col));
  }
  return data;
}

Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  return parse_csv(in, schema);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bdctm
