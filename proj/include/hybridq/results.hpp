#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hybridq {

using Cell = std::variant<double, long long, std::string>;

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless numbers, empty for text
};

// Rectangular table; rows keep insertion order.
class ResultTable {
 public:
  ResultTable(std::string name, std::vector<Column> columns);

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  // Throws PreconditionError on a width mismatch and NumericalError on a
  // non-finite number.
  void add_row(std::vector<Cell> row);

  std::size_t column_index(std::string_view name) const;
  double number(std::size_t row, std::string_view column) const;

  // One header row "name[unit]", comma separated, LF line ends.
  std::string to_csv() const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

struct RunMetadata {
  std::string command;
  std::string version;
  std::optional<long long> seed;
  std::string scenario_hash;  // FNV-1a 64 of the scenario text, hex
  std::vector<std::string> warnings;
};

// Shortest representation that parses back to the same double.
std::string format_number(double v);

std::string fnv1a_hex(std::string_view text);

// {"metadata": {...}, "tables": [{"name", "columns": [{"name", "unit"}], "rows": [[...]]}]}
std::string results_to_json(const RunMetadata& meta, const std::vector<ResultTable>& tables);

// Inverse of results_to_json.
std::pair<RunMetadata, std::vector<ResultTable>> results_from_json(std::string_view json);

}  // namespace hybridq
