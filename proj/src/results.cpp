#include "hybridq/results.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "hybridq/error.hpp"

namespace hybridq {

namespace {

using json = nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string header(const Column& c) { return c.unit.empty() ? c.name : c.name + "[" + c.unit + "]"; }

}  // namespace

ResultTable::ResultTable(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
  if (columns_.empty()) throw PreconditionError("table '" + name_ + "' needs at least one column");
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw PreconditionError("table '" + name_ + "': row has " + std::to_string(row.size()) + " cells, expected " +
                            std::to_string(columns_.size()));
  for (std::size_t k = 0; k < row.size(); ++k)
    if (const double* d = std::get_if<double>(&row[k]); d && !std::isfinite(*d))
      throw NumericalError("table '" + name_ + "': non-finite value in column '" + columns_[k].name + "'");
  rows_.push_back(std::move(row));
}

std::size_t ResultTable::column_index(std::string_view name) const {
  for (std::size_t k = 0; k < columns_.size(); ++k)
    if (columns_[k].name == name) return k;
  throw PreconditionError("table '" + name_ + "' has no column '" + std::string(name) + "'");
}

double ResultTable::number(std::size_t row, std::string_view column) const {
  const Cell& c = rows_.at(row).at(column_index(column));
  if (const double* d = std::get_if<double>(&c)) return *d;
  if (const long long* i = std::get_if<long long>(&c)) return double(*i);
  throw PreconditionError("table '" + name_ + "': column '" + std::string(column) + "' is text");
}

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("cannot format number");
  return std::string(buf, p);
}

std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t k = 0; k < columns_.size(); ++k) out += (k ? "," : "") + csv_field(header(columns_[k]));
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) out += format_number(v);
            else if constexpr (std::is_same_v<V, long long>) out += std::to_string(v);
            else out += csv_field(v);
          },
          row[k]);
    }
    out += '\n';
  }
  return out;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string results_to_json(const RunMetadata& meta, const std::vector<ResultTable>& tables) {
  json doc;
  json m;
  m["command"] = meta.command;
  m["version"] = meta.version;
  m["seed"] = meta.seed ? json(*meta.seed) : json(nullptr);
  m["scenario_hash"] = meta.scenario_hash;
  m["warnings"] = meta.warnings;
  doc["metadata"] = std::move(m);
  json ts = json::array();
  for (const ResultTable& t : tables) {
    json jt;
    jt["name"] = t.name();
    json cols = json::array();
    for (const Column& c : t.columns()) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    jt["columns"] = std::move(cols);
    json rows = json::array();
    for (const auto& row : t.rows()) {
      json r = json::array();
      for (const Cell& c : row) std::visit([&](const auto& v) { r.push_back(v); }, c);
      rows.push_back(std::move(r));
    }
    jt["rows"] = std::move(rows);
    ts.push_back(std::move(jt));
  }
  doc["tables"] = std::move(ts);
  return doc.dump(2) + "\n";
}

namespace {

std::pair<RunMetadata, std::vector<ResultTable>> read_document(const json& doc) {
  RunMetadata meta;
  const json& m = doc.at("metadata");
  meta.command = m.at("command").get<std::string>();
  meta.version = m.at("version").get<std::string>();
  if (!m.at("seed").is_null()) meta.seed = m.at("seed").get<long long>();
  meta.scenario_hash = m.at("scenario_hash").get<std::string>();
  meta.warnings = m.at("warnings").get<std::vector<std::string>>();
  std::vector<ResultTable> tables;
  for (const json& jt : doc.at("tables")) {
    std::vector<Column> cols;
    for (const json& c : jt.at("columns")) cols.push_back({c.at("name").get<std::string>(), c.at("unit").get<std::string>()});
    ResultTable t(jt.at("name").get<std::string>(), std::move(cols));
    for (const json& r : jt.at("rows")) {
      std::vector<Cell> row;
      for (const json& v : r) {
        if (v.is_string()) row.emplace_back(v.get<std::string>());
        else if (v.is_number_integer()) row.emplace_back(v.get<long long>());
        else row.emplace_back(v.get<double>());
      }
      t.add_row(std::move(row));
    }
    tables.push_back(std::move(t));
  }
  return {std::move(meta), std::move(tables)};
}

}  // namespace

std::pair<RunMetadata, std::vector<ResultTable>> results_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("result document: ") + e.what());
  }
  try {
    return read_document(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("result document: ") + e.what());
  }
}

}  // namespace hybridq
