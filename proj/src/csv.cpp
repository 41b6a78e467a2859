#include "opboost/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "opboost/errors.hpp"

namespace opboost {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("csv: no column named '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  std::size_t col = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& cell = rows[r][col];
    try {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      out.push_back(v);
    } catch (const std::exception&) {
      throw DataError("csv: non-numeric value '" + cell + "' in column '" + name +
                      "' row " + std::to_string(r + 2));
    }
  }
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot read " + path);
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split_row(line);
      continue;
    }
    std::vector<std::string> row = split_row(line);
    if (row.size() != table.header.size())
      throw DataError("csv: row with " + std::to_string(row.size()) + " fields, expected " +
                      std::to_string(table.header.size()) + " in " + path);
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw DataError("csv: empty file " + path);
  return table;
}

DatasetConfig parse_dataset_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  DatasetConfig cfg;
  ColumnSpec* current = nullptr;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: unterminated section at line " + std::to_string(lineno));
      std::string section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("column.", 0) != 0)
        throw ConfigError("config: unknown section [" + section + "]");
      cfg.features.push_back(ColumnSpec{});
      current = &cfg.features.back();
      current->name = section.substr(7);
      if (current->name.empty())
        throw ConfigError("config: empty column name at line " + std::to_string(lineno));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!current)
      throw ConfigError("config: key outside any [column.*] section at line " +
                        std::to_string(lineno));
    try {
      if (key == "lower") current->lower = std::stod(val);
      else if (key == "upper") current->upper = std::stod(val);
      else if (key == "role") current->role = val;
      else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config: bad numeric value '" + val + "' at line " +
                        std::to_string(lineno));
    }
  }

  // split off the label column; validate the rest
  std::vector<ColumnSpec> feats;
  for (const ColumnSpec& c : cfg.features) {
    if (c.role == "label") {
      if (!cfg.label_column.empty())
        throw ConfigError("config: more than one label column declared");
      cfg.label_column = c.name;
      continue;
    }
    if (c.role != "a" && c.role != "b")
      throw ConfigError("config: column '" + c.name + "' needs role a, b, or label");
    if (!(c.lower < c.upper))
      throw ConfigError("config: column '" + c.name + "' needs lower < upper");
    feats.push_back(c);
  }
  cfg.features = std::move(feats);
  return cfg;
}

}  // namespace opboost
