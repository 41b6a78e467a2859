#pragma once

#include <string>
#include <vector>

namespace opboost {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;  // throws if absent
  std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Sidecar config describing the dataset columns, INI-style:
//   [column.age]
//   lower = 17
//   upper = 90
//   role = b          ; a = label-holder feature, b = remote feature
//
//   [column.income]
//   role = label
struct ColumnSpec {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::string role;  // "a", "b", or "label"
};

struct DatasetConfig {
  std::vector<ColumnSpec> features;  // roles a/b only
  std::string label_column;          // empty if none declared
};

DatasetConfig parse_dataset_config(const std::string& path);

}  // namespace opboost
