#pragma once

#include "gknockoff/common.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace gk::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // raw cells, one vector per data row

  Index ncols() const { return static_cast<Index>(header.size()); }
  Index nrows() const { return static_cast<Index>(rows.size()); }
  // Column index by header name; throws ErrorKind::config when missing.
  Index column(const std::string& name) const;
  // Numeric column ('.' decimal); reports 1-based row/column on bad cells.
  Vector numeric_column(const std::string& name) const;
};

// Strict comma-separated reader: one header row, uniform column counts, optional
// double-quoted cells.
CsvTable read_csv(const std::string& path);

// Flat key = value configuration ('#' comments, blank lines allowed). Duplicate
// keys are rejected.
std::map<std::string, std::string> parse_config(const std::string& path);

// Rejects any key outside `allowed`, naming the offender.
void check_keys(const std::map<std::string, std::string>& cfg,
                const std::set<std::string>& allowed);

// FNV-1a 64-bit over the canonical "key=value\n" lines in sorted key order.
std::string config_hash(const std::map<std::string, std::string>& cfg);

double to_double(const std::string& key, const std::string& value);
long to_long(const std::string& key, const std::string& value);
std::vector<double> to_double_list(const std::string& key, const std::string& value);
std::vector<std::string> split_list(const std::string& value);

}  // namespace gk::io
