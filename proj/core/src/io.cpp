#include "gknockoff/io.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace gk::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line, Index lineno) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  require(!quoted, ErrorKind::io,
          "unterminated quote on line " + std::to_string(lineno));
  cells.push_back(cur);
  return cells;
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Index>(i);
  }
  fail(ErrorKind::config, "column '" + name + "' not found in the data file");
}

Vector CsvTable::numeric_column(const std::string& name) const {
  const Index c = column(name);
  Vector v(nrows());
  for (Index r = 0; r < nrows(); ++r) {
    const std::string& cell = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    try {
      std::size_t used = 0;
      v(r) = std::stod(cell, &used);
      require(used == trim(cell).size() && !trim(cell).empty(), ErrorKind::io, "");
    } catch (...) {
      fail(ErrorKind::io, "non-numeric cell '" + cell + "' at row " + std::to_string(r + 2) +
                              ", column " + std::to_string(c + 1) + " ('" + name + "')");
    }
  }
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::io, "cannot open data file: " + path);

  CsvTable t;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      t.header = split_csv_line(line, lineno);
      for (auto& h : t.header) h = trim(h);
      require(!t.header.empty(), ErrorKind::io, "empty header row");
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line, lineno);
    require(cells.size() == t.header.size(), ErrorKind::io,
            "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                " cells, expected " + std::to_string(t.header.size()));
    for (auto& c : cells) c = trim(c);
    t.rows.push_back(std::move(cells));
  }
  require(!t.header.empty(), ErrorKind::io, "data file is empty: " + path);
  require(!t.rows.empty(), ErrorKind::io, "data file has no rows: " + path);
  return t;
}

std::map<std::string, std::string> parse_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::config, "cannot open config file: " + path);

  std::map<std::string, std::string> cfg;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::config,
            "config line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    require(!key.empty(), ErrorKind::config,
            "config line " + std::to_string(lineno) + " has an empty key");
    require(cfg.find(key) == cfg.end(), ErrorKind::config, "duplicate config key: " + key);
    cfg[key] = val;
  }
  return cfg;
}

void check_keys(const std::map<std::string, std::string>& cfg,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : cfg) {
    require(allowed.count(key) > 0, ErrorKind::config, "unknown config key: " + key);
  }
}

std::string config_hash(const std::map<std::string, std::string>& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : cfg) {  // std::map iterates in sorted key order
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    require(used == value.size(), ErrorKind::config, "");
    return v;
  } catch (...) {
    fail(ErrorKind::config, "config key '" + key + "' is not a number: '" + value + "'");
  }
}

long to_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    require(used == value.size(), ErrorKind::config, "");
    return v;
  } catch (...) {
    fail(ErrorKind::config, "config key '" + key + "' is not an integer: '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(value);
  while (std::getline(is, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_double(key, item));
  return out;
}

}  // namespace gk::io
