#pragma once
// Minimal CSV reading/writing helpers. All on-disk artifacts in this project
// are CSV files, optionally preceded by '# key: value' metadata lines.

#include <map>
#include <string>
#include <vector>

namespace scengen::csv {

struct Table {
  std::map<std::string, std::string> meta;  // leading '# key: value' lines
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

Table read_file(const std::string& path);

// strict numeric parse; throws std::runtime_error naming the offending cell
double to_double(const std::string& cell, const std::string& context);
long to_long(const std::string& cell, const std::string& context);

// full round-trip precision for doubles
std::string format_double(double v);

std::vector<std::string> split_line(const std::string& line);

// Writes via a temp file in the same directory followed by an atomic rename.
void write_file(const std::string& path, const std::map<std::string, std::string>& meta,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace scengen::csv
