#include "scengen/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace scengen::csv {

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  // trim surrounding spaces
  for (auto& s : out) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    s = (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
  }
  return out;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      // '# key: value' metadata line
      std::string body = line.substr(1);
      std::size_t colon = body.find(':');
      if (colon != std::string::npos) {
        std::string key = body.substr(0, colon);
        std::string val = body.substr(colon + 1);
        auto trim = [](std::string& s) {
          std::size_t a = s.find_first_not_of(" \t");
          std::size_t b = s.find_last_not_of(" \t");
          s = (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        trim(key);
        trim(val);
        t.meta[key] = val;
      }
      continue;
    }
    if (!have_header) {
      t.header = split_line(line);
      have_header = true;
    } else {
      t.rows.push_back(split_line(line));
    }
  }
  if (!have_header) throw std::runtime_error("schema error: no header row in " + path);
  return t;
}

double to_double(const std::string& cell, const std::string& context) {
  if (cell.empty()) throw std::runtime_error("schema error: empty numeric cell at " + context);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE)
    throw std::runtime_error("schema error: bad numeric value '" + cell + "' at " + context);
  return v;
}

long to_long(const std::string& cell, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(cell.c_str(), &end, 10);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE)
    throw std::runtime_error("schema error: bad integer value '" + cell + "' at " + context);
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::map<std::string, std::string>& meta,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    for (const auto& [k, v] : meta) out << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace scengen::csv
