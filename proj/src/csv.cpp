#include "fdr/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fdr::csv {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto fields = split(s, ',');
    if (!have_header) {
      t.header = fields;
      have_header = true;
    } else {
      if (fields.size() != t.header.size())
        throw std::runtime_error(path + ": row has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(t.header.size()));
      t.rows.push_back(fields);
    }
  }
  if (!have_header) throw std::runtime_error(path + ": missing header row");
  return t;
}

double parse_double(const std::string& s) {
  const std::string v = trim(s);
  if (v.empty()) throw std::invalid_argument("empty numeric field");
  std::size_t used = 0;
  double x;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + v + "'");
  }
  if (used != v.size()) throw std::invalid_argument("trailing junk in number: '" + v + "'");
  return x;
}

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace fdr::csv
