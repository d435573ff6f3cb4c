#pragma once

#include <string>
#include <vector>

namespace fdr::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated table with a mandatory header row. Blank lines and
// lines starting with '#' are skipped. No quoting: fields may not contain commas.
Table read_table(const std::string& path);

std::vector<std::string> split(const std::string& line, char sep);
std::string trim(const std::string& s);

// Strict finite-double parse; throws std::invalid_argument on junk.
double parse_double(const std::string& s);

// 17 significant digits, round-trip safe; prints "nan"/"inf" for specials.
std::string fmt17(double x);

}  // namespace fdr::csv
