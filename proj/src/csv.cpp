// Copyright 2026 The anonkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "anonkit/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace anonkit {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  // Shortest representation that round-trips a double.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

Eigen::MatrixXd load_sample_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_sample_matrix: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_sample_matrix: missing header line");
  Eigen::Index d = 0, n = 0;
  {
    std::istringstream hs(line);
    char comma = 0;
    if (!(hs >> d >> comma >> n) || comma != ',' || d < 1 || n < 1)
      throw std::runtime_error(
          "load_sample_matrix: malformed header (want dim,count)");
  }
  Eigen::MatrixXd samples(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("load_sample_matrix: fewer records than count");
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(vals.size()) != d &&
        static_cast<Eigen::Index>(vals.size()) != d + 1)
      throw std::runtime_error(
          "load_sample_matrix: record width does not match dimension");
    for (Eigen::Index j = 0; j < d; ++j)
      samples(i, j) = vals[static_cast<std::size_t>(j)];
  }
  return samples;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // tolerated at line end
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("parse_csv_line: unterminated quote");
  fields.push_back(cur);
  return fields;
}

}  // namespace anonkit
