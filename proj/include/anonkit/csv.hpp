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
#ifndef ANONKIT_CSV_HPP_
#define ANONKIT_CSV_HPP_

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace anonkit {

// RFC-4180-style quoting: fields containing commas, quotes or newlines are
// quoted, embedded quotes doubled.
std::string csv_escape(const std::string& field);

// Deterministic shortest-roundtrip formatting for doubles.
std::string csv_number(double value);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Splits one CSV line honoring quotes. No multi-line fields.
std::vector<std::string> parse_csv_line(const std::string& line);

// Reads a sample matrix (one row per record) from the line format shared
// with the gallery export: a "dim,count" header, then comma-separated
// components with an optional trailing label column, which is dropped.
Eigen::MatrixXd load_sample_matrix(const std::string& path);

}  // namespace anonkit

#endif  // ANONKIT_CSV_HPP_
