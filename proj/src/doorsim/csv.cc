// Copyright 2026 The doorsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doorsim/csv.h"

#include <sstream>
#include <stdexcept>

namespace doorsim {

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);

  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");

    if (lineno == 1) {
      table.header = cells;
    } else {
      if (cells.size() != table.header.size()) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected " + std::to_string(table.header.size()) +
                                 " cells, got " + std::to_string(cells.size()));
      }
      table.rows.push_back(cells);
    }
  }
  return table;
}

}  // namespace doorsim
