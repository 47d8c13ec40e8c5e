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

#ifndef DOORSIM_CSV_H_
#define DOORSIM_CSV_H_

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace doorsim {

// Round-trippable, byte-stable double formatting for result files.
inline std::string CsvDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    WriteCells(header);
  }

  void WriteRow(const std::vector<std::string>& cells) { WriteCells(cells); }

  void WriteDoubles(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(CsvDouble(v));
    WriteCells(cells);
  }

 private:
  void WriteCells(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); i++) {
      if (i > 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();  // rows are infrequent; keep files tail-able
  }

  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int Column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); i++) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

// Strict comma-split reader; throws std::runtime_error with a line number on
// ragged rows.
CsvTable ReadCsv(const std::string& path);

}  // namespace doorsim

#endif  // DOORSIM_CSV_H_
