#pragma once

// Time-series CSV writer.  Values print with %.17g so identical doubles give
// identical bytes run to run.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymlab {

class CsvWriter {
 public:
  CsvWriter() = default;

  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open CSV for writing: " + path);
    for (size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    char buf[32];
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
      out_ << buf;
    }
    out_ << '\n';
    out_.flush();
  }

  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
};

}  // namespace ymlab
