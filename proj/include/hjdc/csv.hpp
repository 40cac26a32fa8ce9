#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace hjdc {

/// Comma-separated output with a header row, LF endings and 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& num(double v);
  CsvWriter& num(long long v);
  CsvWriter& text(const std::string& s);
  void end_row();

 private:
  void sep();

  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

}  // namespace hjdc
