#include "hjdc/csv.hpp"

#include <cmath>
#include <cstdio>

#include "hjdc/common.hpp"

namespace hjdc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw IoError("cannot write '" + path + "'");
  for (const auto& h : header) text(h);
  end_row();
}

void CsvWriter::sep() {
  if (filled_ == columns_) throw IoError(path_ + ": too many fields in row");
  if (filled_ > 0) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::num(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::num(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::text(const std::string& s) {
  sep();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw IoError(path_ + ": short row");
  out_ << '\n';
  filled_ = 0;
  if (!out_) throw IoError("write failed on '" + path_ + "'");
}

}  // namespace hjdc
