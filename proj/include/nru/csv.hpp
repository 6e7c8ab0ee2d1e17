#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nru {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// 9 significant digits, "" for NaN, "inf" / "-inf" for infinities.
std::string format_number(double v);
// Inverse of format_number; "" gives NaN.
double parse_number(const std::string& s);

// RFC 4180: fields with comma, quote, CR or LF are quoted, quotes doubled,
// records end in CRLF. The header is always written.
void write_csv(std::ostream& out, const CsvTable& t);
std::string to_csv(const CsvTable& t);
// Throws IoError naming the path.
void write_csv_file(const std::string& path, const CsvTable& t);

// Accepts CRLF or LF record ends. The first record is the header.
CsvTable parse_csv(const std::string& text);

}  // namespace nru
