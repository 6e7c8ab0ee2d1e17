#include "nru/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nru/error.hpp"

namespace nru {

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0 ? 0.0 : v);  // no "-0"
  return buf;
}

double parse_number(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw DomainError("not a number: '" + s + "'");
  return v;
}

namespace {

void put_field(std::ostream& out, const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) {
    out << f;
    return;
  }
  out << '"';
  for (char c : f) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void put_record(std::ostream& out, const std::vector<std::string>& rec) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i) out << ',';
    put_field(out, rec[i]);
  }
  out << "\r\n";
}

}  // namespace

void write_csv(std::ostream& out, const CsvTable& t) {
  put_record(out, t.header);
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw DomainError("CSV row width differs from the header");
    put_record(out, r);
  }
}

std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  write_csv(out, t);
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> recs;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(field);
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rec.push_back(field);
      recs.push_back(rec);
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DomainError("CSV ends inside a quoted field");
  if (any) {
    rec.push_back(field);
    recs.push_back(rec);
  }
  CsvTable t;
  if (recs.empty()) return t;
  t.header = recs.front();
  t.rows.assign(recs.begin() + 1, recs.end());
  return t;
}

}  // namespace nru
