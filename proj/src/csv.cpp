#include "mrp/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "mrp/common.hpp"

namespace mrp::csv {

namespace {

std::vector<std::string> split_line(const std::string& raw, const Reader& ctx) {
  std::vector<std::string> out;
  std::string_view rest = raw;
  if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
  for (;;) {
    auto comma = rest.find(',');
    std::string_view cell = rest.substr(0, comma);
    if (cell.find('"') != std::string_view::npos) {
      ctx.fail("quoted fields are not supported");
    }
    out.emplace_back(trim(cell));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Reader::Reader(std::istream& in, std::string name,
               const std::vector<std::string>& required, bool exact)
    : in_(in), name_(std::move(name)) {
  std::string header;
  if (!std::getline(in_, header)) fail("empty file, expected a header row");
  ++line_;
  columns_.clear();
  for (auto& c : split_line(header, *this)) columns_.push_back(c);
  n_columns_ = columns_.size();
  for (const auto& want : required) {
    if (std::find(columns_.begin(), columns_.end(), want) == columns_.end()) {
      fail("missing required column '" + want + "'");
    }
  }
  if (exact) {
    for (const auto& have : columns_) {
      if (std::find(required.begin(), required.end(), have) == required.end()) {
        fail("unexpected column '" + have + "'");
      }
    }
  }
}

bool Reader::next() {
  std::string raw;
  for (;;) {
    if (!std::getline(in_, raw)) return false;
    ++line_;
    if (trim(raw).empty()) continue;
    break;
  }
  fields_ = split_line(raw, *this);
  if (fields_.size() != n_columns_) {
    fail("row has " + std::to_string(fields_.size()) + " fields, header has " +
         std::to_string(n_columns_));
  }
  return true;
}

const std::string& Reader::field(const std::string& column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == column) return fields_[i];
  }
  fail("no column named '" + column + "'");
}

bool Reader::has_column(const std::string& column) const {
  return std::find(columns_.begin(), columns_.end(), column) != columns_.end();
}

void Reader::fail(const std::string& message) const {
  throw ValidationError(name_ + ":" + std::to_string(line_) + ": " + message);
}

double Reader::parse_double(const std::string& column) const {
  const std::string& s = field(column);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail("field '" + column + "' is not a number: '" + s + "'");
  }
  return v;
}

int Reader::parse_int(const std::string& column) const {
  const std::string& s = field(column);
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail("field '" + column + "' is not an integer: '" + s + "'");
  }
  return static_cast<int>(v);
}

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace mrp::csv
