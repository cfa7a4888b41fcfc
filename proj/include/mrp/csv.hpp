#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace mrp::csv {

// Minimal comma-separated reader for the artifact's fixed schemas: UTF-8,
// '.' decimal point, no quoting (labels and ids must not contain commas or
// double quotes).  CRLF input is accepted.
class Reader {
 public:
  // Reads and validates the header.  `required` lists column names that must
  // all be present; when `exact` is true no other columns are allowed.
  Reader(std::istream& in, std::string name,
         const std::vector<std::string>& required, bool exact);

  // Advances to the next data row; returns false at EOF.  Blank lines are
  // skipped.  Fields are trimmed of surrounding whitespace.
  bool next();

  const std::string& field(const std::string& column) const;
  bool has_column(const std::string& column) const;

  // 1-based line number of the current row, for error context.
  std::size_t line() const { return line_; }
  const std::string& name() const { return name_; }

  // Error with "file:line" context attached.
  [[noreturn]] void fail(const std::string& message) const;

  double parse_double(const std::string& column) const;
  int parse_int(const std::string& column) const;

  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::istream& in_;
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::string> fields_;
  std::size_t line_ = 0;
  std::size_t n_columns_ = 0;
};

std::string format_double(double v, int decimals);

}  // namespace mrp::csv
